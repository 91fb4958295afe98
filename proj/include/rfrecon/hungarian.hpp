#pragma once
// Minimum-cost bipartite assignment (Kuhn-Munkres with potentials, O(n^3)).
// Rectangular inputs are padded to square internally; every column (task) is
// assigned, so only the real columns' costs enter the optimum.

#include <vector>

namespace rfrecon {

struct MatchResult {
    // assignment[row] = column, or -1 when the row is unmatched.
    std::vector<int> assignment;
    double total_cost = 0.0;

    int matched_count() const {
        int c = 0;
        for (int a : assignment)
            if (a >= 0) ++c;
        return c;
    }
};

// cost is row-major n_rows x n_cols; throws invalid_input on non-finite
// entries. Deterministic result for a given matrix.
MatchResult hungarian(const std::vector<double>& cost, int n_rows, int n_cols);

inline MatchResult hungarian(const std::vector<std::vector<double>>& cost) {
    int n = int(cost.size());
    int m = n > 0 ? int(cost[0].size()) : 0;
    std::vector<double> flat;
    flat.reserve(std::size_t(n) * std::size_t(m));
    for (const auto& row : cost) flat.insert(flat.end(), row.begin(), row.end());
    return hungarian(flat, n, m);
}

}  // namespace rfrecon
