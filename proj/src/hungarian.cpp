#include "rfrecon/hungarian.hpp"

#include <cmath>
#include <limits>

#include "rfrecon/errors.hpp"

namespace rfrecon {

MatchResult hungarian(const std::vector<double>& cost, int n_rows, int n_cols) {
    if (n_rows < 0 || n_cols < 0 || cost.size() != std::size_t(n_rows) * std::size_t(n_cols))
        throw invalid_input("cost matrix shape mismatch");
    for (double c : cost)
        if (!std::isfinite(c)) throw invalid_input("cost matrix has non-finite entries");

    MatchResult result;
    result.assignment.assign(std::size_t(n_rows), -1);
    if (n_rows == 0 || n_cols == 0) return result;

    // Square size; padded cells cost 0, which shifts every perfect matching by
    // the same constant and leaves the argmin over real cells untouched.
    const int n = std::max(n_rows, n_cols);
    auto at = [&](int i, int j) -> double {
        return (i < n_rows && j < n_cols) ? cost[std::size_t(i) * n_cols + j] : 0.0;
    };

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; p[j] = row assigned to column j.
    std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
    std::vector<int> p(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n) + 1, inf);
        std::vector<char> used(std::size_t(n) + 1, 0);
        do {
            used[std::size_t(j0)] = 1;
            int i0 = p[std::size_t(j0)], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[std::size_t(j)]) continue;
                double cur = at(i0 - 1, j - 1) - u[std::size_t(i0)] - v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(p[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[std::size_t(j0)] != 0);
        do {
            int j1 = way[std::size_t(j0)];
            p[std::size_t(j0)] = p[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    for (int j = 1; j <= n; ++j) {
        int row = p[std::size_t(j)] - 1;
        int col = j - 1;
        if (row < n_rows && col < n_cols) {
            result.assignment[std::size_t(row)] = col;
            result.total_cost += cost[std::size_t(row) * n_cols + col];
        }
    }
    return result;
}

}  // namespace rfrecon
