#pragma once
// Quantitative evaluation: geometry-only Hungarian matching of detections to
// ground truth, per-coordinate absolute-error distributions (boxplot stats),
// material confusion matrix and accuracy, plus PLY / CSV / text exports.

#include <string>
#include <vector>

#include "rfrecon/model.hpp"
#include "rfrecon/scene.hpp"
#include "rfrecon/set_loss.hpp"

namespace rfrecon {

struct BoxStats {
    double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0;
    double whisker_lo = 0.0, whisker_hi = 0.0;  // 1.5 IQR rule
    long count = 0;
};

BoxStats box_stats(std::vector<double> values);

struct MatchedRow {
    int scene = 0;
    int truth_index = 0, detection_index = 0;
    int true_class = 0, predicted_class = 0;  // 1..L
    double abs_err[4] = {0, 0, 0, 0};         // |dx|, |dy|, |dz|, |dr| in meters
};

struct SceneCounts {
    int matched = 0, missed = 0, spurious = 0;
};

struct EvalReport {
    int n_classes = 0;
    BoxStats error_stats[4];                  // x, y, z, r
    std::vector<long> confusion_counts;       // row-major L x L, rows = true class
    std::vector<double> confusion;            // row-normalized; all-zero rows stay zero
    double overall_accuracy = 0.0;            // correct / matched
    long matched_total = 0, missed_total = 0, spurious_total = 0;
    std::vector<SceneCounts> per_scene;
    std::vector<MatchedRow> rows;

    long confusion_at(int true_cls, int pred_cls) const {
        return confusion_counts[std::size_t(true_cls - 1) * n_classes +
                                std::size_t(pred_cls - 1)];
    }
};

// Matching uses the geometric cost only (l1 + GIoU terms, no class term), so
// label errors cannot distort the localization statistics. Unmatched truths
// are misses, unmatched detections spurious; both excluded from the confusion
// matrix and MAE.
EvalReport evaluate(const std::vector<DetectionSet>& detections,
                    const std::vector<SceneRecord>& truths, int n_classes,
                    const LossWeights& weights, const GeometryRanges& ranges);

// ASCII PLY with per-vertex center, radius and material class.
void export_reconstruction(const DetectionSet& detections, const std::string& path);

void write_report_text(const EvalReport& report, const std::vector<MaterialSpec>& materials,
                       const std::string& path);
void write_matched_csv(const EvalReport& report, const std::string& path);
void write_confusion_csv(const EvalReport& report, const std::vector<MaterialSpec>& materials,
                         const std::string& path);

}  // namespace rfrecon
