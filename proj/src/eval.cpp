#include "rfrecon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rfrecon/errors.hpp"
#include "rfrecon/hungarian.hpp"

namespace rfrecon {

namespace {

// Type-7 quantile (linear interpolation) on sorted data.
double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    double pos = q * double(v.size() - 1);
    std::size_t lo = std::size_t(pos);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - double(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
    BoxStats s;
    s.count = long(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / double(values.size());
    s.median = quantile_sorted(values, 0.5);
    s.q1 = quantile_sorted(values, 0.25);
    s.q3 = quantile_sorted(values, 0.75);
    double iqr = s.q3 - s.q1;
    double lo_fence = s.q1 - 1.5 * iqr;
    double hi_fence = s.q3 + 1.5 * iqr;
    s.whisker_lo = values.back();
    s.whisker_hi = values.front();
    for (double v : values) {
        if (v >= lo_fence) {
            s.whisker_lo = v;  // lowest datum inside the fence
            break;
        }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
        if (*it <= hi_fence) {
            s.whisker_hi = *it;
            break;
        }
    }
    return s;
}

EvalReport evaluate(const std::vector<DetectionSet>& detections,
                    const std::vector<SceneRecord>& truths, int n_classes,
                    const LossWeights& weights, const GeometryRanges& ranges) {
    if (detections.size() != truths.size())
        throw invalid_input("detections and truths must cover the same scenes");

    EvalReport report;
    report.n_classes = n_classes;
    report.confusion_counts.assign(std::size_t(n_classes) * std::size_t(n_classes), 0);
    std::vector<double> errs[4];

    for (std::size_t scene = 0; scene < truths.size(); ++scene) {
        const DetectionSet& dets = detections[scene];
        const SceneRecord& truth = truths[scene];
        SceneCounts counts;

        if (!dets.empty() && !truth.spheres.empty()) {
            // Geometry-only cost in normalized coordinates.
            std::vector<double> cost(dets.size() * truth.spheres.size());
            for (std::size_t i = 0; i < dets.size(); ++i) {
                auto pn = ranges.to_normalized(dets[i].geometry);
                Sphere ps{{dets[i].geometry[0], dets[i].geometry[1], dets[i].geometry[2]},
                          dets[i].geometry[3]};
                for (std::size_t j = 0; j < truth.spheres.size(); ++j) {
                    const Sphere& ts = truth.spheres[j].sphere;
                    auto tn = ranges.to_normalized(
                        {ts.center.x, ts.center.y, ts.center.z, ts.radius});
                    double l1 = 0.0;
                    for (int k = 0; k < 4; ++k)
                        l1 += std::abs(pn[std::size_t(k)] - tn[std::size_t(k)]);
                    cost[i * truth.spheres.size() + j] =
                        weights.l1 * l1 + weights.giou * giou_loss(ps, ts).loss;
                }
            }
            MatchResult match =
                hungarian(cost, int(dets.size()), int(truth.spheres.size()));
            for (std::size_t i = 0; i < dets.size(); ++i) {
                int j = match.assignment[i];
                if (j < 0) continue;
                const Detection& d = dets[i];
                const SpherePrimitive& t = truth.spheres[std::size_t(j)];
                MatchedRow row;
                row.scene = int(scene);
                row.truth_index = j;
                row.detection_index = int(i);
                row.true_class = t.material_class;
                row.predicted_class = d.material_class;
                row.abs_err[0] = std::abs(d.geometry[0] - t.sphere.center.x);
                row.abs_err[1] = std::abs(d.geometry[1] - t.sphere.center.y);
                row.abs_err[2] = std::abs(d.geometry[2] - t.sphere.center.z);
                row.abs_err[3] = std::abs(d.geometry[3] - t.sphere.radius);
                for (int k = 0; k < 4; ++k) errs[k].push_back(row.abs_err[k]);
                report.confusion_counts[std::size_t(row.true_class - 1) * n_classes +
                                        std::size_t(row.predicted_class - 1)]++;
                report.rows.push_back(row);
                ++counts.matched;
            }
        }
        counts.missed = int(truth.spheres.size()) - counts.matched;
        counts.spurious = int(dets.size()) - counts.matched;
        report.matched_total += counts.matched;
        report.missed_total += counts.missed;
        report.spurious_total += counts.spurious;
        report.per_scene.push_back(counts);
    }

    for (int k = 0; k < 4; ++k) report.error_stats[k] = box_stats(errs[std::size_t(k)]);

    report.confusion.assign(report.confusion_counts.size(), 0.0);
    long correct = 0;
    for (int t = 0; t < n_classes; ++t) {
        long row_sum = 0;
        for (int p = 0; p < n_classes; ++p)
            row_sum += report.confusion_counts[std::size_t(t) * n_classes + std::size_t(p)];
        for (int p = 0; p < n_classes; ++p) {
            std::size_t idx = std::size_t(t) * n_classes + std::size_t(p);
            if (row_sum > 0)
                report.confusion[idx] =
                    double(report.confusion_counts[idx]) / double(row_sum);
        }
        correct += report.confusion_counts[std::size_t(t) * n_classes + std::size_t(t)];
    }
    report.overall_accuracy =
        report.matched_total > 0 ? double(correct) / double(report.matched_total) : 0.0;
    return report;
}

void export_reconstruction(const DetectionSet& detections, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::io, "cannot open " + path + " for writing");
    out << "ply\n"
        << "format ascii 1.0\n"
        << "comment sphere cloud: center, radius, material class index\n"
        << "element vertex " << detections.size() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "property double radius\nproperty int material\n"
        << "end_header\n";
    for (const Detection& d : detections) {
        out << format_double(d.geometry[0]) << ' ' << format_double(d.geometry[1]) << ' '
            << format_double(d.geometry[2]) << ' ' << format_double(d.geometry[3]) << ' '
            << d.material_class << '\n';
    }
    if (!out) throw Error(Error::Kind::io, "write failed: " + path);
}

void write_report_text(const EvalReport& report, const std::vector<MaterialSpec>& materials,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::io, "cannot open " + path + " for writing");
    const char* axis_name[4] = {"x", "y", "z", "r"};
    out << "matched " << report.matched_total << " missed " << report.missed_total
        << " spurious " << report.spurious_total << "\n";
    out << "overall_accuracy " << format_double(report.overall_accuracy) << "\n";
    for (int k = 0; k < 4; ++k) {
        const BoxStats& s = report.error_stats[std::size_t(k)];
        out << "abs_error_" << axis_name[k] << " mean " << format_double(s.mean) << " median "
            << format_double(s.median) << " q1 " << format_double(s.q1) << " q3 "
            << format_double(s.q3) << " whisker_lo " << format_double(s.whisker_lo)
            << " whisker_hi " << format_double(s.whisker_hi) << " n " << s.count << "\n";
    }
    out << "confusion_rows (true -> predicted, row-normalized)\n";
    for (int t = 0; t < report.n_classes; ++t) {
        out << material_by_class(materials, t + 1).name;
        for (int p = 0; p < report.n_classes; ++p)
            out << ' '
                << format_double(report.confusion[std::size_t(t) * report.n_classes +
                                                  std::size_t(p)]);
        out << "\n";
    }
    if (!out) throw Error(Error::Kind::io, "write failed: " + path);
}

void write_matched_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::io, "cannot open " + path + " for writing");
    out << "scene,truth_index,detection_index,true_class,predicted_class,abs_dx,abs_dy,abs_dz,"
           "abs_dr\n";
    for (const MatchedRow& r : report.rows) {
        out << r.scene << ',' << r.truth_index << ',' << r.detection_index << ','
            << r.true_class << ',' << r.predicted_class;
        for (int k = 0; k < 4; ++k) out << ',' << format_double(r.abs_err[std::size_t(k)]);
        out << '\n';
    }
    if (!out) throw Error(Error::Kind::io, "write failed: " + path);
}

void write_confusion_csv(const EvalReport& report, const std::vector<MaterialSpec>& materials,
                         const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::io, "cannot open " + path + " for writing");
    out << "true\\predicted";
    for (int p = 0; p < report.n_classes; ++p)
        out << ',' << material_by_class(materials, p + 1).name;
    out << '\n';
    for (int t = 0; t < report.n_classes; ++t) {
        out << material_by_class(materials, t + 1).name;
        for (int p = 0; p < report.n_classes; ++p)
            out << ','
                << format_double(report.confusion[std::size_t(t) * report.n_classes +
                                                  std::size_t(p)]);
        out << '\n';
    }
    if (!out) throw Error(Error::Kind::io, "write failed: " + path);
}

}  // namespace rfrecon
