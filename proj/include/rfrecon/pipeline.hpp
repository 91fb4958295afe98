#pragma once
// Pipeline stages shared by the CLI and the acceptance suite. Every stage is
// deterministic in the run config's master seed: scene seeds, the codebook,
// noise, model init and batch order all derive from it.

#include <string>
#include <vector>

#include "rfrecon/dataset_io.hpp"
#include "rfrecon/eval.hpp"
#include "rfrecon/run_config.hpp"
#include "rfrecon/train.hpp"

namespace rfrecon {

std::uint64_t scene_seed(const RunConfig& config, int scene_index);
std::uint64_t codebook_seed(const RunConfig& config);

// Scene generation retries rejected seeds (placement-infeasible) with a
// deterministic per-index retry chain.
SceneRecord generate_scene_for_index(const RunConfig& config, int scene_index);

// Traces all codebook entries for one scene.
std::vector<std::vector<AntennaPaths>> trace_scene(const RunConfig& config,
                                                   const RISCodebook& codebook,
                                                   const SceneRecord& scene);

io::DatasetRecord build_dataset_record(const RunConfig& config, const RISCodebook& codebook,
                                       int scene_index, bool keep_paths);

// Stage entry points (each writes a config echo next to its output).
void stage_gen_scenes(const RunConfig& config, int count, const std::string& out_path);
void stage_simulate(const RunConfig& config, const std::string& scenes_path,
                    const std::string& out_path);
void stage_extract_features(const RunConfig& config, const std::string& paths_path,
                            const std::string& out_path);
void stage_build_dataset(const RunConfig& config, int count, const std::string& out_path,
                         bool keep_paths);

struct TrainOutcome {
    TrainHistory history;
    FeatureStats stats;
};

// Loads a dataset file into labeled samples (features stay raw).
std::vector<LabeledSample> load_labeled_dataset(const std::string& dataset_path,
                                                const GeometryRanges& ranges,
                                                std::vector<SceneRecord>* scenes = nullptr);

TrainOutcome stage_train(const RunConfig& config, const std::string& dataset_path,
                         const std::string& weights_path, const std::string& curve_path);

struct EvalOutcome {
    EvalReport report;
    std::vector<DetectionSet> detections;
    std::vector<SceneRecord> truths;
};

// split: "test", "train" or "all".
EvalOutcome stage_eval(const RunConfig& config, const std::string& dataset_path,
                       const std::string& weights_path, const std::string& out_prefix,
                       double tau, const std::string& split);

}  // namespace rfrecon
