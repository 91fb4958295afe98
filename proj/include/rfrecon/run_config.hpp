#pragma once
// One JSON document configures every pipeline stage. Unknown keys are
// rejected; each stage archives the resolved configuration next to its
// outputs.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfrecon/model.hpp"
#include "rfrecon/scene.hpp"
#include "rfrecon/set_loss.hpp"
#include "rfrecon/sim.hpp"

namespace rfrecon {

struct RunConfig {
    std::uint64_t master_seed = 1;
    SimulationConfig sim;
    SceneGenParams scene;
    std::vector<std::string> scene_materials = {"brick", "wood", "glass", "ceiling-board",
                                                "metal"};
    int scene_count = 2000;
    int codebook_entries = 5;           // C; paper uses 5 steering realizations
    int realizations_per_panel = 5;
    ModelConfig model;                  // n_classes/in_channels/grid derived on resolve
    LossWeights loss;
    double train_fraction = 0.8;
    double tau = 0.52;

    // Fills the derived model/scene fields and validates everything.
    void resolve();

    GeometryRanges geometry_ranges() const;
    std::vector<int> train_indices(int total) const;
    std::vector<int> test_indices(int total) const;
};

RunConfig run_config_defaults();

// Parses the document, rejecting unknown keys at every level; absent keys keep
// their defaults. Calls resolve().
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

nlohmann::json run_config_to_json(const RunConfig& config);

// Writes the resolved configuration next to a stage output ("<path>.config.json").
void echo_config(const RunConfig& config, const std::string& output_path);

}  // namespace rfrecon
