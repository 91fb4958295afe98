#pragma once
// On-disk formats. One container layout for every file kind:
//   magic "RFRC" | u32 format version | u64 header length | JSON header |
//   records: (u64 payload length | payload bytes)*
// All integers and doubles little-endian; readers stream record-at-a-time and
// raise distinct errors for corrupt headers, version mismatches and truncated
// records (naming the record index).

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfrecon/features.hpp"
#include "rfrecon/model.hpp"
#include "rfrecon/scene.hpp"
#include "rfrecon/tracer.hpp"
#include "rfrecon/train.hpp"

namespace rfrecon::io {

inline constexpr std::uint32_t kFormatVersion = 1;

class Writer {
public:
    Writer(const std::string& path, const std::string& kind, const nlohmann::json& meta);
    void write_record(const std::string& payload);
    void close();
    ~Writer();

private:
    std::ofstream out_;
    std::string path_;
    bool closed_ = false;
};

class Reader {
public:
    explicit Reader(const std::string& path);
    const std::string& kind() const { return kind_; }
    const nlohmann::json& meta() const { return meta_; }
    // False at clean end-of-file; throws io_truncated mid-record.
    bool next_record(std::string* payload);
    long records_read() const { return index_; }

private:
    std::ifstream in_;
    std::string path_;
    std::string kind_;
    nlohmann::json meta_;
    long index_ = 0;
};

// --- payload codecs -------------------------------------------------------

std::string encode_scene(const SceneRecord& scene);
SceneRecord decode_scene(const std::string& payload, std::size_t* offset);

std::string encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(const std::string& payload, std::size_t* offset);

// Traced paths for one scene across all codebook entries.
std::string encode_paths(const std::vector<std::vector<AntennaPaths>>& per_config);
std::vector<std::vector<AntennaPaths>> decode_paths(const std::string& payload,
                                                    std::size_t* offset);

struct DatasetRecord {
    SceneRecord scene;
    FeatureMap features;
    bool has_paths = false;
    std::vector<std::vector<AntennaPaths>> paths;  // only when has_paths
};

std::string encode_dataset_record(const DatasetRecord& rec);
DatasetRecord decode_dataset_record(const std::string& payload);

// --- json helpers ---------------------------------------------------------

nlohmann::json materials_to_json(const std::vector<MaterialSpec>& table);
std::vector<MaterialSpec> materials_from_json(const nlohmann::json& j);
nlohmann::json ranges_to_json(const GeometryRanges& r);
GeometryRanges ranges_from_json(const nlohmann::json& j);
nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

// --- weights --------------------------------------------------------------

struct SavedModel {
    ModelConfig config;
    std::unique_ptr<DetrModel> model;
    FeatureStats stats;
    GeometryRanges ranges;
    std::vector<MaterialSpec> materials;
};

void save_weights(const std::string& path, const DetrModel& model, const FeatureStats& stats,
                  const GeometryRanges& ranges, const std::vector<MaterialSpec>& materials);
SavedModel load_weights(const std::string& path);

}  // namespace rfrecon::io
