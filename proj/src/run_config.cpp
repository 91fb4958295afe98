#include "rfrecon/run_config.hpp"

#include <fstream>
#include <set>

#include "rfrecon/errors.hpp"
#include "rfrecon/features.hpp"

namespace rfrecon {

namespace {

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error("unknown key '" + it.key() + "' in " + where);
}

Vec3 vec3_of(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw config_error(where + " must be a 3-array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void maybe(const nlohmann::json& obj, const char* key, T* out) {
    if (obj.contains(key)) *out = obj.at(key).get<T>();
}

}  // namespace

void RunConfig::resolve() {
    scene.materials = material_subset(material_table_default(), scene_materials);
    model.n_classes = int(scene.materials.size()) + 1;
    model.in_channels = kFeaturesPerConfig * codebook_entries;
    model.grid_x = sim.rx_grid_x;
    model.grid_z = sim.rx_grid_z;
    model.seed = master_seed;

    sim.validate();
    model.validate();
    if (scene_count < 1) throw config_error("scene count must be >= 1");
    if (codebook_entries < 1) throw config_error("codebook entries must be >= 1");
    if (realizations_per_panel < 1) throw config_error("realizations_per_panel must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw config_error("train fraction must be in (0,1)");
    if (!(tau >= 0.0 && tau <= 1.0)) throw config_error("tau must be in [0,1]");
    if (model.n_queries < scene.sphere_count)
        throw config_error("n_queries must be >= sphere count");
}

GeometryRanges RunConfig::geometry_ranges() const {
    GeometryRanges r;
    r.lo = {scene.bounds.min.x, scene.bounds.min.y, scene.bounds.min.z, scene.radius_min};
    r.hi = {scene.bounds.max.x, scene.bounds.max.y, scene.bounds.max.z, scene.radius_max};
    return r;
}

std::vector<int> RunConfig::train_indices(int total) const {
    int n_train = int(double(total) * train_fraction);
    std::vector<int> idx;
    for (int i = 0; i < n_train; ++i) idx.push_back(i);
    return idx;
}

std::vector<int> RunConfig::test_indices(int total) const {
    int n_train = int(double(total) * train_fraction);
    std::vector<int> idx;
    for (int i = n_train; i < total; ++i) idx.push_back(i);
    return idx;
}

RunConfig run_config_defaults() {
    RunConfig c;
    c.resolve();
    return c;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
    RunConfig c;
    check_keys(doc, {"master_seed", "sim", "scene", "codebook", "model", "loss", "train", "eval"},
               "document root");
    maybe(doc, "master_seed", &c.master_seed);

    if (doc.contains("sim")) {
        const auto& s = doc.at("sim");
        check_keys(s,
                   {"room_min", "room_max", "f_c", "tx_position", "tx_power_dbm", "rx_center",
                    "rx_grid", "rx_pitch", "max_reflections", "noise_variance", "c0",
                    "wall_material", "floor_material", "ceiling_material", "ris_walls",
                    "panel_size", "ris_max_hits"},
                   "sim");
        if (s.contains("room_min")) c.sim.room.min = vec3_of(s.at("room_min"), "sim.room_min");
        if (s.contains("room_max")) c.sim.room.max = vec3_of(s.at("room_max"), "sim.room_max");
        maybe(s, "f_c", &c.sim.f_c);
        if (s.contains("tx_position"))
            c.sim.tx_position = vec3_of(s.at("tx_position"), "sim.tx_position");
        maybe(s, "tx_power_dbm", &c.sim.tx_power_dbm);
        if (s.contains("rx_center")) c.sim.rx_center = vec3_of(s.at("rx_center"), "sim.rx_center");
        if (s.contains("rx_grid")) {
            const auto& g = s.at("rx_grid");
            if (!g.is_array() || g.size() != 2) throw config_error("sim.rx_grid must be [nx, nz]");
            c.sim.rx_grid_x = g[0].get<int>();
            c.sim.rx_grid_z = g[1].get<int>();
        }
        maybe(s, "rx_pitch", &c.sim.rx_pitch);
        maybe(s, "max_reflections", &c.sim.max_reflections);
        maybe(s, "noise_variance", &c.sim.noise_variance);
        maybe(s, "c0", &c.sim.c0);
        maybe(s, "wall_material", &c.sim.wall_material);
        maybe(s, "floor_material", &c.sim.floor_material);
        maybe(s, "ceiling_material", &c.sim.ceiling_material);
        if (s.contains("ris_walls")) c.sim.ris_walls = s.at("ris_walls").get<std::vector<int>>();
        maybe(s, "panel_size", &c.sim.panel_size);
        maybe(s, "ris_max_hits", &c.sim.ris_max_hits);
    }

    if (doc.contains("scene")) {
        const auto& s = doc.at("scene");
        check_keys(s,
                   {"count", "spheres", "bounds_min", "bounds_max", "radius_range",
                    "min_separation", "bridson_attempts", "materials"},
                   "scene");
        maybe(s, "count", &c.scene_count);
        maybe(s, "spheres", &c.scene.sphere_count);
        if (s.contains("bounds_min"))
            c.scene.bounds.min = vec3_of(s.at("bounds_min"), "scene.bounds_min");
        if (s.contains("bounds_max"))
            c.scene.bounds.max = vec3_of(s.at("bounds_max"), "scene.bounds_max");
        if (s.contains("radius_range")) {
            const auto& r = s.at("radius_range");
            if (!r.is_array() || r.size() != 2)
                throw config_error("scene.radius_range must be [min, max]");
            c.scene.radius_min = r[0].get<double>();
            c.scene.radius_max = r[1].get<double>();
        }
        maybe(s, "min_separation", &c.scene.min_separation);
        maybe(s, "bridson_attempts", &c.scene.bridson_attempts);
        if (s.contains("materials"))
            c.scene_materials = s.at("materials").get<std::vector<std::string>>();
    }

    if (doc.contains("codebook")) {
        const auto& s = doc.at("codebook");
        check_keys(s, {"entries", "realizations_per_panel"}, "codebook");
        maybe(s, "entries", &c.codebook_entries);
        maybe(s, "realizations_per_panel", &c.realizations_per_panel);
    }

    if (doc.contains("model")) {
        const auto& s = doc.at("model");
        check_keys(s,
                   {"encoder_layers", "decoder_layers", "heads", "hidden_dim", "ff_dim",
                    "n_queries", "learning_rate", "weight_decay", "batch_size", "epochs"},
                   "model");
        maybe(s, "encoder_layers", &c.model.encoder_layers);
        maybe(s, "decoder_layers", &c.model.decoder_layers);
        maybe(s, "heads", &c.model.heads);
        maybe(s, "hidden_dim", &c.model.hidden_dim);
        maybe(s, "ff_dim", &c.model.ff_dim);
        maybe(s, "n_queries", &c.model.n_queries);
        maybe(s, "learning_rate", &c.model.learning_rate);
        maybe(s, "weight_decay", &c.model.weight_decay);
        maybe(s, "batch_size", &c.model.batch_size);
        maybe(s, "epochs", &c.model.epochs);
    }

    if (doc.contains("loss")) {
        const auto& s = doc.at("loss");
        check_keys(s, {"l1", "giou", "cls", "no_object"}, "loss");
        maybe(s, "l1", &c.loss.l1);
        maybe(s, "giou", &c.loss.giou);
        maybe(s, "cls", &c.loss.cls);
        maybe(s, "no_object", &c.loss.no_object);
    }

    if (doc.contains("train")) {
        const auto& s = doc.at("train");
        check_keys(s, {"fraction"}, "train");
        maybe(s, "fraction", &c.train_fraction);
    }

    if (doc.contains("eval")) {
        const auto& s = doc.at("eval");
        check_keys(s, {"tau"}, "eval");
        maybe(s, "tau", &c.tau);
    }

    c.resolve();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
    return parse_run_config(doc);
}

nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json doc;
    doc["master_seed"] = c.master_seed;
    doc["sim"] = {
        {"room_min", {c.sim.room.min.x, c.sim.room.min.y, c.sim.room.min.z}},
        {"room_max", {c.sim.room.max.x, c.sim.room.max.y, c.sim.room.max.z}},
        {"f_c", c.sim.f_c},
        {"tx_position", {c.sim.tx_position.x, c.sim.tx_position.y, c.sim.tx_position.z}},
        {"tx_power_dbm", c.sim.tx_power_dbm},
        {"rx_center", {c.sim.rx_center.x, c.sim.rx_center.y, c.sim.rx_center.z}},
        {"rx_grid", {c.sim.rx_grid_x, c.sim.rx_grid_z}},
        {"rx_pitch", c.sim.rx_pitch},
        {"max_reflections", c.sim.max_reflections},
        {"noise_variance", c.sim.noise_variance},
        {"c0", c.sim.c0},
        {"wall_material", c.sim.wall_material},
        {"floor_material", c.sim.floor_material},
        {"ceiling_material", c.sim.ceiling_material},
        {"ris_walls", c.sim.ris_walls},
        {"panel_size", c.sim.panel_size},
        {"ris_max_hits", c.sim.ris_max_hits},
    };
    doc["scene"] = {
        {"count", c.scene_count},
        {"spheres", c.scene.sphere_count},
        {"bounds_min", {c.scene.bounds.min.x, c.scene.bounds.min.y, c.scene.bounds.min.z}},
        {"bounds_max", {c.scene.bounds.max.x, c.scene.bounds.max.y, c.scene.bounds.max.z}},
        {"radius_range", {c.scene.radius_min, c.scene.radius_max}},
        {"min_separation", c.scene.min_separation},
        {"bridson_attempts", c.scene.bridson_attempts},
        {"materials", c.scene_materials},
    };
    doc["codebook"] = {{"entries", c.codebook_entries},
                       {"realizations_per_panel", c.realizations_per_panel}};
    doc["model"] = {
        {"encoder_layers", c.model.encoder_layers}, {"decoder_layers", c.model.decoder_layers},
        {"heads", c.model.heads},                   {"hidden_dim", c.model.hidden_dim},
        {"ff_dim", c.model.ff_dim},                 {"n_queries", c.model.n_queries},
        {"learning_rate", c.model.learning_rate},   {"weight_decay", c.model.weight_decay},
        {"batch_size", c.model.batch_size},         {"epochs", c.model.epochs},
    };
    doc["loss"] = {{"l1", c.loss.l1},
                   {"giou", c.loss.giou},
                   {"cls", c.loss.cls},
                   {"no_object", c.loss.no_object}};
    doc["train"] = {{"fraction", c.train_fraction}};
    doc["eval"] = {{"tau", c.tau}};
    return doc;
}

void echo_config(const RunConfig& config, const std::string& output_path) {
    std::ofstream out(output_path + ".config.json", std::ios::binary);
    if (!out) throw Error(Error::Kind::io, "cannot write config echo for " + output_path);
    out << run_config_to_json(config).dump(2) << "\n";
}

}  // namespace rfrecon
