#include "rfrecon/dataset_io.hpp"

#include <cstring>

#include "rfrecon/errors.hpp"

namespace rfrecon::io {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'R', 'C'};

// Little-endian scalar append/read via memcpy (build targets are LE).
template <typename T>
void put(std::string* buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf->append(tmp, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t* off) {
    if (*off + sizeof(T) > buf.size())
        throw Error(Error::Kind::io_truncated, "record payload truncated");
    T v;
    std::memcpy(&v, buf.data() + *off, sizeof(T));
    *off += sizeof(T);
    return v;
}

void put_string(std::string* buf, const std::string& s) {
    put<std::uint32_t>(buf, std::uint32_t(s.size()));
    buf->append(s);
}

std::string get_string(const std::string& buf, std::size_t* off) {
    auto len = get<std::uint32_t>(buf, off);
    if (*off + len > buf.size())
        throw Error(Error::Kind::io_truncated, "record payload truncated");
    std::string s = buf.substr(*off, len);
    *off += len;
    return s;
}

void put_cplx(std::string* buf, const cplx& c) {
    put<double>(buf, c.real());
    put<double>(buf, c.imag());
}

cplx get_cplx(const std::string& buf, std::size_t* off) {
    double re = get<double>(buf, off);
    double im = get<double>(buf, off);
    return {re, im};
}

}  // namespace

Writer::Writer(const std::string& path, const std::string& kind, const nlohmann::json& meta)
    : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(Error::Kind::io, "cannot open " + path + " for writing");
    nlohmann::json header = meta;
    header["kind"] = kind;
    header["format_version"] = kFormatVersion;
    const std::string hjson = header.dump();
    out_.write(kMagic, 4);
    std::uint32_t ver = kFormatVersion;
    out_.write(reinterpret_cast<const char*>(&ver), sizeof(ver));
    std::uint64_t hlen = hjson.size();
    out_.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out_.write(hjson.data(), long(hjson.size()));
    if (!out_) throw Error(Error::Kind::io, "header write failed: " + path);
}

void Writer::write_record(const std::string& payload) {
    std::uint64_t len = payload.size();
    out_.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out_.write(payload.data(), long(payload.size()));
    if (!out_) throw Error(Error::Kind::io, "record write failed: " + path_);
}

void Writer::close() {
    if (closed_) return;
    out_.close();
    closed_ = true;
    if (out_.fail()) throw Error(Error::Kind::io, "close failed: " + path_);
}

Writer::~Writer() {
    if (!closed_) out_.close();
}

Reader::Reader(const std::string& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(Error::Kind::io, "cannot open " + path);
    char magic[4];
    std::uint32_t ver = 0;
    std::uint64_t hlen = 0;
    in_.read(magic, 4);
    in_.read(reinterpret_cast<char*>(&ver), sizeof(ver));
    in_.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in_ || std::memcmp(magic, kMagic, 4) != 0)
        throw Error(Error::Kind::io_corrupt_header, "corrupt header: " + path);
    if (ver != kFormatVersion)
        throw Error(Error::Kind::io_version_mismatch,
                    "format version " + std::to_string(ver) + " unsupported: " + path);
    std::string hjson(hlen, '\0');
    in_.read(hjson.data(), long(hlen));
    if (!in_) throw Error(Error::Kind::io_corrupt_header, "corrupt header: " + path);
    try {
        meta_ = nlohmann::json::parse(hjson);
    } catch (const nlohmann::json::exception&) {
        throw Error(Error::Kind::io_corrupt_header, "header json unparsable: " + path);
    }
    if (!meta_.contains("kind"))
        throw Error(Error::Kind::io_corrupt_header, "header missing kind: " + path);
    kind_ = meta_["kind"].get<std::string>();
}

bool Reader::next_record(std::string* payload) {
    std::uint64_t len = 0;
    in_.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (in_.eof() && in_.gcount() == 0) return false;
    if (!in_ || in_.gcount() != sizeof(len))
        throw Error(Error::Kind::io_truncated,
                    "truncated record " + std::to_string(index_) + " in " + path_);
    payload->resize(len);
    in_.read(payload->data(), long(len));
    if (!in_ || std::uint64_t(in_.gcount()) != len)
        throw Error(Error::Kind::io_truncated,
                    "truncated record " + std::to_string(index_) + " in " + path_);
    ++index_;
    return true;
}

// --- scene ------------------------------------------------------------------

std::string encode_scene(const SceneRecord& scene) {
    std::string buf;
    put<std::uint64_t>(&buf, scene.rng_seed);
    for (double v : {scene.bounds.min.x, scene.bounds.min.y, scene.bounds.min.z,
                     scene.bounds.max.x, scene.bounds.max.y, scene.bounds.max.z})
        put<double>(&buf, v);
    put<double>(&buf, scene.min_separation);
    put<std::uint32_t>(&buf, std::uint32_t(scene.spheres.size()));
    for (const SpherePrimitive& sp : scene.spheres) {
        put<double>(&buf, sp.sphere.center.x);
        put<double>(&buf, sp.sphere.center.y);
        put<double>(&buf, sp.sphere.center.z);
        put<double>(&buf, sp.sphere.radius);
        put<std::int32_t>(&buf, sp.material_class);
    }
    return buf;
}

SceneRecord decode_scene(const std::string& payload, std::size_t* offset) {
    SceneRecord s;
    s.rng_seed = get<std::uint64_t>(payload, offset);
    s.bounds.min.x = get<double>(payload, offset);
    s.bounds.min.y = get<double>(payload, offset);
    s.bounds.min.z = get<double>(payload, offset);
    s.bounds.max.x = get<double>(payload, offset);
    s.bounds.max.y = get<double>(payload, offset);
    s.bounds.max.z = get<double>(payload, offset);
    s.min_separation = get<double>(payload, offset);
    auto n = get<std::uint32_t>(payload, offset);
    s.spheres.resize(n);
    for (auto& sp : s.spheres) {
        sp.sphere.center.x = get<double>(payload, offset);
        sp.sphere.center.y = get<double>(payload, offset);
        sp.sphere.center.z = get<double>(payload, offset);
        sp.sphere.radius = get<double>(payload, offset);
        sp.material_class = get<std::int32_t>(payload, offset);
    }
    return s;
}

// --- feature map --------------------------------------------------------------

std::string encode_feature_map(const FeatureMap& map) {
    std::string buf;
    put<std::uint32_t>(&buf, std::uint32_t(map.n_antennas));
    put<std::uint32_t>(&buf, std::uint32_t(map.n_configs));
    for (double v : map.data) put<double>(&buf, v);
    put_string(&buf, map.provenance);
    return buf;
}

FeatureMap decode_feature_map(const std::string& payload, std::size_t* offset) {
    FeatureMap map;
    map.n_antennas = int(get<std::uint32_t>(payload, offset));
    map.n_configs = int(get<std::uint32_t>(payload, offset));
    std::size_t total = std::size_t(map.n_antennas) * std::size_t(map.channels());
    map.data.resize(total);
    for (double& v : map.data) v = get<double>(payload, offset);
    map.provenance = get_string(payload, offset);
    return map;
}

// --- paths -------------------------------------------------------------------

std::string encode_paths(const std::vector<std::vector<AntennaPaths>>& per_config) {
    std::string buf;
    put<std::uint32_t>(&buf, std::uint32_t(per_config.size()));
    for (const auto& antennas : per_config) {
        put<std::uint32_t>(&buf, std::uint32_t(antennas.size()));
        for (const AntennaPaths& paths : antennas) {
            put<std::uint32_t>(&buf, std::uint32_t(paths.size()));
            for (const PathComponent& p : paths) {
                put<std::int32_t>(&buf, p.rx_antenna);
                put<double>(&buf, p.delay);
                put<double>(&buf, p.azimuth);
                put<double>(&buf, p.elevation);
                put<double>(&buf, p.path_length);
                put_cplx(&buf, p.jones.hh);
                put_cplx(&buf, p.jones.hv);
                put_cplx(&buf, p.jones.vh);
                put_cplx(&buf, p.jones.vv);
                put<std::uint32_t>(&buf, std::uint32_t(p.interactions.size()));
                for (const Interaction& it : p.interactions) {
                    put<std::uint8_t>(&buf, std::uint8_t(it.kind));
                    put<std::int32_t>(&buf, it.id);
                    put<std::int32_t>(&buf, it.sub);
                }
                put<std::uint32_t>(&buf, std::uint32_t(p.vertices.size()));
                for (const Vec3& v : p.vertices) {
                    put<double>(&buf, v.x);
                    put<double>(&buf, v.y);
                    put<double>(&buf, v.z);
                }
            }
        }
    }
    return buf;
}

std::vector<std::vector<AntennaPaths>> decode_paths(const std::string& payload,
                                                    std::size_t* offset) {
    std::vector<std::vector<AntennaPaths>> per_config(get<std::uint32_t>(payload, offset));
    for (auto& antennas : per_config) {
        antennas.resize(get<std::uint32_t>(payload, offset));
        for (AntennaPaths& paths : antennas) {
            paths.resize(get<std::uint32_t>(payload, offset));
            for (PathComponent& p : paths) {
                p.rx_antenna = get<std::int32_t>(payload, offset);
                p.delay = get<double>(payload, offset);
                p.azimuth = get<double>(payload, offset);
                p.elevation = get<double>(payload, offset);
                p.path_length = get<double>(payload, offset);
                p.jones.hh = get_cplx(payload, offset);
                p.jones.hv = get_cplx(payload, offset);
                p.jones.vh = get_cplx(payload, offset);
                p.jones.vv = get_cplx(payload, offset);
                p.interactions.resize(get<std::uint32_t>(payload, offset));
                for (Interaction& it : p.interactions) {
                    it.kind = Interaction::Kind(get<std::uint8_t>(payload, offset));
                    it.id = get<std::int32_t>(payload, offset);
                    it.sub = get<std::int32_t>(payload, offset);
                }
                p.vertices.resize(get<std::uint32_t>(payload, offset));
                for (Vec3& v : p.vertices) {
                    v.x = get<double>(payload, offset);
                    v.y = get<double>(payload, offset);
                    v.z = get<double>(payload, offset);
                }
            }
        }
    }
    return per_config;
}

// --- dataset record ------------------------------------------------------------

std::string encode_dataset_record(const DatasetRecord& rec) {
    std::string buf = encode_scene(rec.scene);
    buf += encode_feature_map(rec.features);
    put<std::uint8_t>(&buf, rec.has_paths ? 1 : 0);
    if (rec.has_paths) buf += encode_paths(rec.paths);
    return buf;
}

DatasetRecord decode_dataset_record(const std::string& payload) {
    DatasetRecord rec;
    std::size_t off = 0;
    rec.scene = decode_scene(payload, &off);
    rec.features = decode_feature_map(payload, &off);
    rec.has_paths = get<std::uint8_t>(payload, &off) != 0;
    if (rec.has_paths) rec.paths = decode_paths(payload, &off);
    return rec;
}

// --- json helpers ------------------------------------------------------------

nlohmann::json materials_to_json(const std::vector<MaterialSpec>& table) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : table)
        arr.push_back({{"name", m.name},
                       {"rel_permittivity", m.rel_permittivity},
                       {"conductivity", m.conductivity},
                       {"class_index", m.class_index}});
    return arr;
}

std::vector<MaterialSpec> materials_from_json(const nlohmann::json& j) {
    std::vector<MaterialSpec> table;
    for (const auto& e : j) {
        MaterialSpec m;
        m.name = e.at("name").get<std::string>();
        m.rel_permittivity = e.at("rel_permittivity").get<double>();
        m.conductivity = e.at("conductivity").get<double>();
        m.class_index = e.at("class_index").get<int>();
        table.push_back(m);
    }
    return table;
}

nlohmann::json ranges_to_json(const GeometryRanges& r) {
    return {{"lo", {r.lo[0], r.lo[1], r.lo[2], r.lo[3]}},
            {"hi", {r.hi[0], r.hi[1], r.hi[2], r.hi[3]}}};
}

GeometryRanges ranges_from_json(const nlohmann::json& j) {
    GeometryRanges r;
    for (int i = 0; i < 4; ++i) {
        r.lo[std::size_t(i)] = j.at("lo").at(std::size_t(i)).get<double>();
        r.hi[std::size_t(i)] = j.at("hi").at(std::size_t(i)).get<double>();
    }
    return r;
}

nlohmann::json model_config_to_json(const ModelConfig& c) {
    return {{"encoder_layers", c.encoder_layers},
            {"decoder_layers", c.decoder_layers},
            {"heads", c.heads},
            {"hidden_dim", c.hidden_dim},
            {"ff_dim", c.ff_dim},
            {"n_queries", c.n_queries},
            {"n_classes", c.n_classes},
            {"grid_x", c.grid_x},
            {"grid_z", c.grid_z},
            {"in_channels", c.in_channels},
            {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.heads = j.at("heads").get<int>();
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.ff_dim = j.at("ff_dim").get<int>();
    c.n_queries = j.at("n_queries").get<int>();
    c.n_classes = j.at("n_classes").get<int>();
    c.grid_x = j.at("grid_x").get<int>();
    c.grid_z = j.at("grid_z").get<int>();
    c.in_channels = j.at("in_channels").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

// --- weights -----------------------------------------------------------------

void save_weights(const std::string& path, const DetrModel& model, const FeatureStats& stats,
                  const GeometryRanges& ranges, const std::vector<MaterialSpec>& materials) {
    nlohmann::json meta;
    meta["model_config"] = model_config_to_json(model.config());
    meta["geometry_ranges"] = ranges_to_json(ranges);
    meta["materials"] = materials_to_json(materials);
    nlohmann::json mean = nlohmann::json::array(), sd = nlohmann::json::array();
    for (Eigen::Index i = 0; i < stats.mean.size(); ++i) {
        mean.push_back(stats.mean(i));
        sd.push_back(stats.std_dev(i));
    }
    meta["feature_mean"] = mean;
    meta["feature_std"] = sd;

    Writer w(path, "weights", meta);
    for (const nn::Param* p : model.params()) {
        std::string buf;
        put_string(&buf, p->name);
        put<std::uint64_t>(&buf, std::uint64_t(p->value.rows()));
        put<std::uint64_t>(&buf, std::uint64_t(p->value.cols()));
        for (Eigen::Index i = 0; i < p->value.rows(); ++i)
            for (Eigen::Index j = 0; j < p->value.cols(); ++j)
                put<double>(&buf, p->value(i, j));
        w.write_record(buf);
    }
    w.close();
}

SavedModel load_weights(const std::string& path) {
    Reader r(path);
    if (r.kind() != "weights")
        throw Error(Error::Kind::io_corrupt_header, "not a weights file: " + path);

    SavedModel out;
    out.config = model_config_from_json(r.meta().at("model_config"));
    out.ranges = ranges_from_json(r.meta().at("geometry_ranges"));
    out.materials = materials_from_json(r.meta().at("materials"));
    const auto& mean = r.meta().at("feature_mean");
    const auto& sd = r.meta().at("feature_std");
    out.stats.mean.resize(Eigen::Index(mean.size()));
    out.stats.std_dev.resize(Eigen::Index(sd.size()));
    for (std::size_t i = 0; i < mean.size(); ++i) {
        out.stats.mean(Eigen::Index(i)) = mean.at(i).get<double>();
        out.stats.std_dev(Eigen::Index(i)) = sd.at(i).get<double>();
    }

    out.model = std::make_unique<DetrModel>(out.config);
    std::string payload;
    std::size_t next_param = 0;
    auto& params = out.model->params();
    while (r.next_record(&payload)) {
        if (next_param >= params.size())
            throw Error(Error::Kind::io_corrupt_header, "extra parameter records: " + path);
        std::size_t off = 0;
        std::string name = get_string(payload, &off);
        auto rows = get<std::uint64_t>(payload, &off);
        auto cols = get<std::uint64_t>(payload, &off);
        nn::Param* p = params[next_param];
        if (name != p->name || Eigen::Index(rows) != p->value.rows() ||
            Eigen::Index(cols) != p->value.cols())
            throw Error(Error::Kind::io_corrupt_header,
                        "parameter mismatch at " + name + " in " + path);
        for (Eigen::Index i = 0; i < p->value.rows(); ++i)
            for (Eigen::Index j = 0; j < p->value.cols(); ++j)
                p->value(i, j) = get<double>(payload, &off);
        ++next_param;
    }
    if (next_param != params.size())
        throw Error(Error::Kind::io_truncated, "missing parameter records in " + path);
    return out;
}

}  // namespace rfrecon::io
