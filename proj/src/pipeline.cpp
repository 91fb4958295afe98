#include "rfrecon/pipeline.hpp"

#include <fstream>

#include "rfrecon/parallel.hpp"
#include "rfrecon/rng.hpp"

namespace rfrecon {

std::uint64_t scene_seed(const RunConfig& config, int scene_index) {
    return derive_seed(config.master_seed, {0x7363656e65ULL, std::uint64_t(scene_index)});
}

std::uint64_t codebook_seed(const RunConfig& config) {
    return derive_seed(config.master_seed, {0x636f6465ULL});
}

SceneRecord generate_scene_for_index(const RunConfig& config, int scene_index) {
    std::uint64_t seed = scene_seed(config, scene_index);
    for (int attempt = 0;; ++attempt) {
        try {
            return generate_scene(seed, config.scene);
        } catch (const Error& e) {
            if (e.kind != Error::Kind::infeasible_placement || attempt >= 64) throw;
            seed = derive_seed(seed, {0x7265747279ULL});  // deterministic retry chain
        }
    }
}

std::vector<std::vector<AntennaPaths>> trace_scene(const RunConfig& config,
                                                   const RISCodebook& codebook,
                                                   const SceneRecord& scene) {
    std::vector<std::vector<AntennaPaths>> per_config;
    per_config.reserve(std::size_t(config.codebook_entries));
    for (int c = 0; c < config.codebook_entries; ++c)
        per_config.push_back(trace_paths(scene, config.sim, codebook, c, config.scene.materials));
    return per_config;
}

io::DatasetRecord build_dataset_record(const RunConfig& config, const RISCodebook& codebook,
                                       int scene_index, bool keep_paths) {
    io::DatasetRecord rec;
    rec.scene = generate_scene_for_index(config, scene_index);
    auto per_config = trace_scene(config, codebook, rec.scene);
    rec.features =
        assemble_feature_map(per_config, "scene " + std::to_string(scene_index));
    rec.has_paths = keep_paths;
    if (keep_paths) rec.paths = std::move(per_config);
    return rec;
}

namespace {

nlohmann::json dataset_meta(const RunConfig& config) {
    nlohmann::json meta;
    meta["materials"] = io::materials_to_json(config.scene.materials);
    meta["n_antennas"] = config.sim.n_antennas();
    meta["n_configs"] = config.codebook_entries;
    meta["n_features"] = kFeaturesPerConfig;
    meta["geometry_ranges"] = io::ranges_to_json(config.geometry_ranges());
    meta["config"] = run_config_to_json(config);
    return meta;
}

}  // namespace

void stage_gen_scenes(const RunConfig& config, int count, const std::string& out_path) {
    io::Writer w(out_path, "scenes", dataset_meta(config));
    for (int i = 0; i < count; ++i)
        w.write_record(io::encode_scene(generate_scene_for_index(config, i)));
    w.close();
    echo_config(config, out_path);
}

void stage_simulate(const RunConfig& config, const std::string& scenes_path,
                    const std::string& out_path) {
    io::Reader r(scenes_path);
    if (r.kind() != "scenes")
        throw Error(Error::Kind::io_corrupt_header, "not a scenes file: " + scenes_path);
    RISCodebook codebook = build_codebook(codebook_seed(config), config.codebook_entries,
                                          config.realizations_per_panel, config.sim);

    std::vector<SceneRecord> scenes;
    std::string payload;
    while (r.next_record(&payload)) {
        std::size_t off = 0;
        scenes.push_back(io::decode_scene(payload, &off));
    }

    std::vector<std::string> encoded(scenes.size());
    parallel_for(long(scenes.size()), worker_count(), [&](long i) {
        std::string buf = io::encode_scene(scenes[std::size_t(i)]);
        buf += io::encode_paths(trace_scene(config, codebook, scenes[std::size_t(i)]));
        encoded[std::size_t(i)] = std::move(buf);
    });

    io::Writer w(out_path, "paths", dataset_meta(config));
    for (const std::string& e : encoded) w.write_record(e);
    w.close();
    echo_config(config, out_path);
}

void stage_extract_features(const RunConfig& config, const std::string& paths_path,
                            const std::string& out_path) {
    io::Reader r(paths_path);
    if (r.kind() != "paths")
        throw Error(Error::Kind::io_corrupt_header, "not a paths file: " + paths_path);

    io::Writer w(out_path, "dataset", dataset_meta(config));
    std::string payload;
    long index = 0;
    while (r.next_record(&payload)) {
        std::size_t off = 0;
        io::DatasetRecord rec;
        rec.scene = io::decode_scene(payload, &off);
        auto per_config = io::decode_paths(payload, &off);
        rec.features = assemble_feature_map(per_config, "scene " + std::to_string(index));
        w.write_record(io::encode_dataset_record(rec));
        ++index;
    }
    w.close();
    echo_config(config, out_path);
}

void stage_build_dataset(const RunConfig& config, int count, const std::string& out_path,
                         bool keep_paths) {
    RISCodebook codebook = build_codebook(codebook_seed(config), config.codebook_entries,
                                          config.realizations_per_panel, config.sim);
    io::Writer w(out_path, "dataset", dataset_meta(config));

    // Records are built in parallel chunks but written in scene order.
    const int workers = worker_count();
    const long chunk = std::max<long>(1, 4 * workers);
    std::vector<std::string> encoded;
    for (long start = 0; start < count; start += chunk) {
        long n = std::min<long>(chunk, count - start);
        encoded.assign(std::size_t(n), {});
        parallel_for(n, workers, [&](long i) {
            encoded[std::size_t(i)] = io::encode_dataset_record(
                build_dataset_record(config, codebook, int(start + i), keep_paths));
        });
        for (const std::string& e : encoded) w.write_record(e);
    }
    w.close();
    echo_config(config, out_path);
}

std::vector<LabeledSample> load_labeled_dataset(const std::string& dataset_path,
                                                const GeometryRanges& ranges,
                                                std::vector<SceneRecord>* scenes) {
    io::Reader r(dataset_path);
    if (r.kind() != "dataset")
        throw Error(Error::Kind::io_corrupt_header, "not a dataset file: " + dataset_path);
    std::vector<LabeledSample> out;
    std::string payload;
    while (r.next_record(&payload)) {
        io::DatasetRecord rec = io::decode_dataset_record(payload);
        out.push_back(make_labeled_sample(rec.features, rec.scene, ranges));
        if (scenes) scenes->push_back(rec.scene);
    }
    return out;
}

TrainOutcome stage_train(const RunConfig& config, const std::string& dataset_path,
                         const std::string& weights_path, const std::string& curve_path) {
    GeometryRanges ranges = config.geometry_ranges();
    std::vector<LabeledSample> data = load_labeled_dataset(dataset_path, ranges);
    std::vector<int> train_idx = config.train_indices(int(data.size()));
    std::vector<int> val_idx = config.test_indices(int(data.size()));

    TrainOutcome outcome;
    outcome.stats = compute_feature_stats(data, train_idx);
    DetrModel model(config.model);
    outcome.history =
        train_model(model, data, train_idx, val_idx, outcome.stats, config.loss, ranges,
                    derive_seed(config.master_seed, {0x6261746368ULL}));

    io::save_weights(weights_path, model, outcome.stats, ranges, config.scene.materials);
    echo_config(config, weights_path);

    std::ofstream curve(curve_path, std::ios::binary);
    if (!curve) throw Error(Error::Kind::io, "cannot write " + curve_path);
    curve << "epoch,train_loss,val_loss\n";
    char buf[96];
    for (std::size_t e = 0; e < outcome.history.train_loss.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e, outcome.history.train_loss[e],
                      outcome.history.val_loss[e]);
        curve << buf;
    }
    return outcome;
}

EvalOutcome stage_eval(const RunConfig& config, const std::string& dataset_path,
                       const std::string& weights_path, const std::string& out_prefix,
                       double tau, const std::string& split) {
    io::SavedModel saved = io::load_weights(weights_path);
    std::vector<SceneRecord> scenes;
    std::vector<LabeledSample> data = load_labeled_dataset(dataset_path, saved.ranges, &scenes);

    std::vector<int> indices;
    if (split == "all") {
        for (int i = 0; i < int(data.size()); ++i) indices.push_back(i);
    } else if (split == "train") {
        indices = config.train_indices(int(data.size()));
    } else if (split == "test") {
        indices = config.test_indices(int(data.size()));
    } else {
        throw config_error("unknown split: " + split);
    }

    EvalOutcome outcome;
    for (int idx : indices) outcome.truths.push_back(scenes[std::size_t(idx)]);

    const ModelConfig& mc = saved.config;
    outcome.detections.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        nn::Mat x = standardize(data[std::size_t(indices[i])].features, saved.stats);
        DetrModel::Output out = saved.model->forward(x, 1);
        outcome.detections[i] = predict_and_filter(out, 0, mc, saved.ranges, tau);
    }

    outcome.report = evaluate(outcome.detections, outcome.truths,
                              int(saved.materials.size()), config.loss, saved.ranges);
    if (!out_prefix.empty()) {
        write_report_text(outcome.report, saved.materials, out_prefix + "_report.txt");
        write_matched_csv(outcome.report, out_prefix + "_matched.csv");
        write_confusion_csv(outcome.report, saved.materials, out_prefix + "_confusion.csv");
        echo_config(config, out_prefix + "_report.txt");
    }
    return outcome;
}

}  // namespace rfrecon
