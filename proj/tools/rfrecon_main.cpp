// rfrecon CLI: reproducible pipeline stages over the shared run configuration.
// Every subcommand prints one machine-parseable summary line on success and
// exits nonzero with a categorized error otherwise.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rfrecon/model.hpp"
#include "rfrecon/oracle.hpp"
#include "rfrecon/pipeline.hpp"
#include "rfrecon/rng.hpp"

namespace {

using namespace rfrecon;

int exit_code_for(const Error& e) {
    switch (e.kind) {
        case Error::Kind::config: return 2;
        case Error::Kind::invalid_input: return 3;
        case Error::Kind::incomplete_input: return 3;
        case Error::Kind::infeasible_placement: return 4;
        case Error::Kind::divergence: return 5;
        case Error::Kind::io_corrupt_header: return 6;
        case Error::Kind::io_truncated: return 7;
        case Error::Kind::io_version_mismatch: return 8;
        case Error::Kind::io: return 9;
    }
    return 1;
}

const char* kind_name(Error::Kind k) {
    switch (k) {
        case Error::Kind::config: return "config";
        case Error::Kind::invalid_input: return "invalid-input";
        case Error::Kind::incomplete_input: return "incomplete-input";
        case Error::Kind::infeasible_placement: return "placement-infeasible";
        case Error::Kind::divergence: return "divergence";
        case Error::Kind::io_corrupt_header: return "io-corrupt-header";
        case Error::Kind::io_truncated: return "io-truncated";
        case Error::Kind::io_version_mismatch: return "io-version-mismatch";
        case Error::Kind::io: return "io";
    }
    return "error";
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

RunConfig load_config_or_defaults(const std::string& path, std::uint64_t seed_override,
                                  bool has_seed) {
    RunConfig c = path.empty() ? run_config_defaults() : load_run_config(path);
    if (has_seed) {
        c.master_seed = seed_override;
        c.resolve();
    }
    return c;
}

// Tiny deterministic gradient-check scenario shared with the test suite.
double run_grad_check() {
    ModelConfig mc;
    mc.encoder_layers = 1;
    mc.decoder_layers = 1;
    mc.heads = 2;
    mc.hidden_dim = 8;
    mc.ff_dim = 16;
    mc.n_queries = 4;
    mc.n_classes = 4;
    mc.grid_x = 4;
    mc.grid_z = 4;
    mc.in_channels = 10;
    mc.seed = 7;
    DetrModel model(mc);

    Rng rng(derive_seed(7, {0x67726164ULL}));
    nn::Mat x(mc.tokens(), mc.in_channels);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.gaussian();

    std::vector<SetTarget> targets(2);
    targets[0].geom_norm = {0.3, 0.4, 0.5, 0.6};
    targets[0].class_slot = 0;
    targets[1].geom_norm = {0.7, 0.2, 0.4, 0.3};
    targets[1].class_slot = 2;

    LossWeights lw;
    GeometryRanges ranges;
    LossHook hook = [&](const DetrModel::Output& out, nn::Mat* dg, nn::Mat* dp) {
        std::vector<SetPrediction> preds(std::size_t(mc.n_queries));
        for (int i = 0; i < mc.n_queries; ++i) {
            for (int g = 0; g < 4; ++g) preds[std::size_t(i)].geom_norm[std::size_t(g)] =
                out.geometry(i, g);
            preds[std::size_t(i)].class_probs.resize(std::size_t(mc.n_classes));
            for (int c = 0; c < mc.n_classes; ++c)
                preds[std::size_t(i)].class_probs[std::size_t(c)] = out.probs(i, c);
        }
        MatchResult match = match_sets(preds, targets, lw, ranges);
        SetLossGrad grad;
        LossBreakdown lb = set_loss(preds, targets, match, lw, ranges, &grad);
        dg->setZero(out.geometry.rows(), out.geometry.cols());
        dp->setZero(out.probs.rows(), out.probs.cols());
        for (int i = 0; i < mc.n_queries; ++i) {
            for (int g = 0; g < 4; ++g) (*dg)(i, g) = grad.d_geom[std::size_t(i)][std::size_t(g)];
            for (int c = 0; c < mc.n_classes; ++c)
                (*dp)(i, c) = grad.d_probs[std::size_t(i)][std::size_t(c)];
        }
        return lb.total;
    };
    return grad_check(model, x, 1, hook);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RF sphere-reconstruction workbench"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool has_seed = false;
    app.add_option("--config", config_path, "run configuration JSON")->envname("RFRECON_CONFIG");
    app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
        has_seed = true;
    });

    // gen-scenes
    auto* gen = app.add_subcommand("gen-scenes", "generate ground-truth scene records");
    int gen_count = -1;
    std::string gen_out = "scenes.rfr";
    gen->add_option("--count", gen_count, "number of scenes (default: scene.count)");
    gen->add_option("--out", gen_out, "output file");

    // simulate
    auto* sim = app.add_subcommand("simulate", "trace multipath for existing scenes");
    std::string sim_scenes = "scenes.rfr", sim_out = "paths.rfr";
    sim->add_option("--scenes", sim_scenes, "scenes file");
    sim->add_option("--out", sim_out, "output paths file");

    // extract-features
    auto* feat = app.add_subcommand("extract-features", "paths file -> dataset file");
    std::string feat_paths = "paths.rfr", feat_out = "dataset.rfr";
    feat->add_option("--paths", feat_paths, "paths file");
    feat->add_option("--out", feat_out, "output dataset file");

    // build-dataset
    auto* build = app.add_subcommand("build-dataset", "scenes + tracing + features in one pass");
    int build_count = -1;
    std::string build_out = "dataset.rfr";
    bool build_keep_paths = false;
    build->add_option("--count", build_count, "number of scenes (default: scene.count)");
    build->add_option("--out", build_out, "output dataset file");
    build->add_flag("--keep-paths", build_keep_paths, "embed raw traced paths (debug)");

    // train
    auto* train = app.add_subcommand("train", "train the set-prediction model");
    std::string train_ds = "dataset.rfr", train_weights = "model.rfw",
                train_curve = "loss_curve.csv";
    int train_epochs = -1;
    train->add_option("--dataset", train_ds, "dataset file");
    train->add_option("--weights", train_weights, "output weights file");
    train->add_option("--curve", train_curve, "output loss curve CSV");
    train->add_option("--epochs", train_epochs, "override epochs");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate detections against ground truth");
    std::string ev_ds = "dataset.rfr", ev_weights = "model.rfw", ev_prefix = "eval",
                ev_split = "test";
    double ev_tau = -1.0;
    ev->add_option("--dataset", ev_ds, "dataset file");
    ev->add_option("--weights", ev_weights, "weights file");
    ev->add_option("--out-prefix", ev_prefix, "output prefix for report/CSV files");
    ev->add_option("--tau", ev_tau, "confidence threshold (default: config eval.tau)");
    ev->add_option("--split", ev_split, "test|train|all");

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "export detections as a PLY sphere cloud");
    std::string rec_ds = "dataset.rfr", rec_weights = "model.rfw", rec_out = "recon.ply";
    int rec_scene = 0;
    double rec_tau = -1.0;
    rec->add_option("--dataset", rec_ds, "dataset file");
    rec->add_option("--weights", rec_weights, "weights file");
    rec->add_option("--scene", rec_scene, "scene index within the dataset");
    rec->add_option("--out", rec_out, "output PLY file");
    rec->add_option("--tau", rec_tau, "confidence threshold (default: config eval.tau)");

    // grad-check
    auto* gc = app.add_subcommand("grad-check", "finite-difference check on a tiny model");

    // oracle-check
    auto* oc = app.add_subcommand("oracle-check",
                                  "closed-form lens volume vs Monte Carlo box sampling");
    int oc_pairs = 100;
    long oc_samples = 1000000;
    std::uint64_t oc_seed = 1234;
    oc->add_option("--pairs", oc_pairs, "random sphere pairs");
    oc->add_option("--samples", oc_samples, "Monte Carlo samples per pair");
    oc->add_option("--seed", oc_seed, "oracle RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        Timer timer;
        RunConfig config = load_config_or_defaults(config_path, seed, has_seed);

        if (gen->parsed()) {
            int count = gen_count > 0 ? gen_count : config.scene_count;
            stage_gen_scenes(config, count, gen_out);
            std::printf("RFRECON gen-scenes ok count=%d out=%s elapsed_s=%.3f\n", count,
                        gen_out.c_str(), timer.seconds());
        } else if (sim->parsed()) {
            stage_simulate(config, sim_scenes, sim_out);
            std::printf("RFRECON simulate ok scenes=%s out=%s elapsed_s=%.3f\n",
                        sim_scenes.c_str(), sim_out.c_str(), timer.seconds());
        } else if (feat->parsed()) {
            stage_extract_features(config, feat_paths, feat_out);
            std::printf("RFRECON extract-features ok paths=%s out=%s elapsed_s=%.3f\n",
                        feat_paths.c_str(), feat_out.c_str(), timer.seconds());
        } else if (build->parsed()) {
            int count = build_count > 0 ? build_count : config.scene_count;
            stage_build_dataset(config, count, build_out, build_keep_paths);
            std::printf("RFRECON build-dataset ok count=%d out=%s elapsed_s=%.3f\n", count,
                        build_out.c_str(), timer.seconds());
        } else if (train->parsed()) {
            if (train_epochs > 0) {
                config.model.epochs = train_epochs;
                config.resolve();
            }
            TrainOutcome out = stage_train(config, train_ds, train_weights, train_curve);
            std::printf(
                "RFRECON train ok epochs=%zu final_train_loss=%.6f final_val_loss=%.6f "
                "weights=%s elapsed_s=%.3f\n",
                out.history.train_loss.size(),
                out.history.train_loss.empty() ? 0.0 : out.history.train_loss.back(),
                out.history.val_loss.empty() ? 0.0 : out.history.val_loss.back(),
                train_weights.c_str(), timer.seconds());
        } else if (ev->parsed()) {
            double tau = ev_tau >= 0.0 ? ev_tau : config.tau;
            EvalOutcome out = stage_eval(config, ev_ds, ev_weights, ev_prefix, tau, ev_split);
            std::printf(
                "RFRECON eval ok split=%s tau=%.4f matched=%ld missed=%ld spurious=%ld "
                "accuracy=%.4f mae_x=%.4f mae_y=%.4f mae_z=%.4f mae_r=%.4f elapsed_s=%.3f\n",
                ev_split.c_str(), tau, out.report.matched_total, out.report.missed_total,
                out.report.spurious_total, out.report.overall_accuracy,
                out.report.error_stats[0].mean, out.report.error_stats[1].mean,
                out.report.error_stats[2].mean, out.report.error_stats[3].mean,
                timer.seconds());
        } else if (rec->parsed()) {
            double tau = rec_tau >= 0.0 ? rec_tau : config.tau;
            io::SavedModel saved = io::load_weights(rec_weights);
            std::vector<SceneRecord> scenes;
            auto data = load_labeled_dataset(rec_ds, saved.ranges, &scenes);
            if (rec_scene < 0 || rec_scene >= int(data.size()))
                throw invalid_input("scene index out of range");
            nn::Mat x = standardize(data[std::size_t(rec_scene)].features, saved.stats);
            DetrModel::Output out = saved.model->forward(x, 1);
            DetectionSet dets = predict_and_filter(out, 0, saved.config, saved.ranges, tau);
            export_reconstruction(dets, rec_out);
            std::printf("RFRECON reconstruct ok scene=%d spheres=%zu out=%s elapsed_s=%.3f\n",
                        rec_scene, dets.size(), rec_out.c_str(), timer.seconds());
        } else if (gc->parsed()) {
            double worst = run_grad_check();
            std::printf("RFRECON grad-check ok max_rel_error=%.3e elapsed_s=%.3f\n", worst,
                        timer.seconds());
            if (worst >= 1e-3) return 10;
        } else if (oc->parsed()) {
            Rng rng(oc_seed);
            double worst_sigmas = 0.0;
            double worst_abs = 0.0;
            for (int i = 0; i < oc_pairs; ++i) {
                Sphere a{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                         rng.uniform(0.2, 1.2)};
                double d = rng.uniform(0.0, (a.radius + 1.2) * 1.2);
                Vec3 dir = rng.unit_sphere();
                Sphere b{a.center + d * dir, rng.uniform(0.2, 1.2)};
                double closed = intersection_volume(a, b);
                auto mc = oracle::mc_intersection_volume(
                    a, b, oc_samples, derive_seed(oc_seed, {std::uint64_t(i)}));
                double dev = std::abs(closed - mc.volume);
                worst_abs = std::max(worst_abs, dev);
                if (mc.sigma > 0.0) worst_sigmas = std::max(worst_sigmas, dev / mc.sigma);
            }
            std::printf(
                "RFRECON oracle-check ok pairs=%d samples=%ld max_abs_dev=%.3e "
                "max_dev_sigmas=%.3f elapsed_s=%.3f\n",
                oc_pairs, oc_samples, worst_abs, worst_sigmas, timer.seconds());
        }
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "RFRECON error kind=%s msg=\"%s\"\n", kind_name(e.kind), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "RFRECON error kind=unexpected msg=\"%s\"\n", e.what());
        return 1;
    }
}
