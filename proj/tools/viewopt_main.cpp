// viewopt: generate clutter datasets, train viewpoint-optimization policies,
// evaluate them, and verify recorded trajectories.
//
// exit status: 0 ok, 1 runtime error, 2 configuration error

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "viewopt/harness.hpp"
#include "viewopt/learn/checkpoint.hpp"

namespace {

using namespace viewopt;
namespace fs = std::filesystem;

struct CommonArgs {
    std::string dataset;
    std::string config_file;
    HarnessConfig harness;
};

HarnessConfig load_harness_config(const std::string& config_file) {
    HarnessConfig hc;
    if (!config_file.empty()) {
        if (!fs::exists(config_file)) throw ConfigError("config file not found: " + config_file);
        hc.apply_kv(KvMap::load_file(config_file));
    }
    return hc;
}

Dataset open_dataset(const std::string& dir) {
    if (dir.empty()) throw ConfigError("--dataset is required");
    return import_dataset(dir);
}

int cmd_gen(const std::string& out, int scenes, std::uint64_t seed, double radius, int width, int height, double focal,
            const std::string& config_file) {
    if (out.empty()) throw ConfigError("gen: --out is required");
    if (scenes < 1) throw ConfigError("gen: --scenes must be positive");

    CameraIntrinsics intr = CameraIntrinsics::make_default();
    if (width > 0) intr = CameraIntrinsics{focal, focal, width / 2.0, height / 2.0, width, height};
    GeneratorConfig gen_cfg;
    if (!config_file.empty()) {
        KvMap kv = KvMap::load_file(config_file);
        if (kv.has("gen.min_objects")) gen_cfg.min_objects = static_cast<int>(kv.get_long("gen.min_objects"));
        if (kv.has("gen.max_objects")) gen_cfg.max_objects = static_cast<int>(kv.get_long("gen.max_objects"));
        if (kv.has("gen.table_extent")) gen_cfg.table_extent = kv.get_double("gen.table_extent");
        if (kv.has("gen.max_layout_attempts"))
            gen_cfg.max_layout_attempts = static_cast<int>(kv.get_long("gen.max_layout_attempts"));
    }
    gen_cfg.validate();

    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < scenes; ++k) seeds.push_back(seed + static_cast<std::uint64_t>(k));
    Dataset ds = build_dataset(seeds, gen_cfg, radius, intr);
    export_dataset(ds, out);

    int train = static_cast<int>(ds.split_indices(Split::Train).size());
    int val = static_cast<int>(ds.split_indices(Split::Val).size());
    int test = static_cast<int>(ds.split_indices(Split::Test).size());
    std::printf("dataset %s: %d scenes (train/val/test = %d/%d/%d), lattice radius %s, raster %dx%d\n", out.c_str(),
                ds.scene_count(), train, val, test, format_double(radius).c_str(), intr.width, intr.height);
    std::printf("fingerprint %016llx\n", static_cast<unsigned long long>(dataset_fingerprint(out)));
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& algo_str, const std::vector<std::uint64_t>& seeds,
              const std::string& out) {
    if (out.empty()) throw ConfigError("train: --out is required");
    Algo algo = algo_from_string(algo_str);
    Dataset ds = open_dataset(common.dataset);
    std::uint64_t fp = dataset_fingerprint(common.dataset);

    for (std::uint64_t seed : seeds) {
        fs::path run_dir = fs::path(out) / (std::string(to_string(algo)) + "_seed" + std::to_string(seed));
        TrainResult result = run_training(ds, algo, seed, common.harness, run_dir, fp);
        std::printf("%s seed %llu: final val success %s  (%s)\n", to_string(algo),
                    static_cast<unsigned long long>(seed), format_double(result.final_val_success).c_str(),
                    run_dir.string().c_str());
    }
    return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& algo_str, const std::string& checkpoint,
             const std::string& split_str, int episodes, std::uint64_t seed, double noise_flip, double noise_erode,
             const std::string& out, const std::string& dump_traj) {
    EvalOptions opt;
    opt.algo = algo_from_string(algo_str);
    opt.checkpoint = checkpoint;
    if (algo_uses_checkpoint(opt.algo) && checkpoint.empty())
        throw ConfigError("eval: --checkpoint is required for " + algo_str);
    if (split_str == "train")
        opt.split = Split::Train;
    else if (split_str == "val")
        opt.split = Split::Val;
    else if (split_str == "test")
        opt.split = Split::Test;
    else
        throw ConfigError("eval: unknown split: " + split_str);
    opt.episodes = episodes;
    opt.seed = seed;
    opt.noise = MaskNoise{noise_flip, noise_erode};
    opt.dump_traj_dir = dump_traj;

    Dataset ds = open_dataset(common.dataset);
    EvalReport report = run_eval(ds, opt, common.harness);
    std::cout << eval_summary(report);
    if (!out.empty()) {
        write_eval_report_csv(out, report);
        std::printf("report written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_replay(const CommonArgs& common, const std::string& file) {
    if (file.empty()) throw ConfigError("replay: --file is required");
    Dataset ds = open_dataset(common.dataset);
    Trajectory traj = read_trajectory_csv(file);
    int steps = replay_trajectory(ds, traj, common.harness);
    std::printf("replayed %d steps of scene %d: stored psi/rewards match recomputation\n", steps, traj.scene_index);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"active viewpoint optimization: dataset generation, training, evaluation, replay"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string algo = "a2c_point";
    std::string out, checkpoint, split = "test", traj_file, dump_traj;
    int scenes = 20, episodes = 400;
    std::uint64_t gen_seed = 1, eval_seed = 0;
    std::vector<std::uint64_t> seeds;
    double radius = 0.5, noise_flip = 0.0, noise_erode = 0.0, delta = -1.0;
    int width = 0, height = 0;
    double focal = 120.0;
    long steps_override = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_dataset) {
        if (needs_dataset) cmd->add_option("--dataset", common.dataset, "dataset directory");
        cmd->add_option("--config", common.config_file, "key/value config file (manifest format)");
        cmd->add_option("--delta", delta, "visibility threshold (default 0.9)");
    };

    auto* gen = app.add_subcommand("gen", "generate a synthetic clutter dataset");
    gen->add_option("--out", out, "output directory")->required();
    gen->add_option("--scenes", scenes, "number of scenes (seeds seed..seed+n-1)");
    gen->add_option("--seed", gen_seed, "base scene seed");
    gen->add_option("--radius", radius, "lattice radius in meters");
    gen->add_option("--width", width, "raster width (default 160)");
    gen->add_option("--height", height, "raster height (default 120)");
    gen->add_option("--focal", focal, "focal length in pixels");
    add_common(gen, false);

    auto* train = app.add_subcommand("train", "train a policy; writes curve.csv and checkpoint.bin per seed");
    train->add_option("--algo", algo, "a2c_point|a2c_cnn|il_point|il_cnn|random|oracle");
    train->add_option("--seed", seeds, "training seed (repeatable)");
    train->add_option("--seeds", seeds, "training seeds");
    train->add_option("--out", out, "output directory for run subdirectories")->required();
    train->add_option("--steps", steps_override, "env-step budget override");
    add_common(train, true);

    auto* eval = app.add_subcommand("eval", "evaluate a policy with greedy actions");
    eval->add_option("--algo", algo, "a2c_point|a2c_cnn|il_point|il_cnn|random|oracle");
    eval->add_option("--checkpoint", checkpoint, "checkpoint file for learned policies");
    eval->add_option("--split", split, "train|val|test");
    eval->add_option("--episodes", episodes, "episode count");
    eval->add_option("--seed", eval_seed, "evaluation seed");
    eval->add_option("--noise-flip", noise_flip, "per-point mask flip probability");
    eval->add_option("--noise-erode", noise_erode, "mask erosion radius in pixels");
    eval->add_option("--out", out, "write the report CSV here");
    eval->add_option("--dump-traj", dump_traj, "write per-episode trajectory CSVs into this directory");
    add_common(eval, true);

    auto* replay = app.add_subcommand("replay", "re-execute a trajectory file and verify stored psi/rewards");
    replay->add_option("--file", traj_file, "trajectory CSV")->required();
    add_common(replay, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        common.harness = load_harness_config(common.config_file);
        if (delta > 0.0) common.harness.reward.delta = delta;
        if (steps_override > 0) {
            common.harness.a2c.total_env_steps = steps_override;
            common.harness.il.budget_presentations = steps_override;
        }
        common.harness.validate();

        if (gen->parsed()) return cmd_gen(out, scenes, gen_seed, radius, width, height, focal, common.config_file);
        if (train->parsed()) {
            if (seeds.empty()) seeds.push_back(0);
            return cmd_train(common, algo, seeds, out);
        }
        if (eval->parsed())
            return cmd_eval(common, algo, checkpoint, split, episodes, eval_seed, noise_flip, noise_erode, out,
                            dump_traj);
        if (replay->parsed()) return cmd_replay(common, traj_file);
        throw ConfigError("no subcommand");
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
