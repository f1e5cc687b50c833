#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viewopt/dataset.hpp"
#include "viewopt/kv.hpp"
#include "viewopt/learn/a2c.hpp"
#include "viewopt/learn/imitate.hpp"
#include "viewopt/trajectory.hpp"

namespace viewopt {

// invalid configuration; maps to exit status 2 in the CLI
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algo { A2cPoint, A2cCnn, IlPoint, IlCnn, Random, Oracle };
const char* to_string(Algo a);
Algo algo_from_string(const std::string& s);
bool algo_uses_checkpoint(Algo a);

struct CurveRow {
    long env_steps = 0;
    double mean_return = 0.0;
    double success_rate = 0.0;
    double mean_psi_at_grasp = 0.0;
};

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

struct HarnessConfig {
    RewardParams reward;
    A2CConfig a2c;
    ILConfig il;
    int n_points = 256;
    int cnn_downsample = 4;
    long il_trajectories = 1000;
    std::string il_expert_checkpoint;  // empty: lattice-BFS oracle expert

    void validate() const {
        reward.validate();
        a2c.validate();
        il.validate();
        if (n_points < 1) throw ConfigError("config: n_points must be positive");
        if (cnn_downsample < 1) throw ConfigError("config: cnn_downsample must be positive");
        if (il_trajectories < 0) throw ConfigError("config: il_trajectories must be non-negative");
    }

    void to_kv(KvWriter& w) const;
    void apply_kv(const KvMap& kv);  // overrides fields present in the map
};

struct TrainResult {
    std::vector<CurveRow> curve;
    std::filesystem::path run_dir;
    std::filesystem::path checkpoint;  // empty for random/oracle
    double final_val_success = 0.0;
    double il_holdout_accuracy = 0.0;  // IL algorithms only
};

// Trains one (algorithm, seed) run into run_dir: config.txt snapshot,
// curve.csv sampled every eval interval, checkpoint.bin for learned
// policies. Byte-identical across reruns with the same inputs.
TrainResult run_training(Dataset& dataset, Algo algo, std::uint64_t seed, const HarnessConfig& config,
                         const std::filesystem::path& run_dir, std::uint64_t dataset_fingerprint);

struct EvalOptions {
    Algo algo = Algo::Random;
    std::filesystem::path checkpoint;
    Split split = Split::Test;
    int episodes = 400;
    MaskNoise noise;
    std::uint64_t seed = 0;
    std::filesystem::path dump_traj_dir;  // per-episode trajectory CSVs when set
};

struct SceneOutcomes {
    int scene_index = 0;
    int episodes = 0;
    int successes = 0;
};

struct EvalReport {
    int episodes = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_length = 0.0;
    double mean_final_psi = 0.0;
    double mean_return = 0.0;
    int grasps = 0;
    double mean_psi_at_grasp = 0.0;
    std::vector<SceneOutcomes> per_scene;
};

// Greedy (argmax) evaluation over the split's scenes.
EvalReport run_eval(Dataset& dataset, const EvalOptions& options, const HarnessConfig& config);

void write_eval_report_csv(const std::filesystem::path& path, const EvalReport& report);
std::string eval_summary(const EvalReport& report);

struct ReplayMismatchError : std::runtime_error {
    ReplayMismatchError(int step_, const std::string& what) : std::runtime_error(what), step(step_) {}
    int step;
};

// Re-executes the trajectory's actions and verifies every stored viewpoint,
// psi, reward and done flag; throws ReplayMismatchError at the first
// divergent step. Returns the number of verified steps.
int replay_trajectory(Dataset& dataset, const Trajectory& trajectory, const HarnessConfig& config);

// Expert dataset collection for imitation learning: only successful episodes
// are kept; throws InsufficientSuccessError if the expert cannot produce the
// requested number of successes.
ILDataset collect_il_dataset(Dataset& dataset, const std::vector<int>& scene_indices, long trajectories,
                             const HarnessConfig& config, std::uint64_t seed);

}  // namespace viewopt
