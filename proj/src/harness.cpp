#include "viewopt/harness.hpp"

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "viewopt/learn/checkpoint.hpp"
#include "viewopt/learn/cnn_policy.hpp"
#include "viewopt/learn/point_policy.hpp"
#include "viewopt/oracle.hpp"

namespace viewopt {

namespace fs = std::filesystem;

const char* to_string(Algo a) {
    switch (a) {
        case Algo::A2cPoint: return "a2c_point";
        case Algo::A2cCnn: return "a2c_cnn";
        case Algo::IlPoint: return "il_point";
        case Algo::IlCnn: return "il_cnn";
        case Algo::Random: return "random";
        case Algo::Oracle: return "oracle";
    }
    return "?";
}

Algo algo_from_string(const std::string& s) {
    for (Algo a : {Algo::A2cPoint, Algo::A2cCnn, Algo::IlPoint, Algo::IlCnn, Algo::Random, Algo::Oracle})
        if (s == to_string(a)) return a;
    throw ConfigError("unknown algorithm: " + s);
}

bool algo_uses_checkpoint(Algo a) { return a != Algo::Random && a != Algo::Oracle; }

void write_curve_csv(const fs::path& path, const std::vector<CurveRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("curve: cannot open for writing: " + path.string());
    f << "env_steps,mean_return,success_rate,mean_psi_at_grasp\n";
    for (const auto& r : rows)
        f << r.env_steps << ',' << format_double(r.mean_return) << ',' << format_double(r.success_rate) << ','
          << format_double(r.mean_psi_at_grasp) << "\n";
}

std::vector<CurveRow> read_curve_csv(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("curve: cannot open: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != "env_steps,mean_return,success_rate,mean_psi_at_grasp")
        throw std::runtime_error("curve: unexpected header in " + path.string());
    std::vector<CurveRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        CurveRow r;
        char c1, c2, c3;
        std::istringstream ss(line);
        if (!(ss >> r.env_steps >> c1 >> r.mean_return >> c2 >> r.success_rate >> c3 >> r.mean_psi_at_grasp))
            throw std::runtime_error("curve: malformed row in " + path.string());
        rows.push_back(r);
    }
    return rows;
}

void HarnessConfig::to_kv(KvWriter& w) const {
    w.add("reward.delta", reward.delta);
    w.add("reward.gamma", reward.gamma);
    w.add("reward.max_steps", reward.max_steps);
    w.add("a2c.gamma", a2c.gamma);
    w.add("a2c.rollout_len", a2c.rollout_len);
    w.add("a2c.lr", a2c.lr);
    w.add("a2c.value_loss_weight", a2c.value_loss_weight);
    w.add("a2c.entropy_bonus", a2c.entropy_bonus);
    w.add("a2c.n_envs", a2c.n_envs);
    w.add("a2c.grad_clip", a2c.grad_clip);
    w.add("a2c.total_env_steps", a2c.total_env_steps);
    w.add("a2c.eval_interval", a2c.eval_interval);
    w.add("a2c.eval_episodes", a2c.eval_episodes);
    w.add("il.lr", il.lr);
    w.add("il.momentum", il.momentum);
    w.add("il.grad_clip", il.grad_clip);
    w.add("il.batch_size", il.batch_size);
    w.add("il.budget_presentations", il.budget_presentations);
    w.add("il.eval_interval", il.eval_interval);
    w.add("il.eval_episodes", il.eval_episodes);
    w.add("il.holdout_fraction", il.holdout_fraction);
    w.add("n_points", n_points);
    w.add("cnn_downsample", cnn_downsample);
    w.add("il_trajectories", il_trajectories);
    if (!il_expert_checkpoint.empty()) w.add("il_expert_checkpoint", il_expert_checkpoint);
}

void HarnessConfig::apply_kv(const KvMap& kv) {
    auto d = [&](const char* key, double& field) {
        if (kv.has(key)) field = kv.get_double(key);
    };
    auto li = [&](const char* key, long& field) {
        if (kv.has(key)) field = kv.get_long(key);
    };
    auto ii = [&](const char* key, int& field) {
        if (kv.has(key)) field = static_cast<int>(kv.get_long(key));
    };
    d("reward.delta", reward.delta);
    d("reward.gamma", reward.gamma);
    ii("reward.max_steps", reward.max_steps);
    d("a2c.gamma", a2c.gamma);
    ii("a2c.rollout_len", a2c.rollout_len);
    d("a2c.lr", a2c.lr);
    d("a2c.value_loss_weight", a2c.value_loss_weight);
    d("a2c.entropy_bonus", a2c.entropy_bonus);
    ii("a2c.n_envs", a2c.n_envs);
    d("a2c.grad_clip", a2c.grad_clip);
    li("a2c.total_env_steps", a2c.total_env_steps);
    li("a2c.eval_interval", a2c.eval_interval);
    ii("a2c.eval_episodes", a2c.eval_episodes);
    d("il.lr", il.lr);
    d("il.momentum", il.momentum);
    d("il.grad_clip", il.grad_clip);
    ii("il.batch_size", il.batch_size);
    li("il.budget_presentations", il.budget_presentations);
    li("il.eval_interval", il.eval_interval);
    ii("il.eval_episodes", il.eval_episodes);
    d("il.holdout_fraction", il.holdout_fraction);
    ii("n_points", n_points);
    ii("cnn_downsample", cnn_downsample);
    li("il_trajectories", il_trajectories);
    if (kv.has("il_expert_checkpoint")) il_expert_checkpoint = kv.get("il_expert_checkpoint");
}

namespace {

int argmax_row(const nn::Mat<float>& logits, long row) {
    int best = 0;
    for (int k = 1; k < kActionCount; ++k)
        if (logits(row, k) > logits(row, best)) best = k;
    return best;
}

int sample_softmax(const nn::Mat<float>& logits, long row, Rng& rng) {
    double m = logits(row, 0);
    for (int k = 1; k < kActionCount; ++k) m = std::max(m, static_cast<double>(logits(row, k)));
    double z = 0.0;
    double p[kActionCount];
    for (int k = 0; k < kActionCount; ++k) {
        p[k] = std::exp(static_cast<double>(logits(row, k)) - m);
        z += p[k];
    }
    double u = rng.next_double() * z;
    double acc = 0.0;
    for (int k = 0; k < kActionCount; ++k) {
        acc += p[k];
        if (u < acc) return k;
    }
    return kActionCount - 1;
}

// act(env, point_obs, episode, t) -> Action
template <class ActFn>
EvalReport eval_episodes(Dataset& dataset, Split split, int episodes, std::uint64_t seed, const HarnessConfig& config,
                         ActFn&& act, const fs::path& dump_dir = {}) {
    auto scenes = dataset.split_indices(split);
    if (scenes.empty()) throw ConfigError(std::string("evaluation split '") + to_string(split) + "' has no scenes");
    if (!dump_dir.empty()) fs::create_directories(dump_dir);

    EvalReport report;
    report.episodes = episodes;
    std::vector<SceneOutcomes> per_scene;
    per_scene.reserve(scenes.size());
    for (int idx : scenes) per_scene.push_back({idx, 0, 0});

    Environment env(config.reward, config.n_points);
    double sum_length = 0.0, sum_final_psi = 0.0, sum_return = 0.0, sum_grasp_psi = 0.0;
    int grasps = 0;

    for (int ep = 0; ep < episodes; ++ep) {
        std::size_t scene_slot = static_cast<std::size_t>(ep) % scenes.size();
        int scene_index = scenes[scene_slot];
        auto [state, obs] =
            env.reset(dataset.context(scene_index), Rng::fork(seed, static_cast<std::uint64_t>(ep)).next_u64());

        Trajectory traj;
        traj.scene_index = scene_index;
        traj.start = state.vp;

        double ep_return = 0.0;
        double final_psi = env.psi_at(state.vp);
        int t = 0;
        while (!env.state().done) {
            Action a = act(env, obs, ep, t);
            auto res = env.step(a);
            obs = std::move(res.obs);
            ep_return += res.reward;
            final_psi = res.psi;
            if (!dump_dir.empty()) traj.steps.push_back({t, res.state.vp, a, res.psi, res.reward, res.done});
            if (res.done && a == Action::Grasp) {
                ++grasps;
                sum_grasp_psi += res.psi;
            }
            ++t;
        }
        bool success = env.state().outcome == Outcome::GraspSuccess;
        if (success) {
            ++report.successes;
            ++per_scene[scene_slot].successes;
        }
        ++per_scene[scene_slot].episodes;
        sum_length += t;
        sum_final_psi += final_psi;
        sum_return += ep_return;

        if (!dump_dir.empty()) write_trajectory_csv(dump_dir / ("episode_" + std::to_string(ep) + ".csv"), traj);
    }

    report.success_rate = static_cast<double>(report.successes) / episodes;
    report.mean_length = sum_length / episodes;
    report.mean_final_psi = sum_final_psi / episodes;
    report.mean_return = sum_return / episodes;
    report.grasps = grasps;
    report.mean_psi_at_grasp = grasps > 0 ? sum_grasp_psi / grasps : 0.0;
    report.per_scene = std::move(per_scene);
    return report;
}

template <class Policy, class MakeObs>
CurveRow curve_point(Dataset& dataset, Policy& policy, MakeObs&& make_obs, long env_steps, std::uint64_t seed,
                     const HarnessConfig& config, int episodes) {
    auto act = [&](Environment& env, const Observation& obs, int, int) {
        typename Policy::Obs adapted = make_obs(env, obs);
        const typename Policy::Obs* ptr = &adapted;
        auto out = policy.forward(Policy::make_batch({ptr}), nullptr);
        return static_cast<Action>(argmax_row(out.logits, 0));
    };
    EvalReport r = eval_episodes(dataset, Split::Val, episodes, seed, config, act);
    return CurveRow{env_steps, r.mean_return, r.success_rate, r.mean_psi_at_grasp};
}

struct RunFiles {
    fs::path run_dir;
    KvWriter snapshot;
};

RunFiles begin_run(Algo algo, std::uint64_t seed, const HarnessConfig& config, const fs::path& run_dir,
                   std::uint64_t dataset_fingerprint) {
    fs::create_directories(run_dir);
    KvWriter w;
    w.add("algo", to_string(algo));
    w.add("seed", seed);
    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016llx", static_cast<unsigned long long>(dataset_fingerprint));
    w.add("dataset_fingerprint", fp);
    config.to_kv(w);
    return RunFiles{run_dir, std::move(w)};
}

TrainResult finish_run(RunFiles& files, std::vector<CurveRow> curve, const fs::path& checkpoint,
                       double il_holdout_accuracy = 0.0) {
    files.snapshot.write_file(files.run_dir / "config.txt");
    write_curve_csv(files.run_dir / "curve.csv", curve);
    TrainResult result;
    result.final_val_success = curve.empty() ? 0.0 : curve.back().success_rate;
    result.curve = std::move(curve);
    result.run_dir = files.run_dir;
    result.checkpoint = checkpoint;
    result.il_holdout_accuracy = il_holdout_accuracy;
    return result;
}

template <class Policy>
std::vector<NamedTensorView> checkpoint_views(Policy& policy) {
    std::vector<NamedTensorView> views;
    for (auto& t : policy.tensors()) views.push_back({t.name, t.rows, t.cols, t.data});
    return views;
}

template <class Policy, class MakeObs>
TrainResult train_a2c_impl(Dataset& dataset, std::uint64_t seed, const HarnessConfig& config, Policy policy,
                           MakeObs&& make_obs, RunFiles files) {
    const A2CConfig& cfg = config.a2c;
    auto train_idx = dataset.split_indices(Split::Train);
    if (train_idx.empty()) throw ConfigError("training split has no scenes");

    Rng scene_rng = Rng::fork(seed, 11);
    Rng action_rng = Rng::fork(seed, 13);

    std::vector<Environment> envs(static_cast<std::size_t>(cfg.n_envs), Environment(config.reward, config.n_points));
    std::vector<typename Policy::Obs> cur(static_cast<std::size_t>(cfg.n_envs));
    auto reset_env = [&](int e) {
        int scene = train_idx[scene_rng.next_below(static_cast<std::uint32_t>(train_idx.size()))];
        auto [state, obs] = envs[static_cast<std::size_t>(e)].reset(dataset.context(scene), scene_rng.next_u64());
        cur[static_cast<std::size_t>(e)] = make_obs(envs[static_cast<std::size_t>(e)], obs);
    };
    for (int e = 0; e < cfg.n_envs; ++e) reset_env(e);

    Policy grads = policy;
    grads.zero();
    nn::MomentumOptimizer<float> optimizer(cfg.lr, 0.9, cfg.grad_clip);

    std::vector<CurveRow> curve;
    curve.push_back(curve_point(dataset, policy, make_obs, 0, Rng::fork(seed, 17).next_u64(), config,
                                cfg.eval_episodes));

    long steps = 0;
    long next_eval = cfg.eval_interval;
    std::vector<const typename Policy::Obs*> ptrs(static_cast<std::size_t>(cfg.n_envs));
    while (steps < cfg.total_env_steps) {
        Rollout<Policy> ro;
        ro.n_envs = cfg.n_envs;
        ro.len = cfg.rollout_len;
        long m = ro.size();
        ro.obs.reserve(static_cast<std::size_t>(m));
        ro.actions.reserve(static_cast<std::size_t>(m));
        ro.rewards.reserve(static_cast<std::size_t>(m));
        ro.dones.reserve(static_cast<std::size_t>(m));
        ro.behavior_logits.resize(m, kActionCount);
        ro.bootstrap_done.assign(static_cast<std::size_t>(cfg.n_envs), 0);

        for (int t = 0; t < cfg.rollout_len; ++t) {
            for (int e = 0; e < cfg.n_envs; ++e) ptrs[static_cast<std::size_t>(e)] = &cur[static_cast<std::size_t>(e)];
            auto out = policy.forward(Policy::make_batch(ptrs), nullptr);
            for (int e = 0; e < cfg.n_envs; ++e) {
                int a = sample_softmax(out.logits, e, action_rng);
                ro.obs.push_back(cur[static_cast<std::size_t>(e)]);
                ro.actions.push_back(a);
                ro.behavior_logits.row(static_cast<long>(t) * cfg.n_envs + e) = out.logits.row(e);
                auto res = envs[static_cast<std::size_t>(e)].step(static_cast<Action>(a));
                ro.rewards.push_back(res.reward);
                ro.dones.push_back(res.done ? 1 : 0);
                if (res.done)
                    reset_env(e);
                else
                    cur[static_cast<std::size_t>(e)] = make_obs(envs[static_cast<std::size_t>(e)], res.obs);
            }
        }
        for (int e = 0; e < cfg.n_envs; ++e) {
            ptrs[static_cast<std::size_t>(e)] = &cur[static_cast<std::size_t>(e)];
            ro.bootstrap_done[static_cast<std::size_t>(e)] =
                ro.dones[static_cast<std::size_t>(cfg.rollout_len - 1) * static_cast<std::size_t>(cfg.n_envs) +
                         static_cast<std::size_t>(e)];
        }
        auto boot = policy.forward(Policy::make_batch(ptrs), nullptr);
        ro.bootstrap_value = boot.value;

        a2c_update(policy, ro, cfg, optimizer, grads);
        steps += static_cast<long>(cfg.n_envs) * cfg.rollout_len;
        if (steps >= next_eval) {
            curve.push_back(curve_point(dataset, policy, make_obs, steps,
                                        Rng::fork(seed, 17 + static_cast<std::uint64_t>(next_eval)).next_u64(),
                                        config, cfg.eval_episodes));
            next_eval += cfg.eval_interval;
        }
    }
    if (curve.back().env_steps != steps)
        curve.push_back(curve_point(dataset, policy, make_obs, steps,
                                    Rng::fork(seed, 17 + static_cast<std::uint64_t>(steps)).next_u64(), config,
                                    cfg.eval_episodes));

    fs::path ckpt = files.run_dir / "checkpoint.bin";
    auto views = checkpoint_views(policy);
    save_checkpoint(ckpt, Policy::kArchTag, views);
    return finish_run(files, std::move(curve), ckpt);
}

template <class Policy, class ObsOf, class MakeObs>
TrainResult train_il_impl(Dataset& dataset, std::uint64_t seed, const HarnessConfig& config, Policy policy,
                          const ILDataset& data, ObsOf&& obs_of, MakeObs&& make_obs, RunFiles files) {
    const ILConfig& cfg = config.il;
    if (data.samples.empty()) throw ConfigError("imitation dataset is empty");

    // split by trajectory so correlated pairs stay on one side
    Rng split_rng = Rng::fork(seed, 23);
    std::vector<int> traj_order(static_cast<std::size_t>(data.trajectories));
    for (int i = 0; i < data.trajectories; ++i) traj_order[static_cast<std::size_t>(i)] = i;
    for (int i = data.trajectories - 1; i > 0; --i)
        std::swap(traj_order[static_cast<std::size_t>(i)],
                  traj_order[split_rng.next_below(static_cast<std::uint32_t>(i + 1))]);
    int holdout_trajs = static_cast<int>(cfg.holdout_fraction * data.trajectories);

    auto traj_range = [&](int tr) {
        std::size_t begin = static_cast<std::size_t>(data.trajectory_offsets[static_cast<std::size_t>(tr)]);
        std::size_t end = tr + 1 < data.trajectories
                              ? static_cast<std::size_t>(data.trajectory_offsets[static_cast<std::size_t>(tr) + 1])
                              : data.samples.size();
        return std::pair<std::size_t, std::size_t>{begin, end};
    };
    std::vector<std::size_t> train_samples, holdout_samples;
    for (int i = 0; i < data.trajectories; ++i) {
        auto [b, e] = traj_range(traj_order[static_cast<std::size_t>(i)]);
        auto& sink = i < holdout_trajs ? holdout_samples : train_samples;
        for (std::size_t s = b; s < e; ++s) sink.push_back(s);
    }
    if (train_samples.empty()) throw ConfigError("imitation training split is empty");

    Policy grads = policy;
    grads.zero();
    nn::MomentumOptimizer<float> optimizer(cfg.lr, cfg.momentum, cfg.grad_clip);
    Rng shuffle_rng = Rng::fork(seed, 29);

    std::vector<CurveRow> curve;
    curve.push_back(curve_point(dataset, policy, make_obs, 0, Rng::fork(seed, 31).next_u64(), config,
                                cfg.eval_episodes));

    long presentations = 0;
    long next_eval = cfg.eval_interval;
    double last_loss = 0.0;
    std::vector<const typename Policy::Obs*> batch_obs;
    std::vector<int> batch_actions;
    while (presentations < cfg.budget_presentations) {
        std::vector<std::size_t> order = train_samples;
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.next_below(static_cast<std::uint32_t>(i + 1))]);
        for (std::size_t at = 0; at < order.size() && presentations < cfg.budget_presentations;
             at += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t hi = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
            batch_obs.clear();
            batch_actions.clear();
            for (std::size_t i = at; i < hi; ++i) {
                batch_obs.push_back(obs_of(order[i]));
                batch_actions.push_back(static_cast<int>(data.samples[order[i]].action));
            }
            last_loss = il_minibatch_update(policy, batch_obs, batch_actions, cfg, optimizer, grads);
            presentations += static_cast<long>(batch_obs.size());
            if (presentations >= next_eval) {
                curve.push_back(curve_point(dataset, policy, make_obs, presentations,
                                            Rng::fork(seed, 31 + static_cast<std::uint64_t>(next_eval)).next_u64(),
                                            config, cfg.eval_episodes));
                next_eval += cfg.eval_interval;
            }
        }
    }
    if (curve.back().env_steps != presentations)
        curve.push_back(curve_point(dataset, policy, make_obs, presentations,
                                    Rng::fork(seed, 31 + static_cast<std::uint64_t>(presentations)).next_u64(),
                                    config, cfg.eval_episodes));

    batch_obs.clear();
    batch_actions.clear();
    for (std::size_t i : holdout_samples) {
        batch_obs.push_back(obs_of(i));
        batch_actions.push_back(static_cast<int>(data.samples[i].action));
    }
    double holdout_acc = il_accuracy(policy, batch_obs, batch_actions);
    files.snapshot.add("il.final_loss", last_loss);
    files.snapshot.add("il.holdout_accuracy", holdout_acc);

    fs::path ckpt = files.run_dir / "checkpoint.bin";
    auto views = checkpoint_views(policy);
    save_checkpoint(ckpt, Policy::kArchTag, views);
    return finish_run(files, std::move(curve), ckpt, holdout_acc);
}

Observation identity_obs(Environment&, const Observation& obs) { return obs; }

struct ImageObsMaker {
    int downsample;
    ImageObservation operator()(Environment& env, const Observation&) const {
        return make_image_observation(env.context().views->view(env.state().vp), env.context().scene->target_id,
                                      downsample);
    }
};

}  // namespace

ILDataset collect_il_dataset(Dataset& dataset, const std::vector<int>& scene_indices, long trajectories,
                             const HarnessConfig& config, std::uint64_t seed) {
    if (scene_indices.empty()) throw ConfigError("imitation collection: no scenes given");
    ILDataset data;
    if (trajectories == 0) return data;

    std::optional<PointPolicy<float>> expert_net;
    if (!config.il_expert_checkpoint.empty()) {
        expert_net.emplace(0);
        auto views = checkpoint_views(*expert_net);
        load_checkpoint(config.il_expert_checkpoint, PointPolicy<float>::kArchTag, views);
    }

    Environment env(config.reward, config.n_points);
    long attempts = 0;
    const long max_attempts = trajectories * 20 + 100;
    std::vector<ILSample> pending;
    while (data.trajectories < trajectories) {
        if (attempts >= max_attempts)
            throw InsufficientSuccessError("imitation collection: expert produced only " +
                                           std::to_string(data.trajectories) + " successes in " +
                                           std::to_string(attempts) + " episodes");
        int scene_index = scene_indices[static_cast<std::size_t>(attempts) % scene_indices.size()];
        auto [state, obs] = env.reset(dataset.context(scene_index),
                                      Rng::fork(seed, static_cast<std::uint64_t>(attempts) + 1).next_u64());
        ++attempts;
        pending.clear();
        while (!env.state().done) {
            Action a;
            if (expert_net) {
                const Observation* ptr = &obs;
                auto out = expert_net->forward(PointPolicy<float>::make_batch({ptr}), nullptr);
                a = static_cast<Action>(argmax_row(out.logits, 0));
            } else {
                a = oracle_policy(*env.context().table, env.context().scene->target_id, env.state().vp,
                                  config.reward.delta);
            }
            pending.push_back({scene_index, env.state().vp, obs, a});
            auto res = env.step(a);
            obs = std::move(res.obs);
        }
        if (env.state().outcome == Outcome::GraspSuccess) {
            data.trajectory_offsets.push_back(static_cast<int>(data.samples.size()));
            for (auto& s : pending) data.samples.push_back(std::move(s));
            ++data.trajectories;
        }
    }
    return data;
}

TrainResult run_training(Dataset& dataset, Algo algo, std::uint64_t seed, const HarnessConfig& config,
                         const fs::path& run_dir, std::uint64_t dataset_fingerprint) {
    config.validate();
    RunFiles files = begin_run(algo, seed, config, run_dir, dataset_fingerprint);

    switch (algo) {
        case Algo::A2cPoint:
            return train_a2c_impl(dataset, seed, config, PointPolicy<float>(seed), identity_obs, std::move(files));
        case Algo::A2cCnn: {
            const CameraIntrinsics& intr = dataset.intrinsics();
            CnnPolicy<float> policy(intr.height / config.cnn_downsample, intr.width / config.cnn_downsample, seed);
            return train_a2c_impl(dataset, seed, config, std::move(policy), ImageObsMaker{config.cnn_downsample},
                                  std::move(files));
        }
        case Algo::IlPoint: {
            ILDataset data = collect_il_dataset(dataset, dataset.split_indices(Split::Train), config.il_trajectories,
                                                config, Rng::fork(seed, 37).next_u64());
            auto obs_of = [&data](std::size_t i) { return &data.samples[i].obs; };
            return train_il_impl(dataset, seed, config, PointPolicy<float>(seed), data, obs_of, identity_obs,
                                 std::move(files));
        }
        case Algo::IlCnn: {
            ILDataset data = collect_il_dataset(dataset, dataset.split_indices(Split::Train), config.il_trajectories,
                                                config, Rng::fork(seed, 37).next_u64());
            const CameraIntrinsics& intr = dataset.intrinsics();
            CnnPolicy<float> policy(intr.height / config.cnn_downsample, intr.width / config.cnn_downsample, seed);
            std::vector<ImageObservation> images;
            images.reserve(data.samples.size());
            for (const auto& s : data.samples) {
                SceneContext ctx = dataset.context(s.scene_index);
                images.push_back(
                    make_image_observation(ctx.views->view(s.vp), ctx.scene->target_id, config.cnn_downsample));
            }
            auto obs_of = [&images](std::size_t i) { return &images[i]; };
            return train_il_impl(dataset, seed, config, std::move(policy), data, obs_of,
                                 ImageObsMaker{config.cnn_downsample}, std::move(files));
        }
        case Algo::Random:
        case Algo::Oracle: {
            std::vector<CurveRow> curve;
            long interval = config.a2c.eval_interval;
            for (long steps = 0; steps <= config.a2c.total_env_steps; steps += interval) {
                std::uint64_t eval_seed = Rng::fork(seed, 17 + static_cast<std::uint64_t>(steps)).next_u64();
                EvalReport r;
                if (algo == Algo::Random) {
                    std::optional<RandomPolicy> policy;
                    auto act = [&](Environment&, const Observation&, int ep, int t) {
                        if (t == 0) policy.emplace(Rng::fork(eval_seed, static_cast<std::uint64_t>(ep)).next_u64());
                        return policy->act();
                    };
                    r = eval_episodes(dataset, Split::Val, config.a2c.eval_episodes, eval_seed, config, act);
                } else {
                    auto act = [&](Environment& env, const Observation&, int, int) {
                        return oracle_policy(*env.context().table, env.context().scene->target_id, env.state().vp,
                                             config.reward.delta);
                    };
                    r = eval_episodes(dataset, Split::Val, config.a2c.eval_episodes, eval_seed, config, act);
                }
                curve.push_back(CurveRow{steps, r.mean_return, r.success_rate, r.mean_psi_at_grasp});
            }
            return finish_run(files, std::move(curve), {});
        }
    }
    throw ConfigError("unhandled algorithm");
}

EvalReport run_eval(Dataset& dataset, const EvalOptions& options, const HarnessConfig& config) {
    config.validate();
    if (options.episodes < 1) throw ConfigError("eval: episode count must be positive");
    bool noisy = options.noise.flip_prob > 0.0 || options.noise.erosion_radius > 0.0;

    switch (options.algo) {
        case Algo::A2cPoint:
        case Algo::IlPoint: {
            PointPolicy<float> policy(0);
            auto views = checkpoint_views(policy);
            load_checkpoint(options.checkpoint, PointPolicy<float>::kArchTag, views);
            auto act = [&](Environment&, const Observation& obs, int ep, int t) {
                const Observation* ptr = &obs;
                Observation corrupted;
                if (noisy) {
                    corrupted = corrupt_mask(
                        obs, options.noise,
                        Rng::fork(options.seed, (static_cast<std::uint64_t>(ep) << 8) | static_cast<std::uint64_t>(t))
                            .next_u64());
                    ptr = &corrupted;
                }
                auto out = policy.forward(PointPolicy<float>::make_batch({ptr}), nullptr);
                return static_cast<Action>(argmax_row(out.logits, 0));
            };
            return eval_episodes(dataset, options.split, options.episodes, options.seed, config, act,
                                 options.dump_traj_dir);
        }
        case Algo::A2cCnn:
        case Algo::IlCnn: {
            if (noisy) throw ConfigError("eval: mask noise is only supported for point-cloud policies");
            const CameraIntrinsics& intr = dataset.intrinsics();
            CnnPolicy<float> policy(intr.height / config.cnn_downsample, intr.width / config.cnn_downsample, 0);
            auto views = checkpoint_views(policy);
            load_checkpoint(options.checkpoint, CnnPolicy<float>::kArchTag, views);
            ImageObsMaker make_obs{config.cnn_downsample};
            auto act = [&](Environment& env, const Observation& obs, int, int) {
                ImageObservation img = make_obs(env, obs);
                const ImageObservation* ptr = &img;
                auto out = policy.forward(CnnPolicy<float>::make_batch({ptr}), nullptr);
                return static_cast<Action>(argmax_row(out.logits, 0));
            };
            return eval_episodes(dataset, options.split, options.episodes, options.seed, config, act,
                                 options.dump_traj_dir);
        }
        case Algo::Random: {
            std::optional<RandomPolicy> policy;
            auto act = [&](Environment&, const Observation&, int ep, int t) {
                if (t == 0) policy.emplace(Rng::fork(options.seed, static_cast<std::uint64_t>(ep)).next_u64());
                return policy->act();
            };
            return eval_episodes(dataset, options.split, options.episodes, options.seed, config, act,
                                 options.dump_traj_dir);
        }
        case Algo::Oracle: {
            auto act = [&](Environment& env, const Observation&, int, int) {
                return oracle_policy(*env.context().table, env.context().scene->target_id, env.state().vp,
                                     config.reward.delta);
            };
            return eval_episodes(dataset, options.split, options.episodes, options.seed, config, act,
                                 options.dump_traj_dir);
        }
    }
    throw ConfigError("unhandled algorithm");
}

void write_eval_report_csv(const fs::path& path, const EvalReport& report) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("eval report: cannot open for writing: " + path.string());
    f << "episodes,successes,success_rate,mean_length,mean_final_psi,mean_return,grasps,mean_psi_at_grasp\n";
    f << report.episodes << ',' << report.successes << ',' << format_double(report.success_rate) << ','
      << format_double(report.mean_length) << ',' << format_double(report.mean_final_psi) << ','
      << format_double(report.mean_return) << ',' << report.grasps << ',' << format_double(report.mean_psi_at_grasp)
      << "\n\n";
    f << "scene_index,episodes,successes,success_rate\n";
    for (const auto& s : report.per_scene)
        f << s.scene_index << ',' << s.episodes << ',' << s.successes << ','
          << format_double(s.episodes > 0 ? static_cast<double>(s.successes) / s.episodes : 0.0) << "\n";
}

std::string eval_summary(const EvalReport& report) {
    std::ostringstream ss;
    ss << "episodes " << report.episodes << "  successes " << report.successes << "  success_rate "
       << format_double(report.success_rate) << "\nmean_length " << format_double(report.mean_length)
       << "  mean_final_psi " << format_double(report.mean_final_psi) << "  mean_return "
       << format_double(report.mean_return) << "\n";
    for (const auto& s : report.per_scene)
        ss << "  scene " << s.scene_index << ": " << s.successes << "/" << s.episodes << "\n";
    return ss.str();
}

int replay_trajectory(Dataset& dataset, const Trajectory& trajectory, const HarnessConfig& config) {
    if (trajectory.scene_index < 0 || trajectory.scene_index >= dataset.scene_count())
        throw ConfigError("replay: scene_index " + std::to_string(trajectory.scene_index) +
                          " is outside the dataset");
    Environment env(config.reward, config.n_points);
    env.reset_at(dataset.context(trajectory.scene_index), trajectory.start, 0);

    int step_no = 0;
    for (const auto& row : trajectory.steps) {
        if (env.state().done)
            throw ReplayMismatchError(step_no, "replay: trajectory continues past the episode end at step " +
                                                   std::to_string(step_no));
        auto res = env.step(row.action);
        if (!(res.state.vp == row.vp))
            throw ReplayMismatchError(step_no, "replay: viewpoint diverged at step " + std::to_string(step_no) +
                                                   ": stored (" + std::to_string(row.vp.azimuth_idx) + "," +
                                                   std::to_string(row.vp.elevation_idx) + "), recomputed (" +
                                                   std::to_string(res.state.vp.azimuth_idx) + "," +
                                                   std::to_string(res.state.vp.elevation_idx) + ")");
        if (res.psi != row.psi)
            throw ReplayMismatchError(step_no, "replay: psi diverged at step " + std::to_string(step_no) +
                                                   ": stored " + format_double(row.psi) + ", recomputed " +
                                                   format_double(res.psi));
        if (res.reward != row.reward)
            throw ReplayMismatchError(step_no, "replay: reward diverged at step " + std::to_string(step_no) +
                                                   ": stored " + format_double(row.reward) + ", recomputed " +
                                                   format_double(res.reward));
        if (res.done != row.done)
            throw ReplayMismatchError(step_no, "replay: done flag diverged at step " + std::to_string(step_no));
        ++step_no;
    }
    return step_no;
}

}  // namespace viewopt
