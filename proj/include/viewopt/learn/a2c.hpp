#pragma once

#include <stdexcept>
#include <vector>

#include "viewopt/learn/nn.hpp"

namespace viewopt {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StaleRolloutError : std::logic_error {
    using std::logic_error::logic_error;
};

struct A2CConfig {
    double gamma = 0.99;
    int rollout_len = 16;
    double lr = 3e-4;
    double value_loss_weight = 0.5;
    double entropy_bonus = 0.01;
    int n_envs = 8;
    double grad_clip = 0.5;
    long total_env_steps = 200000;
    long eval_interval = 10000;
    int eval_episodes = 40;
    double on_policy_tolerance = 1e-6;

    void validate() const {
        if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("a2c: gamma must lie in (0, 1)");
        if (rollout_len < 1 || n_envs < 1 || lr <= 0.0 || value_loss_weight < 0.0 || entropy_bonus < 0.0 ||
            grad_clip < 0.0 || total_env_steps < 1 || eval_interval < 1 || eval_episodes < 1)
            throw std::invalid_argument("a2c: configuration values must be positive");
    }
};

// On-policy rollout of n_envs x len transitions, flattened as t*n_envs + e.
// behavior_logits are the logits the actions were sampled from; the update
// recomputes them and rejects the rollout if they moved.
template <class Policy>
struct Rollout {
    using T = typename Policy::Scalar;
    using Obs = typename Policy::Obs;

    int n_envs = 0;
    int len = 0;
    std::vector<Obs> obs;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<std::uint8_t> dones;      // episode ended at this transition
    nn::Mat<T> behavior_logits;           // (len*n_envs) x 5
    nn::Vec<T> bootstrap_value;           // V(s_len) per env under the collection params
    std::vector<std::uint8_t> bootstrap_done;

    long size() const { return static_cast<long>(n_envs) * len; }
};

struct A2CUpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double total_loss = 0.0;
};

// Discounted n-step returns over a flattened rollout (index t*n_envs + e),
// bootstrapped with V(s_n) per env unless the final transition ended the
// episode. The advantage of transition i is returns[i] - V(s_i).
inline std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                              const std::vector<std::uint8_t>& dones, int n_envs, int len,
                                              const std::vector<double>& bootstrap_value,
                                              const std::vector<std::uint8_t>& bootstrap_done, double gamma) {
    std::vector<double> returns(rewards.size(), 0.0);
    for (int e = 0; e < n_envs; ++e) {
        double r = bootstrap_done[static_cast<std::size_t>(e)] ? 0.0 : bootstrap_value[static_cast<std::size_t>(e)];
        for (int t = len - 1; t >= 0; --t) {
            std::size_t i = static_cast<std::size_t>(t) * static_cast<std::size_t>(n_envs) + static_cast<std::size_t>(e);
            r = dones[i] ? rewards[i] : rewards[i] + gamma * r;
            returns[i] = r;
        }
    }
    return returns;
}

// Bootstrapped n-step advantage actor-critic step: discounted returns from
// the rollout tail, advantages against the value head, one clipped
// gradient-descent-with-momentum update.
template <class Policy>
A2CUpdateStats a2c_update(Policy& policy, const Rollout<Policy>& rollout, const A2CConfig& cfg,
                          nn::MomentumOptimizer<typename Policy::Scalar>& optimizer, Policy& grad_scratch) {
    using T = typename Policy::Scalar;
    cfg.validate();
    const long M = rollout.size();
    if (M == 0) throw std::invalid_argument("a2c: empty rollout");

    std::vector<const typename Policy::Obs*> ptrs;
    ptrs.reserve(static_cast<std::size_t>(M));
    for (const auto& o : rollout.obs) ptrs.push_back(&o);
    auto batch = Policy::make_batch(ptrs);

    typename Policy::Cache cache;
    auto out = policy.forward(batch, &cache);

    T drift = (out.logits - rollout.behavior_logits).cwiseAbs().maxCoeff();
    if (static_cast<double>(drift) > cfg.on_policy_tolerance)
        throw StaleRolloutError("a2c: rollout is stale, logits drifted by " + std::to_string(double(drift)));

    std::vector<double> boot_values(static_cast<std::size_t>(rollout.n_envs));
    for (int e = 0; e < rollout.n_envs; ++e) boot_values[static_cast<std::size_t>(e)] = rollout.bootstrap_value[e];
    std::vector<double> returns = discounted_returns(rollout.rewards, rollout.dones, rollout.n_envs, rollout.len,
                                                     boot_values, rollout.bootstrap_done, cfg.gamma);

    nn::Mat<T> probs = nn::softmax_rows(out.logits);
    nn::Mat<T> dlogits = nn::Mat<T>::Zero(M, kActionCount);
    nn::Vec<T> dvalue(M);
    double policy_loss = 0.0, value_loss = 0.0, entropy_sum = 0.0;
    const double inv_m = 1.0 / static_cast<double>(M);

    for (long i = 0; i < M; ++i) {
        int a = rollout.actions[static_cast<std::size_t>(i)];
        double v = static_cast<double>(out.value[i]);
        double adv = returns[static_cast<std::size_t>(i)] - v;
        double p_a = static_cast<double>(probs(i, a));
        policy_loss -= adv * std::log(std::max(p_a, 1e-30)) * inv_m;
        value_loss += (returns[static_cast<std::size_t>(i)] - v) * (returns[static_cast<std::size_t>(i)] - v) * inv_m;

        double h = 0.0;
        for (int k = 0; k < kActionCount; ++k) {
            double p = static_cast<double>(probs(i, k));
            if (p > 0.0) h -= p * std::log(p);
        }
        entropy_sum += h * inv_m;

        for (int k = 0; k < kActionCount; ++k) {
            double p = static_cast<double>(probs(i, k));
            double grad = adv * (p - (k == a ? 1.0 : 0.0));
            if (p > 0.0) grad += cfg.entropy_bonus * p * (std::log(p) + h);
            dlogits(i, k) = static_cast<T>(grad * inv_m);
        }
        dvalue[i] = static_cast<T>(cfg.value_loss_weight * 2.0 * (v - returns[static_cast<std::size_t>(i)]) * inv_m);
    }

    A2CUpdateStats stats;
    stats.policy_loss = policy_loss;
    stats.value_loss = value_loss;
    stats.entropy = entropy_sum;
    stats.total_loss = policy_loss + cfg.value_loss_weight * value_loss - cfg.entropy_bonus * entropy_sum;
    if (!std::isfinite(stats.total_loss))
        throw DivergenceError("a2c: non-finite loss on a rollout of " + std::to_string(M) + " transitions");

    grad_scratch.zero();
    policy.backward(batch, cache, dlogits, dvalue, grad_scratch);
    optimizer.step(policy.tensors(), grad_scratch.tensors());
    return stats;
}

}  // namespace viewopt
