#pragma once

#include <stdexcept>
#include <vector>

#include "viewopt/env.hpp"
#include "viewopt/learn/a2c.hpp"
#include "viewopt/learn/nn.hpp"

namespace viewopt {

struct InsufficientSuccessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One expert decision: the state it was taken in plus the sampled point
// observation. scene/viewpoint make the pair replayable and let the image
// observation for the CNN variant be rebuilt deterministically.
struct ILSample {
    int scene_index = 0;
    ViewpointIndex vp;
    Observation obs;
    Action action = Action::Left;
};

struct ILDataset {
    int trajectories = 0;
    std::vector<ILSample> samples;
    std::vector<int> trajectory_offsets;  // start index per trajectory
};

struct ILConfig {
    double lr = 3e-4;
    double momentum = 0.9;
    double grad_clip = 0.5;
    int batch_size = 128;
    long budget_presentations = 200000;  // sample presentations, matching the RL env-step budget
    long eval_interval = 10000;
    int eval_episodes = 40;
    double holdout_fraction = 0.1;

    void validate() const {
        if (lr <= 0.0 || batch_size < 1 || budget_presentations < 1 || eval_interval < 1 ||
            holdout_fraction < 0.0 || holdout_fraction >= 1.0)
            throw std::invalid_argument("il: configuration values out of range");
    }
};

struct ILTrainStats {
    double final_loss = 0.0;
    double holdout_accuracy = 0.0;
    long presentations = 0;
};

// mean cross-entropy of expert actions over one minibatch; gradients go only
// through the policy head
template <class Policy>
double il_minibatch_update(Policy& policy, const std::vector<const typename Policy::Obs*>& obs,
                           const std::vector<int>& actions, const ILConfig& cfg,
                           nn::MomentumOptimizer<typename Policy::Scalar>& optimizer, Policy& grad_scratch) {
    using T = typename Policy::Scalar;
    auto batch = Policy::make_batch(obs);
    typename Policy::Cache cache;
    auto out = policy.forward(batch, &cache);
    const long M = out.logits.rows();

    nn::Mat<T> probs = nn::softmax_rows(out.logits);
    nn::Mat<T> dlogits(M, kActionCount);
    double loss = 0.0;
    const double inv_m = 1.0 / static_cast<double>(M);
    for (long i = 0; i < M; ++i) {
        int a = actions[static_cast<std::size_t>(i)];
        double p_a = static_cast<double>(probs(i, a));
        loss -= std::log(std::max(p_a, 1e-30)) * inv_m;
        for (int k = 0; k < kActionCount; ++k)
            dlogits(i, k) = static_cast<T>((static_cast<double>(probs(i, k)) - (k == a ? 1.0 : 0.0)) * inv_m);
    }
    if (!std::isfinite(loss)) throw DivergenceError("il: non-finite loss");

    nn::Vec<T> dvalue = nn::Vec<T>::Zero(M);
    grad_scratch.zero();
    policy.backward(batch, cache, dlogits, dvalue, grad_scratch);
    optimizer.step(policy.tensors(), grad_scratch.tensors());
    return loss;
}

template <class Policy>
double il_accuracy(Policy& policy, const std::vector<const typename Policy::Obs*>& obs,
                   const std::vector<int>& actions) {
    if (obs.empty()) return 0.0;
    auto batch = Policy::make_batch(obs);
    auto out = policy.forward(batch, nullptr);
    long correct = 0;
    for (long i = 0; i < out.logits.rows(); ++i) {
        int best = 0;
        for (int k = 1; k < kActionCount; ++k)
            if (out.logits(i, k) > out.logits(i, best)) best = k;
        if (best == actions[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(out.logits.rows());
}

}  // namespace viewopt
