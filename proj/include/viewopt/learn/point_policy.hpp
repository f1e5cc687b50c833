#pragma once

#include <vector>

#include "viewopt/env.hpp"
#include "viewopt/learn/nn.hpp"

namespace viewopt {

// Permutation-invariant actor-critic over masked point clouds: two shared
// per-point layers (4 -> 64 -> 128), coordinate-wise max over points, then a
// 512/256 trunk feeding a 5-way policy head and a scalar value head. Output
// is invariant to any reordering of the points because every per-point
// operation is row-independent and the pool is a max.
template <class T>
class PointPolicy {
  public:
    using Obs = Observation;
    using Scalar = T;
    static constexpr int kInputDim = 4;  // x, y, z, mask
    static constexpr std::uint32_t kArchTag = 1;

    explicit PointPolicy(std::uint64_t init_seed = 0)
        : enc1_(kInputDim, 64), enc2_(64, 128), trunk1_(128, 512), trunk2_(512, 256), policy_head_(256, kActionCount),
          value_head_(256, 1) {
        Rng rng = Rng::fork(init_seed, 0x9017);
        enc1_.init_glorot(rng);
        enc2_.init_glorot(rng);
        trunk1_.init_glorot(rng);
        trunk2_.init_glorot(rng);
        policy_head_.init_glorot(rng);
        value_head_.init_glorot(rng);
    }

    struct Batch {
        int count = 0;
        int points_per_sample = 0;
        nn::Mat<T> X;  // (count * points_per_sample) x 4
    };

    static Batch make_batch(const std::vector<const Obs*>& observations) {
        Batch batch;
        batch.count = static_cast<int>(observations.size());
        batch.points_per_sample = observations.empty() ? 0 : observations.front()->n_points;
        batch.X.resize(static_cast<long>(batch.count) * batch.points_per_sample, kInputDim);
        long row = 0;
        for (const Obs* obs : observations) {
            if (obs->n_points != batch.points_per_sample)
                throw std::invalid_argument("point batch: inconsistent point counts");
            for (int i = 0; i < obs->n_points; ++i, ++row) {
                batch.X(row, 0) = static_cast<T>(obs->points[3 * i + 0]);
                batch.X(row, 1) = static_cast<T>(obs->points[3 * i + 1]);
                batch.X(row, 2) = static_cast<T>(obs->points[3 * i + 2]);
                batch.X(row, 3) = static_cast<T>(obs->mask[static_cast<std::size_t>(i)]);
            }
        }
        return batch;
    }

    struct Cache {
        nn::Mat<T> a1;      // (B*N) x 64, post-relu
        nn::Mat<T> a2;      // (B*N) x 128, post-relu
        nn::Mat<T> pooled;  // B x 128
        std::vector<long> argmax;  // B*128 source row of each pooled channel
        nn::Mat<T> g1;      // B x 512
        nn::Mat<T> g2;      // B x 256
    };

    struct Output {
        nn::Mat<T> logits;  // B x 5
        nn::Vec<T> value;   // B
    };

    Output forward(const Batch& batch, Cache* cache) const {
        Cache local;
        Cache& c = cache ? *cache : local;
        const int B = batch.count;
        const int N = batch.points_per_sample;

        c.a1 = enc1_.forward(batch.X);
        nn::relu_inplace(c.a1);
        c.a2 = enc2_.forward(c.a1);
        nn::relu_inplace(c.a2);

        c.pooled.resize(B, 128);
        c.argmax.assign(static_cast<std::size_t>(B) * 128, 0);
        for (int b = 0; b < B; ++b) {
            long base = static_cast<long>(b) * N;
            for (int ch = 0; ch < 128; ++ch) {
                T best = c.a2(base, ch);
                long best_row = base;
                for (int i = 1; i < N; ++i) {
                    if (c.a2(base + i, ch) > best) {
                        best = c.a2(base + i, ch);
                        best_row = base + i;
                    }
                }
                c.pooled(b, ch) = best;
                c.argmax[static_cast<std::size_t>(b) * 128 + ch] = best_row;
            }
        }

        c.g1 = trunk1_.forward(c.pooled);
        nn::relu_inplace(c.g1);
        c.g2 = trunk2_.forward(c.g1);
        nn::relu_inplace(c.g2);

        Output out;
        out.logits = policy_head_.forward(c.g2);
        out.value = value_head_.forward(c.g2).col(0);
        return out;
    }

    void backward(const Batch& batch, const Cache& c, const nn::Mat<T>& dlogits, const nn::Vec<T>& dvalue,
                  PointPolicy<T>& grads) const {
        const int B = batch.count;
        const int N = batch.points_per_sample;

        nn::Mat<T> dg2_pol, dg2_val;
        policy_head_.backward(c.g2, dlogits, &dg2_pol, grads.policy_head_);
        nn::Mat<T> dvalue_m = dvalue;  // B x 1
        value_head_.backward(c.g2, dvalue_m, &dg2_val, grads.value_head_);
        nn::Mat<T> dg2 = dg2_pol + dg2_val;
        nn::relu_backward_inplace(dg2, c.g2);

        nn::Mat<T> dg1;
        trunk2_.backward(c.g1, dg2, &dg1, grads.trunk2_);
        nn::relu_backward_inplace(dg1, c.g1);

        nn::Mat<T> dpooled;
        trunk1_.backward(c.pooled, dg1, &dpooled, grads.trunk1_);

        nn::Mat<T> da2 = nn::Mat<T>::Zero(static_cast<long>(B) * N, 128);
        for (int b = 0; b < B; ++b)
            for (int ch = 0; ch < 128; ++ch)
                da2(c.argmax[static_cast<std::size_t>(b) * 128 + ch], ch) += dpooled(b, ch);
        nn::relu_backward_inplace(da2, c.a2);

        nn::Mat<T> da1;
        enc2_.backward(c.a1, da2, &da1, grads.enc2_);
        nn::relu_backward_inplace(da1, c.a1);
        enc1_.backward(batch.X, da1, nullptr, grads.enc1_);
    }

    std::vector<nn::TensorRef<T>> tensors() {
        std::vector<nn::TensorRef<T>> out;
        enc1_.append_tensors("enc1", out);
        enc2_.append_tensors("enc2", out);
        trunk1_.append_tensors("trunk1", out);
        trunk2_.append_tensors("trunk2", out);
        policy_head_.append_tensors("policy_head", out);
        value_head_.append_tensors("value_head", out);
        return out;
    }

    void zero() {
        for (auto& t : tensors()) Eigen::Map<nn::Vec<T>>(t.data, t.size()).setZero();
    }

  private:
    nn::Linear<T> enc1_, enc2_, trunk1_, trunk2_, policy_head_, value_head_;
};

}  // namespace viewopt
