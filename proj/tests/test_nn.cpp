#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "viewopt/learn/checkpoint.hpp"
#include "viewopt/learn/cnn_policy.hpp"
#include "viewopt/learn/point_policy.hpp"

using namespace viewopt;
namespace fs = std::filesystem;

namespace {

Observation random_observation(int n, Rng& rng) {
    Observation obs;
    obs.n_points = n;
    obs.points.resize(static_cast<std::size_t>(n) * 3);
    obs.mask.resize(static_cast<std::size_t>(n));
    obs.pixel_u.assign(static_cast<std::size_t>(n), 0);
    obs.pixel_v.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        obs.points[3 * i + 0] = static_cast<float>(rng.uniform(-0.3, 0.3));
        obs.points[3 * i + 1] = static_cast<float>(rng.uniform(-0.3, 0.3));
        obs.points[3 * i + 2] = static_cast<float>(rng.uniform(0.2, 0.8));
        obs.mask[static_cast<std::size_t>(i)] = rng.next_below(2) ? 1 : 0;
    }
    return obs;
}

ImageObservation random_image(int h, int w, Rng& rng) {
    ImageObservation img;
    img.height = h;
    img.width = w;
    img.data.resize(static_cast<std::size_t>(2) * h * w);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform(0.0, 0.8));
    return img;
}

void randomize(std::vector<nn::TensorRef<double>> tensors, Rng& rng, double scale) {
    for (auto& t : tensors)
        for (long i = 0; i < t.size(); ++i) t.data[i] = rng.uniform(-scale, scale);
}

// declared supervised loss: cross-entropy of the target action plus squared
// value error; the same backward path the trainers use
template <class Policy>
double loss_and_grads(Policy& policy, const typename Policy::Batch& batch, int action, double value_target,
                      Policy* grads) {
    typename Policy::Cache cache;
    auto out = policy.forward(batch, &cache);
    nn::Mat<double> p = nn::softmax_rows(out.logits);
    double loss = -std::log(std::max(p(0, action), 1e-300)) +
                  0.5 * (out.value[0] - value_target) * (out.value[0] - value_target);
    if (grads) {
        nn::Mat<double> dlogits = p;
        dlogits(0, action) -= 1.0;
        nn::Vec<double> dvalue(1);
        dvalue[0] = out.value[0] - value_target;
        grads->zero();
        policy.backward(batch, cache, dlogits, dvalue, *grads);
    }
    return loss;
}

template <class Policy>
double loss_only(Policy& policy, const typename Policy::Batch& batch, int action, double value_target) {
    return loss_and_grads(policy, batch, action, value_target, static_cast<Policy*>(nullptr));
}

// central finite difference against the analytic gradient at chosen entries
template <class Policy>
void check_gradients(Policy& policy, const typename Policy::Batch& batch, int per_tensor_samples) {
    Policy grads = policy;
    const int action = 2;
    const double value_target = 0.7;
    loss_and_grads(policy, batch, action, value_target, &grads);

    auto params = policy.tensors();
    auto grad_refs = grads.tensors();
    const double h = 1e-4;
    Rng pick(2024);
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        auto& t = params[ti];
        long n = t.size();
        for (int s = 0; s < per_tensor_samples; ++s) {
            long i = n <= per_tensor_samples ? s : static_cast<long>(pick.next_below(static_cast<std::uint32_t>(n)));
            if (i >= n) break;
            double saved = t.data[i];
            t.data[i] = saved + h;
            double lp = loss_only(policy, batch, action, value_target);
            t.data[i] = saved - h;
            double lm = loss_only(policy, batch, action, value_target);
            t.data[i] = saved;
            double numeric = (lp - lm) / (2.0 * h);
            double analytic = grad_refs[ti].data[i];
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
            INFO(t.name, "[", i, "] numeric ", numeric, " analytic ", analytic);
            CHECK(std::abs(numeric - analytic) / denom < 1e-4);
        }
    }
}

}  // namespace

TEST_CASE("point policy logits are bitwise invariant to point permutations") {
    PointPolicy<float> policy(7);
    Rng rng(5);
    Observation obs = random_observation(128, rng);
    const Observation* p = &obs;
    auto base = policy.forward(PointPolicy<float>::make_batch({p}), nullptr);

    Observation shuffled = obs;
    for (int shuffle = 0; shuffle < 50; ++shuffle) {
        for (int i = shuffled.n_points - 1; i > 0; --i) {
            int j = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(i + 1)));
            for (int c = 0; c < 3; ++c) std::swap(shuffled.points[3 * i + c], shuffled.points[3 * j + c]);
            std::swap(shuffled.mask[static_cast<std::size_t>(i)], shuffled.mask[static_cast<std::size_t>(j)]);
        }
        const Observation* q = &shuffled;
        auto out = policy.forward(PointPolicy<float>::make_batch({q}), nullptr);
        for (int k = 0; k < kActionCount; ++k) CHECK(out.logits(0, k) == base.logits(0, k));
        CHECK(out.value[0] == base.value[0]);
    }
}

TEST_CASE("zero weights give uniform logits") {
    PointPolicy<float> policy(3);
    policy.zero();
    Rng rng(6);
    Observation obs = random_observation(32, rng);
    const Observation* p = &obs;
    auto out = policy.forward(PointPolicy<float>::make_batch({p}), nullptr);
    for (int k = 0; k < kActionCount; ++k) CHECK(out.logits(0, k) == 0.0f);
    nn::Mat<float> probs = nn::softmax_rows(out.logits);
    for (int k = 0; k < kActionCount; ++k) CHECK(probs(0, k) == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("outputs are finite and bounded by a weight-norm constant") {
    PointPolicy<double> policy(0);
    Rng rng(7);
    randomize(policy.tensors(), rng, 0.5);

    // interval-arithmetic style bound through affine layers; relu and max
    // cannot increase it
    double bound = 1.0;  // inputs lie in [-1, 1]
    for (auto& t : policy.tensors()) (void)t;
    auto layer_bound = [](const std::vector<nn::TensorRef<double>>& ts, std::size_t wi, double in_bound) {
        const auto& W = ts[wi];
        const auto& b = ts[wi + 1];
        double best = 0.0;
        for (long c = 0; c < W.cols; ++c) {
            double s = 0.0;
            for (long r = 0; r < W.rows; ++r) s += std::abs(W.data[r * W.cols + c]);
            best = std::max(best, s * in_bound + std::abs(b.data[c]));
        }
        return best;
    };
    auto ts = policy.tensors();
    double b1 = layer_bound(ts, 0, 1.0);
    double b2 = layer_bound(ts, 2, b1);
    double b3 = layer_bound(ts, 4, b2);
    double b4 = layer_bound(ts, 6, b3);
    double head = std::max(layer_bound(ts, 8, b4), layer_bound(ts, 10, b4));

    Observation obs;
    obs.n_points = 64;
    obs.points.resize(64 * 3);
    obs.mask.resize(64);
    obs.pixel_u.assign(64, 0);
    obs.pixel_v.assign(64, 0);
    for (int i = 0; i < 64; ++i) {
        for (int c = 0; c < 3; ++c) obs.points[3 * i + c] = static_cast<float>(rng.uniform(-1.0, 1.0));
        obs.mask[static_cast<std::size_t>(i)] = rng.next_below(2) ? 1 : 0;
    }
    const Observation* p = &obs;
    auto out = policy.forward(PointPolicy<double>::make_batch({p}), nullptr);
    for (int k = 0; k < kActionCount; ++k) {
        CHECK(std::isfinite(out.logits(0, k)));
        CHECK(std::abs(out.logits(0, k)) <= head);
    }
    CHECK(std::abs(out.value[0]) <= head);
}

TEST_CASE("point policy gradients match central finite differences") {
    PointPolicy<double> policy(0);
    Rng rng(11);
    randomize(policy.tensors(), rng, 0.3);

    // 3-point toy observation
    Observation obs = random_observation(3, rng);
    const Observation* p = &obs;
    auto batch = PointPolicy<double>::make_batch({p});
    check_gradients(policy, batch, 40);
}

TEST_CASE("cnn policy gradients match central finite differences") {
    CnnPolicy<double> policy(24, 32, 0);
    Rng rng(12);
    randomize(policy.tensors(), rng, 0.1);
    ImageObservation img = random_image(24, 32, rng);
    const ImageObservation* p = &img;
    auto batch = CnnPolicy<double>::make_batch({p});
    check_gradients(policy, batch, 12);
}

TEST_CASE("zero-loss batch produces zero gradients") {
    PointPolicy<double> policy(0);
    Rng rng(13);
    randomize(policy.tensors(), rng, 0.3);
    Observation obs = random_observation(8, rng);
    const Observation* p = &obs;
    auto batch = PointPolicy<double>::make_batch({p});

    // squared loss on the value head with the target equal to the output
    typename PointPolicy<double>::Cache cache;
    auto out = policy.forward(batch, &cache);
    nn::Mat<double> dlogits = nn::Mat<double>::Zero(1, kActionCount);
    nn::Vec<double> dvalue(1);
    dvalue[0] = out.value[0] - out.value[0];
    PointPolicy<double> grads = policy;
    grads.zero();
    policy.backward(batch, cache, dlogits, dvalue, grads);
    for (auto& t : grads.tensors())
        for (long i = 0; i < t.size(); ++i) CHECK(t.data[i] == 0.0);
}

TEST_CASE("duplicating a batch leaves the mean gradient unchanged") {
    PointPolicy<double> policy(0);
    Rng rng(14);
    randomize(policy.tensors(), rng, 0.3);
    Observation obs = random_observation(5, rng);

    auto mean_grads = [&](const std::vector<const Observation*>& ptrs) {
        auto batch = PointPolicy<double>::make_batch(ptrs);
        typename PointPolicy<double>::Cache cache;
        auto out = policy.forward(batch, &cache);
        long m = out.logits.rows();
        nn::Mat<double> p = nn::softmax_rows(out.logits);
        nn::Mat<double> dlogits = p;
        for (long r = 0; r < m; ++r) dlogits(r, 1) -= 1.0;
        dlogits /= static_cast<double>(m);
        nn::Vec<double> dvalue = nn::Vec<double>::Zero(m);
        PointPolicy<double> grads = policy;
        grads.zero();
        policy.backward(batch, cache, dlogits, dvalue, grads);
        return grads;
    };

    PointPolicy<double> g1 = mean_grads({&obs});
    PointPolicy<double> g2 = mean_grads({&obs, &obs});
    auto t1 = g1.tensors(), t2 = g2.tensors();
    for (std::size_t i = 0; i < t1.size(); ++i)
        for (long j = 0; j < t1[i].size(); ++j)
            CHECK(t1[i].data[j] == doctest::Approx(t2[i].data[j]).epsilon(1e-12));
}

TEST_CASE("softmax entropy lies in [0, log 5]") {
    Rng rng(15);
    for (int i = 0; i < 500; ++i) {
        nn::Mat<double> logits(1, kActionCount);
        for (int k = 0; k < kActionCount; ++k) logits(0, k) = rng.uniform(-20.0, 20.0);
        nn::Mat<double> p = nn::softmax_rows(logits);
        double h = 0.0;
        for (int k = 0; k < kActionCount; ++k)
            if (p(0, k) > 0.0) h -= p(0, k) * std::log(p(0, k));
        CHECK(h >= 0.0);
        CHECK(h <= std::log(5.0) + 1e-12);
    }
}

TEST_CASE("checkpoints round-trip and validate architecture and shapes") {
    fs::path dir = fs::temp_directory_path() / "viewopt_tests" / "ckpt";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path file = dir / "p.bin";

    PointPolicy<float> policy(21);
    std::vector<NamedTensorView> views;
    for (auto& t : policy.tensors()) views.push_back({t.name, t.rows, t.cols, t.data});
    save_checkpoint(file, PointPolicy<float>::kArchTag, views);

    PointPolicy<float> restored(0);
    std::vector<NamedTensorView> in_views;
    for (auto& t : restored.tensors()) in_views.push_back({t.name, t.rows, t.cols, t.data});
    load_checkpoint(file, PointPolicy<float>::kArchTag, in_views);

    auto a = policy.tensors(), b = restored.tensors();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (long j = 0; j < a[i].size(); ++j) CHECK(a[i].data[j] == b[i].data[j]);

    CHECK(checkpoint_arch_tag(file) == PointPolicy<float>::kArchTag);
    CHECK_THROWS_AS(load_checkpoint(file, CnnPolicy<float>::kArchTag, in_views), CheckpointError);

    // shape mismatch: lie about a tensor's shape
    in_views[0].rows += 1;
    CHECK_THROWS_AS(load_checkpoint(file, PointPolicy<float>::kArchTag, in_views), CheckpointError);
}
