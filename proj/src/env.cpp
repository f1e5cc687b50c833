#include "viewopt/env.hpp"

#include <cmath>

namespace viewopt {

char action_letter(Action a) {
    switch (a) {
        case Action::Left: return 'L';
        case Action::Right: return 'R';
        case Action::Up: return 'U';
        case Action::Down: return 'D';
        case Action::Grasp: return 'G';
    }
    return '?';
}

Action action_from_letter(char c) {
    switch (c) {
        case 'L': return Action::Left;
        case 'R': return Action::Right;
        case 'U': return Action::Up;
        case 'D': return Action::Down;
        case 'G': return Action::Grasp;
    }
    throw std::invalid_argument(std::string("unknown action letter: ") + c);
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::None: return "none";
        case Outcome::GraspSuccess: return "grasp_success";
        case Outcome::GraspFail: return "grasp_fail";
        case Outcome::Timeout: return "timeout";
    }
    return "?";
}

ViewpointIndex move(ViewpointIndex vp, Action a) {
    switch (a) {
        case Action::Left: return {(vp.azimuth_idx + kAzimuthSteps - 1) % kAzimuthSteps, vp.elevation_idx};
        case Action::Right: return {(vp.azimuth_idx + 1) % kAzimuthSteps, vp.elevation_idx};
        case Action::Up: return {vp.azimuth_idx, std::min(vp.elevation_idx + 1, kElevationSteps - 1)};
        case Action::Down: return {vp.azimuth_idx, std::max(vp.elevation_idx - 1, 0)};
        case Action::Grasp: throw std::invalid_argument("move: grasp is not a motion action");
    }
    return vp;
}

double grasping_reward(Action a, double psi, double delta) {
    if (a != Action::Grasp) return 0.0;
    return psi > delta ? 0.25 : psi - 1.5;
}

Observation make_observation(const DepthLabelView& view, const CameraIntrinsics& intr, int target_id, int n_points,
                             Rng& rng) {
    const int w = view.depth.width();
    const int h = view.depth.height();
    const std::uint32_t total = static_cast<std::uint32_t>(w) * static_cast<std::uint32_t>(h);

    int valid = 0;
    for (float d : view.depth.data())
        if (d > 0.0f) ++valid;

    Observation obs;
    obs.n_points = n_points;
    obs.points.resize(static_cast<std::size_t>(n_points) * 3);
    obs.mask.resize(static_cast<std::size_t>(n_points));
    obs.pixel_u.resize(static_cast<std::size_t>(n_points));
    obs.pixel_v.resize(static_cast<std::size_t>(n_points));

    auto emit = [&](int slot, std::uint32_t idx) {
        int u = static_cast<int>(idx % static_cast<std::uint32_t>(w));
        int v = static_cast<int>(idx / static_cast<std::uint32_t>(w));
        float z = view.depth[idx];
        obs.points[3 * slot + 0] = static_cast<float>((u + 0.5 - intr.cx) / intr.fx * z);
        obs.points[3 * slot + 1] = static_cast<float>((v + 0.5 - intr.cy) / intr.fy * z);
        obs.points[3 * slot + 2] = z;
        obs.mask[slot] = view.labels[idx] == target_id ? 1 : 0;
        obs.pixel_u[slot] = static_cast<std::uint16_t>(u);
        obs.pixel_v[slot] = static_cast<std::uint16_t>(v);
    };

    if (valid == 0) {
        std::fill(obs.points.begin(), obs.points.end(), 0.0f);
        std::fill(obs.mask.begin(), obs.mask.end(), 0);
        std::fill(obs.pixel_u.begin(), obs.pixel_u.end(), 0);
        std::fill(obs.pixel_v.begin(), obs.pixel_v.end(), 0);
        return obs;
    }

    if (valid >= n_points) {
        std::vector<std::uint64_t> chosen((total + 63) / 64, 0);
        for (int k = 0; k < n_points;) {
            std::uint32_t idx = rng.next_below(total);
            if (view.depth[idx] <= 0.0f) continue;
            std::uint64_t& word = chosen[idx >> 6];
            std::uint64_t bit = 1ULL << (idx & 63);
            if (word & bit) continue;
            word |= bit;
            emit(k++, idx);
        }
    } else {
        std::vector<std::uint32_t> valid_idx;
        valid_idx.reserve(static_cast<std::size_t>(valid));
        for (std::uint32_t idx = 0; idx < total; ++idx)
            if (view.depth[idx] > 0.0f) valid_idx.push_back(idx);
        int k = 0;
        for (std::uint32_t idx : valid_idx) emit(k++, idx);
        for (; k < n_points; ++k) emit(k, valid_idx[rng.next_below(static_cast<std::uint32_t>(valid_idx.size()))]);
    }
    return obs;
}

ImageObservation make_image_observation(const DepthLabelView& view, int target_id, int downsample) {
    if (downsample < 1) throw std::invalid_argument("image observation: downsample factor must be positive");
    const int w = view.depth.width() / downsample;
    const int h = view.depth.height() / downsample;
    if (w < 1 || h < 1) throw std::invalid_argument("image observation: raster too small for downsample factor");

    ImageObservation img;
    img.width = w;
    img.height = h;
    img.data.assign(static_cast<std::size_t>(2) * w * h, 0.0f);
    for (int oy = 0; oy < h; ++oy) {
        for (int ox = 0; ox < w; ++ox) {
            double depth_sum = 0.0;
            int depth_n = 0, mask_n = 0, total = 0;
            for (int dy = 0; dy < downsample; ++dy) {
                for (int dx = 0; dx < downsample; ++dx) {
                    int x = ox * downsample + dx;
                    int y = oy * downsample + dy;
                    float d = view.depth.at(x, y);
                    if (d > 0.0f) {
                        depth_sum += d;
                        ++depth_n;
                    }
                    if (view.labels.at(x, y) == target_id) ++mask_n;
                    ++total;
                }
            }
            img.data[static_cast<std::size_t>(oy) * w + ox] =
                depth_n > 0 ? static_cast<float>(depth_sum / depth_n) : 0.0f;
            img.data[static_cast<std::size_t>(h) * w + static_cast<std::size_t>(oy) * w + ox] =
                static_cast<float>(mask_n) / static_cast<float>(total);
        }
    }
    return img;
}

Observation corrupt_mask(const Observation& obs, const MaskNoise& noise, std::uint64_t seed) {
    if (noise.flip_prob < 0.0 || noise.flip_prob > 1.0)
        throw std::invalid_argument("mask noise: flip_prob must lie in [0, 1]");
    if (noise.erosion_radius < 0.0) throw std::invalid_argument("mask noise: erosion radius must be non-negative");

    Observation out = obs;
    if (noise.erosion_radius > 0.0) {
        double r2 = noise.erosion_radius * noise.erosion_radius;
        for (int i = 0; i < obs.n_points; ++i) {
            if (!obs.mask[static_cast<std::size_t>(i)]) continue;
            for (int j = 0; j < obs.n_points; ++j) {
                if (obs.mask[static_cast<std::size_t>(j)]) continue;
                double du = static_cast<double>(obs.pixel_u[static_cast<std::size_t>(i)]) -
                            static_cast<double>(obs.pixel_u[static_cast<std::size_t>(j)]);
                double dv = static_cast<double>(obs.pixel_v[static_cast<std::size_t>(i)]) -
                            static_cast<double>(obs.pixel_v[static_cast<std::size_t>(j)]);
                if (du * du + dv * dv <= r2) {
                    out.mask[static_cast<std::size_t>(i)] = 0;
                    break;
                }
            }
        }
    }
    if (noise.flip_prob > 0.0) {
        Rng rng = Rng::fork(seed, 0x3a5f);
        for (int i = 0; i < obs.n_points; ++i)
            if (rng.bernoulli(noise.flip_prob)) out.mask[static_cast<std::size_t>(i)] ^= 1;
    }
    return out;
}

RenderedSceneViews::RenderedSceneViews(const SceneSpec& scene, const ViewpointLattice& lattice)
    : scene_(&scene), lattice_(&lattice) {
    for (auto& slot : slots_) slot.store(nullptr, std::memory_order_relaxed);
    valid_counts_.fill(-1);
}

RenderedSceneViews::~RenderedSceneViews() {
    for (auto& slot : slots_) delete slot.load(std::memory_order_relaxed);
}

const DepthLabelView& RenderedSceneViews::view(ViewpointIndex vp) {
    auto& slot = slots_[static_cast<std::size_t>(vp.flat())];
    DepthLabelView* p = slot.load(std::memory_order_acquire);
    if (p) return *p;
    std::lock_guard<std::mutex> lock(fill_mutex_);
    p = slot.load(std::memory_order_acquire);
    if (p) return *p;
    auto fresh = std::make_unique<DepthLabelView>(render_depth_labels(*scene_, vp, *lattice_));
    int valid = 0;
    for (float d : fresh->depth.data())
        if (d > 0.0f) ++valid;
    valid_counts_[static_cast<std::size_t>(vp.flat())] = valid;
    p = fresh.release();
    slot.store(p, std::memory_order_release);
    return *p;
}

int RenderedSceneViews::valid_count(ViewpointIndex vp) {
    view(vp);
    return valid_counts_[static_cast<std::size_t>(vp.flat())];
}

Environment::Environment(RewardParams params, int n_points) : params_(params), n_points_(n_points), rng_(0) {
    params_.validate();
    if (n_points_ < 1) throw std::invalid_argument("environment: point count must be positive");
}

std::pair<EnvState, Observation> Environment::reset(const SceneContext& ctx, std::uint64_t seed) {
    rng_ = Rng::fork(seed, 0xe0f);
    ViewpointIndex vp = ViewpointIndex::from_flat(static_cast<int>(rng_.next_below(kLatticeSize)));
    return reset_bound(ctx, vp);
}

std::pair<EnvState, Observation> Environment::reset_at(const SceneContext& ctx, ViewpointIndex vp,
                                                       std::uint64_t seed) {
    rng_ = Rng::fork(seed, 0xe0f);
    return reset_bound(ctx, vp);
}

double Environment::psi_at(ViewpointIndex vp) const { return ctx_.table->psi(ctx_.scene->target_id, vp); }

double Environment::reward_psi(ViewpointIndex vp) const { return quantize_psi(psi_at(vp)); }

Observation Environment::observe() {
    return make_observation(ctx_.views->view(state_.vp), ctx_.lattice->intrinsics, ctx_.scene->target_id, n_points_,
                            rng_);
}

Environment::StepResult Environment::step(Action a) {
    if (!bound_) throw std::logic_error("environment: step before reset");
    if (state_.done) throw std::logic_error("environment: step on a finished episode");

    double reward = 0.0;
    if (a == Action::Grasp) {
        double psi = psi_at(state_.vp);
        reward = grasping_reward(a, psi, params_.delta);
        state_.done = true;
        state_.outcome = psi > params_.delta ? Outcome::GraspSuccess : Outcome::GraspFail;
    } else {
        ViewpointIndex next = move(state_.vp, a);
        reward = tendency_reward(reward_psi(next), reward_psi(state_.vp));
        state_.vp = next;
    }
    state_.step_count += 1;
    if (!state_.done && state_.step_count >= params_.max_steps) {
        state_.done = true;
        state_.outcome = Outcome::Timeout;
    }

    StepResult result;
    result.state = state_;
    result.obs = observe();
    result.reward = reward;
    result.done = state_.done;
    result.psi = psi_at(state_.vp);
    return result;
}

std::pair<EnvState, Observation> Environment::reset_bound(const SceneContext& ctx, ViewpointIndex vp) {
    if (!ctx.scene || !ctx.table || !ctx.lattice || !ctx.views)
        throw std::invalid_argument("environment: incomplete scene context");
    ctx_ = ctx;
    bound_ = true;
    state_ = EnvState{vp, 0, false, Outcome::None};
    return {state_, observe()};
}

}  // namespace viewopt
