#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "viewopt/camera.hpp"
#include "viewopt/render.hpp"
#include "viewopt/rng.hpp"
#include "viewopt/scene.hpp"

namespace viewopt {

enum class Action : std::uint8_t { Left = 0, Right = 1, Up = 2, Down = 3, Grasp = 4 };
inline constexpr int kActionCount = 5;

char action_letter(Action a);
Action action_from_letter(char c);

// L/R step the azimuth by -1/+1 modulo 36, U/D step the elevation by +1/-1
// clamped to [0, 4]; a clamped move returns the input index unchanged.
ViewpointIndex move(ViewpointIndex vp, Action a);

// +0.25 above the visibility threshold, psi - 1.5 at or below it, 0 for
// non-grasp actions.
double grasping_reward(Action a, double psi, double delta);

// improvement of target visibility over the step
inline double tendency_reward(double psi_next, double psi_curr) { return psi_next - psi_curr; }

// Visibility snapped to a 2^-20 grid. The reward channel serves these values
// so that per-step tendency terms and their running sums stay on the grid:
// summing the tendencies of any trajectory then reproduces psi_end -
// psi_start without rounding drift.
inline double quantize_psi(double psi) { return std::nearbyint(psi * 1048576.0) * 0x1.0p-20; }

struct RewardParams {
    double delta = 0.9;
    double gamma = 0.99;
    int max_steps = 50;

    void validate() const {
        if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("reward: delta must lie in (0, 1)");
        if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("reward: gamma must lie in (0, 1)");
        if (max_steps < 1) throw std::invalid_argument("reward: max_steps must be positive");
    }
};

enum class Outcome : std::uint8_t { None = 0, GraspSuccess, GraspFail, Timeout };
const char* to_string(Outcome o);

struct EnvState {
    ViewpointIndex vp;
    int step_count = 0;
    bool done = false;
    Outcome outcome = Outcome::None;
};

// Fixed-size masked point cloud in the camera frame, unprojected from the
// depth raster. pixel_u/pixel_v record where each point was sampled; they are
// provenance for mask corruption and diagnostics, not part of the policy
// input.
struct Observation {
    int n_points = 0;
    std::vector<float> points;        // x, y, z per point
    std::vector<std::uint8_t> mask;   // 1 where the source pixel shows the target
    std::vector<std::uint16_t> pixel_u;
    std::vector<std::uint16_t> pixel_v;
};

// Uniform sample without replacement over valid-depth pixels, padded by
// resampling with replacement when fewer than n_points pixels are valid.
Observation make_observation(const DepthLabelView& view, const CameraIntrinsics& intr, int target_id, int n_points,
                             Rng& rng);

// Two-channel image observation for the convolutional baseline: block-mean
// depth and target-mask fraction, downsampled from the sensor raster.
struct ImageObservation {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // channel 0 depth, channel 1 mask, row-major
};

ImageObservation make_image_observation(const DepthLabelView& view, int target_id, int downsample);

struct MaskNoise {
    double flip_prob = 0.0;
    double erosion_radius = 0.0;  // pixels
};

// Detector-imperfection model: mask points within erosion_radius of an
// unmasked point (image space) are cleared first, then every flag flips
// independently with flip_prob. Deterministic in seed.
Observation corrupt_mask(const Observation& obs, const MaskNoise& noise, std::uint64_t seed);

// Lazily rendered, cached sensor views of one scene. Rendering is pure, so
// concurrent readers may race to fill a slot without affecting results.
class RenderedSceneViews {
  public:
    RenderedSceneViews(const SceneSpec& scene, const ViewpointLattice& lattice);
    ~RenderedSceneViews();
    RenderedSceneViews(const RenderedSceneViews&) = delete;
    RenderedSceneViews& operator=(const RenderedSceneViews&) = delete;

    const DepthLabelView& view(ViewpointIndex vp);
    int valid_count(ViewpointIndex vp);

  private:
    const SceneSpec* scene_;
    const ViewpointLattice* lattice_;
    std::array<std::atomic<DepthLabelView*>, kLatticeSize> slots_;
    std::array<int, kLatticeSize> valid_counts_;
    std::mutex fill_mutex_;
};

struct SceneContext {
    const SceneSpec* scene = nullptr;
    const VisibilityTable* table = nullptr;
    const ViewpointLattice* lattice = nullptr;
    RenderedSceneViews* views = nullptr;
    int scene_index = -1;
};

// The viewpoint-optimization MDP over one scene. Each instance is owned by a
// single rollout worker; scenes, tables and view caches are shared read-only.
class Environment {
  public:
    explicit Environment(RewardParams params, int n_points = 256);

    // uniform start viewpoint over the 180 lattice indices
    std::pair<EnvState, Observation> reset(const SceneContext& ctx, std::uint64_t seed);
    // fixed start viewpoint (trajectory replay and fixtures)
    std::pair<EnvState, Observation> reset_at(const SceneContext& ctx, ViewpointIndex vp, std::uint64_t seed);

    struct StepResult {
        EnvState state;
        Observation obs;
        double reward = 0.0;
        bool done = false;
        double psi = 0.0;  // raw table visibility at the resulting viewpoint
    };

    // Grasp terminates the episode; reaching max_steps terminates with
    // Timeout. Stepping a finished episode is a contract violation.
    StepResult step(Action a);

    const EnvState& state() const { return state_; }
    const SceneContext& context() const { return ctx_; }
    const RewardParams& params() const { return params_; }
    int n_points() const { return n_points_; }

    double psi_at(ViewpointIndex vp) const;      // raw table entry for the target
    double reward_psi(ViewpointIndex vp) const;  // grid-snapped reward channel

    Observation observe();  // sample a fresh observation of the current state

  private:
    std::pair<EnvState, Observation> reset_bound(const SceneContext& ctx, ViewpointIndex vp);

    RewardParams params_;
    int n_points_;
    SceneContext ctx_;
    EnvState state_;
    Rng rng_;
    bool bound_ = false;
};

}  // namespace viewopt
