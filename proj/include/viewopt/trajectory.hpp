#pragma once

#include <filesystem>
#include <vector>

#include "viewopt/env.hpp"

namespace viewopt {

struct TrajectoryStep {
    int t = 0;
    ViewpointIndex vp;  // viewpoint after the action
    Action action = Action::Left;
    double psi = 0.0;  // table visibility at vp
    double reward = 0.0;
    bool done = false;
};

// One episode as replayable rows. The header records the scene and start
// viewpoint so the episode can be re-executed against the dataset.
struct Trajectory {
    int scene_index = 0;
    ViewpointIndex start;
    std::vector<TrajectoryStep> steps;
};

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace viewopt
