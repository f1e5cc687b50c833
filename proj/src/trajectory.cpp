#include "viewopt/trajectory.hpp"

#include <fstream>
#include <sstream>

#include "viewopt/kv.hpp"

namespace viewopt {

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("trajectory: cannot open for writing: " + path.string());
    f << "# scene_index " << traj.scene_index << "\n";
    f << "# start " << traj.start.azimuth_idx << " " << traj.start.elevation_idx << "\n";
    f << "t,azimuth_idx,elevation_idx,action,psi,reward,done\n";
    for (const auto& s : traj.steps) {
        f << s.t << ',' << s.vp.azimuth_idx << ',' << s.vp.elevation_idx << ',' << action_letter(s.action) << ','
          << format_double(s.psi) << ',' << format_double(s.reward) << ',' << (s.done ? 1 : 0) << "\n";
    }
    if (!f) throw std::runtime_error("trajectory: write failed: " + path.string());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("trajectory: cannot open: " + path.string());

    Trajectory traj;
    bool have_scene = false, have_start = false, have_header = false;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tag;
            ss >> tag;
            if (tag == "scene_index") {
                ss >> traj.scene_index;
                have_scene = true;
            } else if (tag == "start") {
                ss >> traj.start.azimuth_idx >> traj.start.elevation_idx;
                have_start = true;
            }
            continue;
        }
        if (!have_header) {
            if (line != "t,azimuth_idx,elevation_idx,action,psi,reward,done")
                throw std::runtime_error("trajectory: unexpected header at " + path.string() + ":" +
                                         std::to_string(lineno));
            have_header = true;
            continue;
        }
        TrajectoryStep s;
        char action = 0;
        int done = 0;
        char c1, c2, c3, c4, c5, c6;
        std::istringstream ss(line);
        if (!(ss >> s.t >> c1 >> s.vp.azimuth_idx >> c2 >> s.vp.elevation_idx >> c3 >> action >> c4 >> s.psi >> c5 >>
              s.reward >> c6 >> done) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',' || c6 != ',')
            throw std::runtime_error("trajectory: malformed row at " + path.string() + ":" + std::to_string(lineno));
        s.action = action_from_letter(action);
        s.done = done != 0;
        traj.steps.push_back(s);
    }
    if (!have_header || traj.steps.empty())
        throw std::runtime_error("trajectory: empty trajectory in " + path.string());
    if (!have_scene || !have_start)
        throw std::runtime_error("trajectory: missing scene_index/start metadata in " + path.string());
    return traj;
}

}  // namespace viewopt
