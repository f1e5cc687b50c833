#include "viewopt/oracle.hpp"

#include <queue>

namespace viewopt {

std::array<int, kLatticeSize> goal_distances(const VisibilityTable& table, int target_id, double delta) {
    std::array<int, kLatticeSize> dist;
    dist.fill(kUnreachable);
    std::queue<int> frontier;
    for (int f = 0; f < kLatticeSize; ++f) {
        if (table.psi(target_id, ViewpointIndex::from_flat(f)) > delta) {
            dist[static_cast<std::size_t>(f)] = 0;
            frontier.push(f);
        }
    }
    constexpr Action kMotions[4] = {Action::Left, Action::Right, Action::Up, Action::Down};
    while (!frontier.empty()) {
        int f = frontier.front();
        frontier.pop();
        ViewpointIndex vp = ViewpointIndex::from_flat(f);
        for (Action a : kMotions) {
            ViewpointIndex nb = move(vp, a);
            int nf = nb.flat();
            if (nf == f) continue;  // clamped
            if (dist[static_cast<std::size_t>(nf)] > dist[static_cast<std::size_t>(f)] + 1) {
                dist[static_cast<std::size_t>(nf)] = dist[static_cast<std::size_t>(f)] + 1;
                frontier.push(nf);
            }
        }
    }
    return dist;
}

Action oracle_policy(const VisibilityTable& table, int target_id, ViewpointIndex vp, double delta) {
    if (table.psi(target_id, vp) > delta) return Action::Grasp;
    auto dist = goal_distances(table, target_id, delta);
    int here = dist[static_cast<std::size_t>(vp.flat())];
    if (here >= kUnreachable)
        throw NoSuccessViewpointError("oracle: no viewpoint with psi above " + std::to_string(delta));
    constexpr Action kMotions[4] = {Action::Left, Action::Right, Action::Up, Action::Down};
    for (Action a : kMotions) {
        ViewpointIndex nb = move(vp, a);
        if (nb == vp) continue;
        if (dist[static_cast<std::size_t>(nb.flat())] == here - 1) return a;
    }
    throw std::logic_error("oracle: BFS distance field is inconsistent");
}

}  // namespace viewopt
