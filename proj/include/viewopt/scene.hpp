#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "viewopt/camera.hpp"
#include "viewopt/primitives.hpp"

namespace viewopt {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parametric clutter on the table plane with one designated grasping target.
struct SceneSpec {
    std::vector<Primitive> primitives;
    int target_id = 0;
    std::uint64_t seed = 0;
    double table_extent = 0.0;  // placement disk radius, meters

    const Primitive& target() const {
        for (const auto& p : primitives)
            if (p.object_id == target_id) return p;
        throw std::logic_error("scene: target_id not present");
    }

    void validate() const;
};

// psi per (object, viewpoint): visible pixel count over amodal pixel count.
class VisibilityTable {
  public:
    VisibilityTable() = default;

    void add_object(int object_id) {
        ids_.push_back(object_id);
        rows_.emplace_back();
        rows_.back().fill(0.0);
    }

    double psi(int object_id, ViewpointIndex vp) const { return row(object_id)[static_cast<std::size_t>(vp.flat())]; }
    void set_psi(int object_id, ViewpointIndex vp, double value) {
        row(object_id)[static_cast<std::size_t>(vp.flat())] = value;
    }

    double mean_psi(int object_id) const {
        const auto& r = row(object_id);
        double s = 0.0;
        for (double v : r) s += v;
        return s / kLatticeSize;
    }

    double max_psi(int object_id) const {
        const auto& r = row(object_id);
        double m = 0.0;
        for (double v : r) m = std::max(m, v);
        return m;
    }

    const std::vector<int>& object_ids() const { return ids_; }
    const std::array<double, kLatticeSize>& row(int object_id) const {
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (ids_[i] == object_id) return rows_[i];
        throw std::out_of_range("visibility table: unknown object_id");
    }

    bool operator==(const VisibilityTable& o) const { return ids_ == o.ids_ && rows_ == o.rows_; }

  private:
    std::array<double, kLatticeSize>& row(int object_id) {
        for (std::size_t i = 0; i < ids_.size(); ++i)
            if (ids_[i] == object_id) return rows_[i];
        throw std::out_of_range("visibility table: unknown object_id");
    }

    std::vector<int> ids_;
    std::vector<std::array<double, kLatticeSize>> rows_;
};

struct SizeRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct GeneratorConfig {
    int min_objects = 5;
    int max_objects = 8;
    double table_extent = 0.13;
    SizeRange box_side{0.035, 0.075};
    SizeRange box_height{0.07, 0.2};
    SizeRange cylinder_radius{0.018, 0.04};
    SizeRange cylinder_height{0.08, 0.22};
    SizeRange sphere_radius{0.02, 0.036};
    // target must be occluded somewhere but reachable: mean psi within the
    // band, max psi above the success threshold, and at most
    // max_success_fraction of the 180 viewpoints already above it (otherwise
    // the task degenerates to grasping blind)
    double target_mean_psi_lo = 0.2;
    double target_mean_psi_hi = 0.9;
    double success_psi = 0.9;
    double max_success_fraction = 0.25;
    int max_layout_attempts = 400;
    int max_placement_attempts = 200;

    void validate() const {
        if (min_objects < 3 || max_objects > 8 || min_objects > max_objects)
            throw std::invalid_argument("generator: object count range must lie within [3, 8]");
        for (const auto& r : {box_side, box_height, cylinder_radius, cylinder_height, sphere_radius})
            if (r.lo <= 0.0 || r.hi < r.lo) throw std::invalid_argument("generator: size ranges must be positive");
        if (table_extent <= 0.0) throw std::invalid_argument("generator: table extent must be positive");
        if (max_layout_attempts < 1) throw std::invalid_argument("generator: attempt budget must be positive");
    }
};

// Deterministic in seed. Rejection-samples layouts until one admits a target
// whose mean visibility sits in the configured band and whose best viewpoint
// clears the success threshold. The accepted layout's visibility table is
// already computed during selection; pass out_table to keep it.
SceneSpec generate_scene(std::uint64_t seed, const GeneratorConfig& config, const ViewpointLattice& lattice,
                         VisibilityTable* out_table = nullptr);

// psi for every object at every viewpoint; 0 where the amodal mask is empty.
// Throws if some object is outside the frustum of every lattice viewpoint.
VisibilityTable compute_visibility_table(const SceneSpec& scene, const ViewpointLattice& lattice);

}  // namespace viewopt
