#include "viewopt/scene.hpp"

#include <cmath>

#include "viewopt/render.hpp"
#include "viewopt/rng.hpp"

namespace viewopt {

void SceneSpec::validate() const {
    if (primitives.size() < 3 || primitives.size() > 8)
        throw std::invalid_argument("scene: object count must lie within [3, 8]");
    if (table_extent <= 0.0) throw std::invalid_argument("scene: table extent must be positive");
    bool target_found = false;
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        const Primitive& a = primitives[i];
        a.validate();
        if (a.object_id == target_id) target_found = true;
        double dx = a.position.x, dy = a.position.y;
        if (std::sqrt(dx * dx + dy * dy) + a.footprint_radius() > table_extent + 1e-9)
            throw std::invalid_argument("scene: object outside the table extent");
        for (std::size_t j = 0; j < i; ++j) {
            const Primitive& b = primitives[j];
            if (a.object_id == b.object_id) throw std::invalid_argument("scene: duplicate object_id");
            double ddx = a.position.x - b.position.x;
            double ddy = a.position.y - b.position.y;
            if (std::sqrt(ddx * ddx + ddy * ddy) < a.footprint_radius() + b.footprint_radius())
                throw std::invalid_argument("scene: interpenetrating objects");
        }
    }
    if (!target_found) throw std::invalid_argument("scene: target_id not among objects");
}

namespace {

Primitive sample_primitive(Rng& rng, const GeneratorConfig& cfg, int object_id) {
    Primitive p;
    p.object_id = object_id;
    switch (rng.next_below(3)) {
        case 0: {
            p.kind = PrimitiveKind::Box;
            p.dims = {rng.uniform(cfg.box_side.lo, cfg.box_side.hi), rng.uniform(cfg.box_side.lo, cfg.box_side.hi),
                      rng.uniform(cfg.box_height.lo, cfg.box_height.hi)};
            break;
        }
        case 1: {
            p.kind = PrimitiveKind::Cylinder;
            double r = rng.uniform(cfg.cylinder_radius.lo, cfg.cylinder_radius.hi);
            p.dims = {r, r, rng.uniform(cfg.cylinder_height.lo, cfg.cylinder_height.hi)};
            break;
        }
        default: {
            p.kind = PrimitiveKind::Sphere;
            double r = rng.uniform(cfg.sphere_radius.lo, cfg.sphere_radius.hi);
            p.dims = {r, r, r};
            break;
        }
    }
    p.yaw = rng.uniform(0.0, 2.0 * kPi);
    return p;
}

// resting pose: bottom face (or tangent point) on z=0
double resting_height(const Primitive& p) {
    return p.kind == PrimitiveKind::Sphere ? p.dims.x : 0.5 * p.dims.z;
}

bool place_objects(Rng& rng, const GeneratorConfig& cfg, std::vector<Primitive>& objects) {
    for (std::size_t i = 0; i < objects.size(); ++i) {
        Primitive& p = objects[i];
        double max_r = cfg.table_extent - p.footprint_radius();
        if (max_r <= 0.0) return false;
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_placement_attempts && !placed; ++attempt) {
            double r = max_r * std::sqrt(rng.next_double());
            double theta = rng.uniform(0.0, 2.0 * kPi);
            p.position = {r * std::cos(theta), r * std::sin(theta), resting_height(p)};
            placed = true;
            for (std::size_t j = 0; j < i; ++j) {
                double dx = p.position.x - objects[j].position.x;
                double dy = p.position.y - objects[j].position.y;
                double min_dist = p.footprint_radius() + objects[j].footprint_radius();
                if (dx * dx + dy * dy < min_dist * min_dist * 1.0201) {  // 1% slack against grazing contact
                    placed = false;
                    break;
                }
            }
        }
        if (!placed) return false;
    }
    return true;
}

}  // namespace

SceneSpec generate_scene(std::uint64_t seed, const GeneratorConfig& cfg, const ViewpointLattice& lattice,
                         VisibilityTable* out_table) {
    cfg.validate();
    Rng rng = Rng::fork(seed, 0x5ce9e);

    // cheap pre-screen at reduced resolution before the exact full-res check;
    // clamped so the coarse raster stays at least 16 pixels on a side
    double scale = std::max({0.25, 16.0 / lattice.intrinsics.width, 16.0 / lattice.intrinsics.height});
    const bool prefilter = scale < 1.0;
    ViewpointLattice coarse;
    if (prefilter) coarse = build_viewpoint_lattice(lattice.radius, lattice.intrinsics.scaled(scale));

    for (int attempt = 0; attempt < cfg.max_layout_attempts; ++attempt) {
        int n = rng.uniform_int(cfg.min_objects, cfg.max_objects);
        std::vector<Primitive> objects;
        objects.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) objects.push_back(sample_primitive(rng, cfg, i + 1));
        if (!place_objects(rng, cfg, objects)) continue;

        SceneSpec scene;
        scene.primitives = std::move(objects);
        scene.seed = seed;
        scene.table_extent = cfg.table_extent;
        scene.target_id = scene.primitives.front().object_id;  // placeholder for validate()

        auto success_fraction = [](const VisibilityTable& t, int id, double threshold) {
            int above = 0;
            for (int f = 0; f < kLatticeSize; ++f)
                if (t.psi(id, ViewpointIndex::from_flat(f)) > threshold) ++above;
            return static_cast<double>(above) / kLatticeSize;
        };

        if (prefilter) {
            VisibilityTable coarse_table = compute_visibility_table(scene, coarse);
            bool plausible = false;
            for (const auto& p : scene.primitives) {
                double mean = coarse_table.mean_psi(p.object_id);
                if (mean >= cfg.target_mean_psi_lo - 0.05 && mean <= cfg.target_mean_psi_hi + 0.05 &&
                    coarse_table.max_psi(p.object_id) > cfg.success_psi - 0.05 &&
                    success_fraction(coarse_table, p.object_id, cfg.success_psi) <= cfg.max_success_fraction + 0.05) {
                    plausible = true;
                    break;
                }
            }
            if (!plausible) continue;
        }

        VisibilityTable table = compute_visibility_table(scene, lattice);
        int best_id = 0;
        double best_mean = 2.0;
        for (const auto& p : scene.primitives) {
            double mean = table.mean_psi(p.object_id);
            if (mean >= cfg.target_mean_psi_lo && mean <= cfg.target_mean_psi_hi &&
                table.max_psi(p.object_id) > cfg.success_psi &&
                success_fraction(table, p.object_id, cfg.success_psi) <= cfg.max_success_fraction && mean < best_mean) {
                best_id = p.object_id;
                best_mean = mean;
            }
        }
        if (best_id == 0) continue;

        // the most occluded qualifying object; keeps the task non-trivial
        scene.target_id = best_id;
        scene.validate();
        if (out_table) *out_table = std::move(table);
        return scene;
    }
    throw GenerationError("scene generation exhausted " + std::to_string(cfg.max_layout_attempts) +
                          " layout attempts; generator bounds are too tight");
}

}  // namespace viewopt
