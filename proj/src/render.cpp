#include "viewopt/render.hpp"

#include <algorithm>
#include <stdexcept>

namespace viewopt {

namespace {

// z=0 disk of radius `extent`; 0 means miss
double table_hit(const Ray& ray, double extent) {
    if (ray.dir.z >= 0.0) return 0.0;
    double t = -ray.origin.z / ray.dir.z;
    if (t <= 0.0) return 0.0;
    double x = ray.origin.x + t * ray.dir.x;
    double y = ray.origin.y + t * ray.dir.y;
    if (x * x + y * y <= extent * extent) return t;
    return 0.0;
}

// Shared per-pixel kernel for the z-buffer and the visibility counters, so
// both always agree on hit distances and label decisions.
// visit(x, y, object_hits, label, depth): object_hits[i] is the hit distance
// of primitives[i] (0 = miss), label the visible object_id (0 = background).
template <typename Visitor>
void scan_view(const SceneSpec& scene, ViewpointIndex vp, const ViewpointLattice& lattice, Visitor&& visit) {
    const CameraIntrinsics& intr = lattice.intrinsics;
    const CameraPose& pose = lattice.pose(vp);
    const std::size_t n = scene.primitives.size();
    std::vector<double> hits(n);
    std::vector<PreparedPrimitive> prepared;
    prepared.reserve(n);
    for (const auto& p : scene.primitives) prepared.push_back(prepare_primitive(p, pose.position));

    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Ray ray = pose.pixel_ray(intr, x, y);
            double best = 0.0;
            int label = 0;
            for (std::size_t i = 0; i < n; ++i) {
                hits[i] = ray_cast_prepared(prepared[i], ray.dir);
                if (hits[i] > 0.0 && (best == 0.0 || hits[i] < best)) {
                    best = hits[i];
                    label = scene.primitives[i].object_id;
                }
            }
            double tt = table_hit(ray, scene.table_extent);
            if (tt > 0.0 && (best == 0.0 || tt < best)) {
                best = tt;
                label = 0;
            }
            visit(x, y, hits, label, best);
        }
    }
}

}  // namespace

const Raster<float>& RenderedView::amodal_for(int object_id) const {
    for (std::size_t i = 0; i < object_ids.size(); ++i)
        if (object_ids[i] == object_id) return amodal_depth[i];
    throw std::out_of_range("rendered view: unknown object_id");
}

long RenderedView::visible_pixel_count(int object_id) const {
    long c = 0;
    for (std::uint8_t v : visible_labels.data())
        if (v == object_id) ++c;
    return c;
}

long RenderedView::amodal_pixel_count(int object_id) const {
    long c = 0;
    for (float v : amodal_for(object_id).data())
        if (v > 0.0f) ++c;
    return c;
}

std::vector<int> RenderedView::occlusion_order_at(int x, int y) const {
    std::vector<std::pair<float, int>> hits;
    for (std::size_t i = 0; i < object_ids.size(); ++i) {
        float t = amodal_depth[i].at(x, y);
        if (t > 0.0f) hits.emplace_back(t, object_ids[i]);
    }
    std::sort(hits.begin(), hits.end());
    std::vector<int> order;
    order.reserve(hits.size());
    for (auto& [t, id] : hits) order.push_back(id);
    return order;
}

RenderedView render_view(const SceneSpec& scene, ViewpointIndex vp, const ViewpointLattice& lattice) {
    if (scene.primitives.empty()) throw std::invalid_argument("render_view: scene has no objects");
    const CameraIntrinsics& intr = lattice.intrinsics;

    RenderedView view;
    view.depth = Raster<float>(intr.width, intr.height);
    view.visible_labels = Raster<std::uint8_t>(intr.width, intr.height);
    for (const auto& p : scene.primitives) {
        view.object_ids.push_back(p.object_id);
        view.amodal_depth.emplace_back(intr.width, intr.height);
    }

    scan_view(scene, vp, lattice, [&](int x, int y, const std::vector<double>& hits, int label, double depth) {
        view.depth.at(x, y) = static_cast<float>(depth);
        view.visible_labels.at(x, y) = static_cast<std::uint8_t>(label);
        for (std::size_t i = 0; i < hits.size(); ++i) view.amodal_depth[i].at(x, y) = static_cast<float>(hits[i]);
    });
    return view;
}

DepthLabelView render_depth_labels(const SceneSpec& scene, ViewpointIndex vp, const ViewpointLattice& lattice) {
    if (scene.primitives.empty()) throw std::invalid_argument("render_depth_labels: scene has no objects");
    const CameraIntrinsics& intr = lattice.intrinsics;
    DepthLabelView view{Raster<float>(intr.width, intr.height), Raster<std::uint8_t>(intr.width, intr.height)};
    scan_view(scene, vp, lattice, [&](int x, int y, const std::vector<double>&, int label, double depth) {
        view.depth.at(x, y) = static_cast<float>(depth);
        view.labels.at(x, y) = static_cast<std::uint8_t>(label);
    });
    return view;
}

VisibilityTable compute_visibility_table(const SceneSpec& scene, const ViewpointLattice& lattice) {
    scene.validate();
    const std::size_t n = scene.primitives.size();

    VisibilityTable table;
    for (const auto& p : scene.primitives) table.add_object(p.object_id);

    std::vector<bool> seen(n, false);
    std::vector<long> visible(n), amodal(n);
    for (int flat = 0; flat < kLatticeSize; ++flat) {
        ViewpointIndex vp = ViewpointIndex::from_flat(flat);
        std::fill(visible.begin(), visible.end(), 0L);
        std::fill(amodal.begin(), amodal.end(), 0L);
        scan_view(scene, vp, lattice, [&](int, int, const std::vector<double>& hits, int label, double) {
            for (std::size_t i = 0; i < n; ++i)
                if (hits[i] > 0.0) ++amodal[i];
            if (label != 0) {
                for (std::size_t i = 0; i < n; ++i)
                    if (scene.primitives[i].object_id == label) {
                        ++visible[i];
                        break;
                    }
            }
        });
        for (std::size_t i = 0; i < n; ++i) {
            double psi = amodal[i] > 0 ? static_cast<double>(visible[i]) / static_cast<double>(amodal[i]) : 0.0;
            table.set_psi(scene.primitives[i].object_id, vp, psi);
            if (amodal[i] > 0) seen[i] = true;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i])
            throw std::runtime_error("object " + std::to_string(scene.primitives[i].object_id) +
                                     " lies outside every view frustum of the lattice");
    return table;
}

}  // namespace viewopt
