#pragma once

#include <cstdint>
#include <vector>

#include "viewopt/camera.hpp"
#include "viewopt/raster.hpp"
#include "viewopt/scene.hpp"

namespace viewopt {

// Depth plus visible instance labels for one viewpoint. Depth 0 means no hit;
// the table plane renders as label 0 but contributes depth.
struct DepthLabelView {
    Raster<float> depth;
    Raster<std::uint8_t> labels;
};

// Full per-view render: z-buffer result plus one amodal depth raster per
// object (the object rendered alone from the same pose). A pixel is in the
// amodal mask of object c exactly where amodal_depth[c] > 0, so the per-pixel
// occlusion order is recoverable by sorting objects on amodal depth.
struct RenderedView {
    Raster<float> depth;
    Raster<std::uint8_t> visible_labels;
    std::vector<int> object_ids;
    std::vector<Raster<float>> amodal_depth;  // parallel to object_ids

    const Raster<float>& amodal_for(int object_id) const;
    bool in_amodal(int object_id, int x, int y) const { return amodal_for(object_id).at(x, y) > 0.0f; }

    long visible_pixel_count(int object_id) const;
    long amodal_pixel_count(int object_id) const;

    // object ids hit at this pixel, nearest first
    std::vector<int> occlusion_order_at(int x, int y) const;
};

RenderedView render_view(const SceneSpec& scene, ViewpointIndex vp, const ViewpointLattice& lattice);

// z-buffer pass only; what the environment serves as raw sensor data.
DepthLabelView render_depth_labels(const SceneSpec& scene, ViewpointIndex vp, const ViewpointLattice& lattice);

}  // namespace viewopt
