#pragma once

#include <array>
#include <stdexcept>

#include "viewopt/geometry.hpp"

namespace viewopt {

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const {
        if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("intrinsics: focal lengths must be positive");
        if (width < 16 || height < 16) throw std::invalid_argument("intrinsics: raster must be at least 16x16");
        if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
            throw std::invalid_argument("intrinsics: principal point outside raster");
    }

    // Desk-scale default: 160x120 raster, ~67 deg horizontal field of view.
    static CameraIntrinsics make_default() { return {120.0, 120.0, 80.0, 60.0, 160, 120}; }

    // Same field of view at scaled resolution.
    CameraIntrinsics scaled(double s) const {
        return {fx * s, fy * s, cx * s, cy * s, static_cast<int>(width * s), static_cast<int>(height * s)};
    }
};

// Position on the 36x5 viewing hemisphere grid. Azimuth wraps modulo 36,
// elevation is clamped by the callers that move it.
struct ViewpointIndex {
    int azimuth_idx = 0;    // [0, 36)
    int elevation_idx = 0;  // [0, 5)

    int flat() const { return elevation_idx * 36 + azimuth_idx; }
    static ViewpointIndex from_flat(int f) { return {f % 36, f / 36}; }

    bool operator==(const ViewpointIndex& o) const {
        return azimuth_idx == o.azimuth_idx && elevation_idx == o.elevation_idx;
    }
};

// Rigid camera pose. Rows of (right, down, forward) form the world-to-camera
// rotation; camera convention is x right, y down, z forward.
struct CameraPose {
    Vec3 position;
    Vec3 right;
    Vec3 down;
    Vec3 forward;

    Vec3 world_to_camera(const Vec3& p) const {
        Vec3 d = p - position;
        return {dot(right, d), dot(down, d), dot(forward, d)};
    }

    // Ray through the center of pixel (u, v), unit direction in world frame.
    Ray pixel_ray(const CameraIntrinsics& intr, int u, int v) const {
        double xc = (u + 0.5 - intr.cx) / intr.fx;
        double yc = (v + 0.5 - intr.cy) / intr.fy;
        Vec3 dir_world = right * xc + down * yc + forward;
        return {position, normalized(dir_world)};
    }
};

inline constexpr int kAzimuthSteps = 36;
inline constexpr int kElevationSteps = 5;
inline constexpr int kLatticeSize = kAzimuthSteps * kElevationSteps;
inline constexpr std::array<double, kElevationSteps> kElevationsDeg = {30.0, 40.0, 50.0, 60.0, 70.0};

// The 180 camera poses on the upper hemisphere: 10 degree azimuth steps,
// elevations 30..70 degrees, all looking at the lattice center (origin) with
// world +z projected onto the image plane as the up direction.
struct ViewpointLattice {
    double radius = 0.0;
    CameraIntrinsics intrinsics;
    std::array<CameraPose, kLatticeSize> poses;

    const CameraPose& pose(ViewpointIndex vp) const { return poses[vp.flat()]; }
};

ViewpointLattice build_viewpoint_lattice(double radius, const CameraIntrinsics& intrinsics);

}  // namespace viewopt
