#include "viewopt/camera.hpp"

namespace viewopt {

ViewpointLattice build_viewpoint_lattice(double radius, const CameraIntrinsics& intrinsics) {
    if (radius <= 0.0) throw std::invalid_argument("lattice radius must be positive");
    intrinsics.validate();

    ViewpointLattice lattice;
    lattice.radius = radius;
    lattice.intrinsics = intrinsics;
    for (int e = 0; e < kElevationSteps; ++e) {
        double el = deg_to_rad(kElevationsDeg[static_cast<std::size_t>(e)]);
        for (int a = 0; a < kAzimuthSteps; ++a) {
            double az = deg_to_rad(10.0 * a);
            CameraPose pose;
            pose.position = {radius * std::cos(el) * std::cos(az), radius * std::cos(el) * std::sin(az),
                             radius * std::sin(el)};
            pose.forward = normalized(-pose.position);  // optical axis through the center
            // world +z projected onto the image plane; never degenerate below 90 deg elevation
            Vec3 up_w{0.0, 0.0, 1.0};
            Vec3 up = normalized(up_w - pose.forward * dot(up_w, pose.forward));
            pose.down = -up;
            pose.right = cross(pose.down, pose.forward);
            lattice.poses[static_cast<std::size_t>(ViewpointIndex{a, e}.flat())] = pose;
        }
    }
    return lattice;
}

}  // namespace viewopt
