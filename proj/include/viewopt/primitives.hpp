#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "viewopt/geometry.hpp"

namespace viewopt {

enum class PrimitiveKind { Box, Cylinder, Sphere };

const char* to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& s);

// Analytic solid on the table. Pose is translation plus yaw about world z;
// objects stand upright, so that subset of rigid transforms is sufficient.
//
// dims by kind:
//   Box      full side lengths (x, y, z)
//   Cylinder (radius, radius, height), axis along z
//   Sphere   (radius, radius, radius)
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Box;
    Vec3 dims;
    Vec3 position;
    double yaw = 0.0;
    int object_id = 0;

    void validate() const {
        if (dims.x <= 0.0 || dims.y <= 0.0 || dims.z <= 0.0)
            throw std::invalid_argument("primitive dimensions must be strictly positive");
        if (object_id <= 0) throw std::invalid_argument("object_id must be a positive integer");
    }

    // Radius of the bounding circle of the footprint in the table plane.
    double footprint_radius() const {
        switch (kind) {
            case PrimitiveKind::Box: return 0.5 * std::sqrt(dims.x * dims.x + dims.y * dims.y);
            case PrimitiveKind::Cylinder: return dims.x;
            case PrimitiveKind::Sphere: return dims.x;
        }
        return 0.0;
    }

    double height() const {
        switch (kind) {
            case PrimitiveKind::Box: return dims.z;
            case PrimitiveKind::Cylinder: return dims.z;
            case PrimitiveKind::Sphere: return 2.0 * dims.x;
        }
        return 0.0;
    }
};

// Nearest positive hit distance along a unit-direction ray, or nullopt.
std::optional<double> ray_cast(const Primitive& primitive, const Ray& ray);

// Per-primitive constants hoisted out of the pixel loop: yaw rotation terms
// and the ray origin expressed in the primitive frame. ray_cast goes through
// the same path, so hoisting cannot change any hit distance.
struct PreparedPrimitive {
    const Primitive* primitive = nullptr;
    double cs = 1.0;
    double sn = 0.0;
    Vec3 local_origin;
};

PreparedPrimitive prepare_primitive(const Primitive& primitive, const Vec3& ray_origin);

// hit distance for a world-frame unit direction; 0 means miss
double ray_cast_prepared(const PreparedPrimitive& prepared, const Vec3& dir_world);

}  // namespace viewopt
