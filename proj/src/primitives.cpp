#include "viewopt/primitives.hpp"

#include <algorithm>
#include <limits>

namespace viewopt {

const char* to_string(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::Box: return "box";
        case PrimitiveKind::Cylinder: return "cylinder";
        case PrimitiveKind::Sphere: return "sphere";
    }
    return "?";
}

PrimitiveKind primitive_kind_from_string(const std::string& s) {
    if (s == "box") return PrimitiveKind::Box;
    if (s == "cylinder") return PrimitiveKind::Cylinder;
    if (s == "sphere") return PrimitiveKind::Sphere;
    throw std::invalid_argument("unknown primitive kind: " + s);
}

namespace {

std::optional<double> hit_sphere(double r, const Vec3& o, const Vec3& d) {
    double b = dot(o, d);
    double c = dot(o, o) - r * r;
    double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    double s = std::sqrt(disc);
    double t = -b - s;
    if (t > 0.0) return t;
    t = -b + s;
    if (t > 0.0) return t;
    return std::nullopt;
}

std::optional<double> hit_box(const Vec3& half, const Vec3& o, const Vec3& d) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const double os[3] = {o.x, o.y, o.z};
    const double ds[3] = {d.x, d.y, d.z};
    const double hs[3] = {half.x, half.y, half.z};
    for (int i = 0; i < 3; ++i) {
        if (ds[i] == 0.0) {
            if (os[i] < -hs[i] || os[i] > hs[i]) return std::nullopt;
            continue;
        }
        double inv = 1.0 / ds[i];
        double t0 = (-hs[i] - os[i]) * inv;
        double t1 = (hs[i] - os[i]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmin > 0.0) return tmin;
    if (tmax > 0.0) return tmax;
    return std::nullopt;
}

std::optional<double> hit_cylinder(double r, double half_h, const Vec3& o, const Vec3& d) {
    double best = std::numeric_limits<double>::infinity();
    // side wall
    double a = d.x * d.x + d.y * d.y;
    if (a > 0.0) {
        double b = o.x * d.x + o.y * d.y;
        double c = o.x * o.x + o.y * o.y - r * r;
        double disc = b * b - a * c;
        if (disc >= 0.0) {
            double s = std::sqrt(disc);
            for (double t : {(-b - s) / a, (-b + s) / a}) {
                if (t > 0.0 && t < best) {
                    double z = o.z + t * d.z;
                    if (z >= -half_h && z <= half_h) best = t;
                }
            }
        }
    }
    // caps
    if (d.z != 0.0) {
        for (double zc : {-half_h, half_h}) {
            double t = (zc - o.z) / d.z;
            if (t > 0.0 && t < best) {
                double x = o.x + t * d.x;
                double y = o.y + t * d.y;
                if (x * x + y * y <= r * r) best = t;
            }
        }
    }
    if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
    return best;
}

}  // namespace

PreparedPrimitive prepare_primitive(const Primitive& primitive, const Vec3& ray_origin) {
    // into the local frame: translate, then rotate by -yaw about z
    PreparedPrimitive prep;
    prep.primitive = &primitive;
    prep.cs = std::cos(primitive.yaw);
    prep.sn = std::sin(primitive.yaw);
    Vec3 p = ray_origin - primitive.position;
    prep.local_origin = {prep.cs * p.x + prep.sn * p.y, -prep.sn * p.x + prep.cs * p.y, p.z};
    return prep;
}

double ray_cast_prepared(const PreparedPrimitive& prep, const Vec3& dir_world) {
    Vec3 d{prep.cs * dir_world.x + prep.sn * dir_world.y, -prep.sn * dir_world.x + prep.cs * dir_world.y, dir_world.z};
    const Primitive& primitive = *prep.primitive;
    std::optional<double> t;
    switch (primitive.kind) {
        case PrimitiveKind::Sphere: t = hit_sphere(primitive.dims.x, prep.local_origin, d); break;
        case PrimitiveKind::Box: t = hit_box(primitive.dims * 0.5, prep.local_origin, d); break;
        case PrimitiveKind::Cylinder: t = hit_cylinder(primitive.dims.x, 0.5 * primitive.dims.z, prep.local_origin, d); break;
    }
    return t ? *t : 0.0;
}

std::optional<double> ray_cast(const Primitive& primitive, const Ray& ray) {
    double t = ray_cast_prepared(prepare_primitive(primitive, ray.origin), ray.dir);
    if (t > 0.0) return t;
    return std::nullopt;
}

}  // namespace viewopt
