#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_render.hpp"
#include "viewopt/env.hpp"
#include "viewopt/render.hpp"

using namespace viewopt;

namespace {

SceneSpec three_object_fixture() {
    SceneSpec s;
    s.table_extent = 0.14;
    s.primitives = {
        {PrimitiveKind::Box, {0.06, 0.05, 0.12}, {0.05, 0.01, 0.06}, 0.4, 1},
        {PrimitiveKind::Sphere, {0.03, 0.03, 0.03}, {-0.05, -0.02, 0.03}, 0.0, 2},
        {PrimitiveKind::Cylinder, {0.025, 0.025, 0.11}, {-0.01, 0.08, 0.055}, 1.1, 3},
    };
    s.target_id = 2;
    return s;
}

}  // namespace

TEST_CASE("lattice has 180 poses on the sphere looking at the center") {
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    CHECK(lattice.poses.size() == 180);
    for (int f = 0; f < kLatticeSize; ++f) {
        const CameraPose& p = lattice.poses[static_cast<std::size_t>(f)];
        CHECK(norm(p.position) == doctest::Approx(0.5).epsilon(1e-12));
        // optical axis passes through the origin
        Vec3 to_center = normalized(-p.position);
        CHECK(dot(to_center, p.forward) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("lattice index (0,0) sits at azimuth 0, elevation 30") {
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    const CameraPose& p = lattice.pose({0, 0});
    CHECK(p.position.x == doctest::Approx(0.5 * std::cos(deg_to_rad(30.0))));
    CHECK(p.position.y == doctest::Approx(0.0));
    CHECK(p.position.z == doctest::Approx(0.5 * std::sin(deg_to_rad(30.0))));
}

TEST_CASE("lattice index (18,0) mirrors (0,0) through the vertical plane") {
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    const CameraPose& a = lattice.pose({0, 0});
    const CameraPose& b = lattice.pose({18, 0});
    CHECK(b.position.x == doctest::Approx(-a.position.x).epsilon(1e-12));
    CHECK(std::abs(b.position.y) < 1e-12);
    CHECK(b.position.z == doctest::Approx(a.position.z).epsilon(1e-12));
}

TEST_CASE("lattice closure: 36 azimuth increments return the identical index") {
    ViewpointIndex vp{7, 2};
    ViewpointIndex cur = vp;
    for (int i = 0; i < 36; ++i) cur = move(cur, Action::Right);
    CHECK(cur == vp);
}

TEST_CASE("ray_cast sphere examples") {
    Primitive sphere{PrimitiveKind::Sphere, {1.0, 1.0, 1.0}, {0, 0, 0}, 0.0, 1};
    Ray down{{0, 0, 3}, {0, 0, -1}};
    auto t = ray_cast(sphere, down);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(2.0).epsilon(1e-12));

    sphere.position = {5, 0, 0};
    CHECK(!ray_cast(sphere, down).has_value());
}

TEST_CASE("ray_cast unit box slab example") {
    Primitive box{PrimitiveKind::Box, {1.0, 1.0, 1.0}, {0, 0, 0}, 0.0, 1};
    auto t = ray_cast(box, {{0, 0, 3}, {0, 0, -1}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("ray_cast cylinder side and cap") {
    Primitive cyl{PrimitiveKind::Cylinder, {0.5, 0.5, 2.0}, {0, 0, 0}, 0.0, 1};
    auto side = ray_cast(cyl, {{3, 0, 0}, {-1, 0, 0}});
    REQUIRE(side.has_value());
    CHECK(*side == doctest::Approx(2.5).epsilon(1e-12));
    auto cap = ray_cast(cyl, {{0.2, 0, 4}, {0, 0, -1}});
    REQUIRE(cap.has_value());
    CHECK(*cap == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(!ray_cast(cyl, {{3, 0, 0}, {1, 0, 0}}).has_value());
}

TEST_CASE("ray_cast respects yaw") {
    // square box rotated 45 degrees: a ray along +x hits the corner-on face nearer
    Primitive box{PrimitiveKind::Box, {0.2, 0.2, 0.2}, {0, 0, 0}, kPi / 4.0, 1};
    auto t = ray_cast(box, {{-1, 0, 0}, {1, 0, 0}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(1.0 - 0.1 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("single centered sphere: visible mask equals amodal mask everywhere") {
    SceneSpec s;
    s.table_extent = 0.14;
    s.primitives = {{PrimitiveKind::Sphere, {0.04, 0.04, 0.04}, {0, 0, 0.04}, 0.0, 1},
                    {PrimitiveKind::Sphere, {0.02, 0.02, 0.02}, {0.09, 0, 0.02}, 0.0, 2},
                    {PrimitiveKind::Sphere, {0.02, 0.02, 0.02}, {-0.09, 0, 0.02}, 0.0, 3}};
    s.target_id = 1;
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    // spheres are far apart; none occludes the center one from a top view
    RenderedView view = render_view(s, {0, 4}, lattice);
    long vis = view.visible_pixel_count(1);
    long amo = view.amodal_pixel_count(1);
    CHECK(vis == amo);
    CHECK(vis > 0);
}

TEST_CASE("coaxial spheres: the small one behind is fully occluded") {
    auto intr = CameraIntrinsics::make_default();
    auto lattice = build_viewpoint_lattice(0.5, intr);
    const CameraPose& pose = lattice.pose({0, 0});
    // place a small sphere exactly behind a larger one along the optical axis
    Vec3 axis = normalized(-pose.position);
    Vec3 front = pose.position + axis * 0.3;
    Vec3 back = pose.position + axis * 0.42;
    SceneSpec s;
    s.table_extent = 1.0;  // fixture spheres float off-center; keep them on the table disk
    s.primitives = {{PrimitiveKind::Sphere, {0.05, 0.05, 0.05}, front, 0.0, 1},
                    {PrimitiveKind::Sphere, {0.012, 0.012, 0.012}, back, 0.0, 2},
                    {PrimitiveKind::Sphere, {0.015, 0.015, 0.015}, {0.0, 0.1, 0.015}, 0.0, 3}};
    s.target_id = 2;
    RenderedView view = render_view(s, {0, 0}, lattice);
    CHECK(view.visible_pixel_count(2) == 0);
    CHECK(view.amodal_pixel_count(2) > 0);

    VisibilityTable table = compute_visibility_table(s, lattice);
    CHECK(table.psi(2, {0, 0}) == 0.0);
}

TEST_CASE("mask invariants on a generated scene: subset, disjoint, occlusion order") {
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default().scaled(0.5));
    GeneratorConfig cfg;
    SceneSpec s = generate_scene(99, cfg, lattice);

    for (int f : {0, 41, 95, 133, 179}) {
        RenderedView view = render_view(s, ViewpointIndex::from_flat(f), lattice);
        const int w = view.depth.width(), h = view.depth.height();
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                int label = view.visible_labels.at(x, y);
                if (label != 0) {
                    // visible implies amodal, and the labelled object is the nearest hit
                    CHECK(view.in_amodal(label, x, y));
                    auto order = view.occlusion_order_at(x, y);
                    REQUIRE(!order.empty());
                    CHECK(order.front() == label);
                    float t_label = view.amodal_for(label).at(x, y);
                    for (int other : order)
                        CHECK(t_label <= view.amodal_for(other).at(x, y));
                }
            }
        }
    }
}

TEST_CASE("renderer matches the naive per-pixel oracle bit-exactly on a fixture") {
    auto intr = CameraIntrinsics::make_default();
    auto lattice = build_viewpoint_lattice(0.5, intr);
    SceneSpec s = three_object_fixture();
    VisibilityTable table = compute_visibility_table(s, lattice);

    for (int f : {0, 17, 58, 91, 140, 179}) {
        ViewpointIndex vp = ViewpointIndex::from_flat(f);
        auto counts = oracle_render::count_view(s, vp.azimuth_idx, vp.elevation_idx, 0.5, intr);
        RenderedView view = render_view(s, vp, lattice);
        for (std::size_t i = 0; i < s.primitives.size(); ++i) {
            int id = s.primitives[i].object_id;
            CHECK(view.visible_pixel_count(id) == counts.visible[i]);
            CHECK(view.amodal_pixel_count(id) == counts.amodal[i]);
            // bitwise equality of the stored ratio
            CHECK(table.psi(id, vp) == oracle_render::psi_from_counts(counts, i));
        }
    }
}

TEST_CASE("halving the raster shifts psi by less than 0.05 in the mean, exactly where masks resolve") {
    // Per-entry the bound can only hold where the amodal mask is actually
    // resolved at the halved raster; one-pixel slivers alias. The mean over
    // the lattice is what the reward channel sees and must stay put.
    auto intr = CameraIntrinsics::make_default();
    auto full = build_viewpoint_lattice(0.5, intr);
    auto half = build_viewpoint_lattice(0.5, intr.scaled(0.5));
    GeneratorConfig cfg;
    for (std::uint64_t seed : {11ull, 12ull}) {
        VisibilityTable table_full;
        SceneSpec s = generate_scene(seed, cfg, full, &table_full);
        VisibilityTable table_half = compute_visibility_table(s, half);
        for (const auto& p : s.primitives) {
            double sum = 0.0;
            for (int f = 0; f < kLatticeSize; ++f) {
                ViewpointIndex vp = ViewpointIndex::from_flat(f);
                double d = std::abs(table_full.psi(p.object_id, vp) - table_half.psi(p.object_id, vp));
                sum += d;
                RenderedView hv = render_view(s, vp, half);
                if (hv.amodal_pixel_count(p.object_id) >= 300) CHECK(d < 0.05);
            }
            CHECK(sum / kLatticeSize < 0.05);
        }
    }
}

TEST_CASE("render_view rejects an empty scene") {
    SceneSpec s;
    s.table_extent = 0.1;
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    CHECK_THROWS_AS(render_view(s, {0, 0}, lattice), std::invalid_argument);
}

TEST_CASE("an object outside every frustum is reported") {
    SceneSpec s;
    s.table_extent = 5.0;
    // the third sphere hovers far above the hemisphere, behind every camera
    s.primitives = {{PrimitiveKind::Sphere, {0.03, 0.03, 0.03}, {0, 0, 0.03}, 0.0, 1},
                    {PrimitiveKind::Sphere, {0.03, 0.03, 0.03}, {0.15, 0, 0.03}, 0.0, 2},
                    {PrimitiveKind::Sphere, {0.01, 0.01, 0.01}, {0.1, 0.1, 5.0}, 0.0, 3}};
    s.target_id = 1;
    auto lattice = build_viewpoint_lattice(0.5, CameraIntrinsics::make_default());
    CHECK_THROWS_WITH_AS(compute_visibility_table(s, lattice),
                         doctest::Contains("outside every view frustum"), std::runtime_error);
}
