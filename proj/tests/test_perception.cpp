#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "gsnbv/errors.hpp"
#include "gsnbv/perception.hpp"

using namespace gsnbv;

namespace {

Observation blank_observation(int w, int h) {
    Observation obs;
    obs.width = w;
    obs.height = h;
    obs.depth.assign(static_cast<size_t>(w) * h, -1.0);
    obs.semantic.assign(static_cast<size_t>(w) * h, kNoClass);
    return obs;
}

void set_label(Observation& obs, int u, int v, SemanticClass cls, double depth = 0.5) {
    obs.semantic[obs.idx(u, v)] = static_cast<uint8_t>(cls);
    obs.depth[obs.idx(u, v)] = depth;
}

CameraModel default_camera() {
    return CameraModel::from_hfov(640, 480, 69.0 * std::numbers::pi / 180.0);
}

}  // namespace

TEST_CASE("curves of a 5x5 solid square, dilation 1") {
    Observation obs = blank_observation(16, 16);
    for (int v = 5; v <= 9; ++v)
        for (int u = 5; u <= 9; ++u) set_label(obs, u, v, SemanticClass::Avocado);

    const CurvePair curves = extract_curves(obs, 1);
    CHECK(curves.contour.size() == 16);  // border of the 5x5 block
    for (const PixelCoord& p : curves.contour) {
        CHECK((p.u == 5 || p.u == 9 || p.v == 5 || p.v == 9));
        CHECK((p.u >= 5 && p.u <= 9 && p.v >= 5 && p.v <= 9));
    }
    // Ring one pixel out, minus the four diagonal corners a radius-1 disc
    // cannot reach: 4 sides x 5 pixels.
    CHECK(curves.surrounding.size() == 20);
    for (const PixelCoord& p : curves.surrounding) {
        const bool outside = p.u < 5 || p.u > 9 || p.v < 5 || p.v > 9;
        CHECK(outside);
        CHECK(std::abs(p.u - 7) <= 3);
        CHECK(std::abs(p.v - 7) <= 3);
    }
}

TEST_CASE("empty mask throws") {
    const Observation obs = blank_observation(8, 8);
    CHECK_THROWS_AS(extract_curves(obs, 1), EmptyMask);
}

TEST_CASE("random blobs: surrounding pixels stay near the contour and off the mask") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coord(6, 57);
    std::uniform_int_distribution<int> radius(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        Observation obs = blank_observation(64, 64);
        // Union of a few random squares.
        for (int b = 0; b < 3; ++b) {
            const int cu = coord(rng), cv = coord(rng), r = radius(rng);
            for (int v = cv - r; v <= cv + r; ++v)
                for (int u = cu - r; u <= cu + r; ++u)
                    set_label(obs, u, v, SemanticClass::Avocado);
        }
        const int dil = 1 + trial % 4;
        const CurvePair curves = extract_curves(obs, dil);
        REQUIRE(!curves.contour.empty());
        REQUIRE(!curves.surrounding.empty());
        for (const PixelCoord& p : curves.surrounding) {
            CHECK(!obs.has_label(p.u, p.v, SemanticClass::Avocado));
            // Brute-force distance transform against the contour.
            double best = 1e9;
            for (const PixelCoord& c : curves.contour) {
                const double du = p.u - c.u;
                const double dv = p.v - c.v;
                best = std::min(best, std::sqrt(du * du + dv * dv));
            }
            CHECK(best <= dil + 1e-9);
        }
    }
}

TEST_CASE("discoverability distance rule") {
    Observation obs = blank_observation(32, 32);
    set_label(obs, 10, 10, SemanticClass::Avocado);
    CHECK(discoverability(obs) == 0);  // fruit alone

    Observation touching = blank_observation(32, 32);
    set_label(touching, 10, 10, SemanticClass::Avocado);
    set_label(touching, 11, 10, SemanticClass::Peduncle);
    CHECK(discoverability(touching) == 1);

    Observation apart6 = blank_observation(32, 32);
    set_label(apart6, 10, 10, SemanticClass::Avocado);
    set_label(apart6, 16, 10, SemanticClass::Peduncle);
    CHECK(discoverability(apart6) == 0);

    Observation apart5 = blank_observation(32, 32);
    set_label(apart5, 10, 10, SemanticClass::Avocado);
    set_label(apart5, 15, 10, SemanticClass::Peduncle);
    CHECK(discoverability(apart5) == 1);
}

TEST_CASE("occlusion rate counting") {
    Observation obs = blank_observation(16, 1);
    std::vector<PixelCoord> ring;
    const double d_fmin = 0.40;
    for (int u = 0; u < 10; ++u) {
        ring.push_back({u, 0});
        obs.depth[obs.idx(u, 0)] = u < 5 ? d_fmin - 0.01 : d_fmin + 0.06;
    }
    CHECK(occlusion_rate(obs, ring, d_fmin) == doctest::Approx(0.5).epsilon(1e-15));

    // All at or beyond the offset: zero.
    for (int u = 0; u < 10; ++u) obs.depth[obs.idx(u, 0)] = d_fmin + 0.06;
    CHECK(occlusion_rate(obs, ring, d_fmin) == 0.0);

    // Invalid depths never occlude but still count in the denominator.
    obs.depth[obs.idx(0, 0)] = d_fmin - 0.2;
    obs.depth[obs.idx(1, 0)] = -1.0;
    CHECK(occlusion_rate(obs, ring, d_fmin) == doctest::Approx(0.1).epsilon(1e-15));

    // Permutation and duplication invariance.
    std::vector<PixelCoord> shuffled = ring;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(occlusion_rate(obs, shuffled, d_fmin) == occlusion_rate(obs, ring, d_fmin));
    std::vector<PixelCoord> doubled = ring;
    doubled.insert(doubled.end(), ring.begin(), ring.end());
    CHECK(occlusion_rate(obs, doubled, d_fmin) == occlusion_rate(obs, ring, d_fmin));

    CHECK_THROWS_AS(occlusion_rate(obs, {}, d_fmin), EmptyCurve);
}

TEST_CASE("picking score and threshold") {
    CHECK(picking_score(1, 0.05) == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(pickable(picking_score(1, 0.05)));
    CHECK(picking_score(0, 0.0) == 0.0);
    CHECK(!pickable(0.0));
    CHECK(picking_score(1, 0.10) == doctest::Approx(0.90).epsilon(1e-15));
    CHECK(!pickable(picking_score(1, 0.10)));  // strictly greater than 0.9
}

TEST_CASE("pose estimate of a rendered sphere lands near the true center") {
    Scene scene;
    Ellipsoid fruit;
    fruit.center = Vec3(0.01, -0.02, 0.45);
    fruit.semi_axes = Vec3(0.04, 0.04, 0.06);
    scene.primitives.push_back(Primitive{fruit, SemanticClass::Avocado});

    const CameraModel cam = default_camera();
    const Observation obs = render(scene, cam, Viewpoint{});
    const FruitPose pose = estimate_fruit_pose(obs, cam);
    CHECK((pose.position - fruit.center).norm() <= 0.06);
    CHECK(pose.axis.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::acos(std::clamp(pose.axis.z(), -1.0, 1.0)) <=
          30.0 * std::numbers::pi / 180.0 + 1e-9);
}

TEST_CASE("collinear vertical points give a vertical axis") {
    const CameraModel cam = default_camera();
    Observation obs = blank_observation(cam.width, cam.height);
    obs.pose.position = Vec3::Zero();
    obs.pose.orientation = look_at_quaternion(Vec3::Zero(), Vec3(0, 1, 0));

    // Center-column pixels with depths chosen so the world points share x=0,
    // y=0.5 and differ only in z.
    const int cu = cam.width / 2;
    for (int v = cam.height / 2 - 40; v <= cam.height / 2 + 40; v += 10) {
        const Vec3 dir = cam.pixel_dir_cam(cu, v);
        set_label(obs, cu, v, SemanticClass::Avocado, 0.5 / dir.z());
    }
    const FruitPose pose = estimate_fruit_pose(obs, cam);
    CHECK(pose.axis.isApprox(Vec3::UnitZ(), 1e-9));
    CHECK(std::abs(pose.position.x()) < 1e-12);
    CHECK(std::abs(pose.position.y() - 0.5) < 1e-12);
}

TEST_CASE("steep point cloud axis is clamped to exactly 30 degrees") {
    const CameraModel cam = default_camera();
    Observation obs = blank_observation(cam.width, cam.height);
    obs.pose.orientation = look_at_quaternion(Vec3::Zero(), Vec3(0, 1, 0));

    // World points near the 50-degree-tilted line t * (sin50, 0, cos50) + (0, 0.5, 0).
    const double tilt = 50.0 * std::numbers::pi / 180.0;
    const Vec3 line_dir(std::sin(tilt), 0.0, std::cos(tilt));
    int placed = 0;
    for (int i = -5; i <= 5; ++i) {
        const Vec3 target = Vec3(0, 0.5, 0) + (0.01 * i) * line_dir;
        // Project to the nearest pixel, then use the exact depth for that pixel
        // ray so back-projection lands exactly where we predict.
        const Vec3 dcam = obs.pose.orientation.conjugate() * target;
        const int u = static_cast<int>(std::lround(cam.cx + cam.fx * dcam.x() / dcam.z()));
        const int v = static_cast<int>(std::lround(cam.cy + cam.fy * dcam.y() / dcam.z()));
        if (obs.has_label(u, v, SemanticClass::Avocado)) continue;
        set_label(obs, u, v, SemanticClass::Avocado, dcam.norm());
        ++placed;
    }
    REQUIRE(placed >= 5);
    const FruitPose pose = estimate_fruit_pose(obs, cam);
    const double angle = std::acos(std::clamp(pose.axis.z(), -1.0, 1.0));
    CHECK(angle == doctest::Approx(30.0 * std::numbers::pi / 180.0).epsilon(1e-6));
    CHECK(pose.axis.x() > 0.0);                 // azimuth preserved
    CHECK(std::abs(pose.axis.y()) < 5e-2);      // pixel rounding only
}

TEST_CASE("pose update blends with factor k") {
    FruitPose a;
    a.position = Vec3::Zero();
    a.axis = Vec3::UnitZ();
    FruitPose b;
    b.position = Vec3(1, 0, 0);
    b.axis = Vec3::UnitZ();

    const FruitPose fixed = update_fruit_pose(a, a);
    CHECK(fixed.position.isApprox(a.position, 1e-15));
    CHECK(fixed.axis.isApprox(a.axis, 1e-15));

    const FruitPose blended = update_fruit_pose(a, b, 0.7);
    CHECK((blended.position - Vec3(0.7, 0, 0)).norm() <= 1e-12);

    const FruitPose full = update_fruit_pose(a, b, 1.0);
    CHECK(full.position.isApprox(b.position, 1e-15));

    // Repeated updates converge geometrically with ratio 1 - k = 0.3.
    FruitPose cur = a;
    double err = (cur.position - b.position).norm();
    for (int i = 0; i < 10; ++i) {
        cur = update_fruit_pose(cur, b, 0.7);
        const double next_err = (cur.position - b.position).norm();
        CHECK(next_err == doctest::Approx(0.3 * err).epsilon(1e-12));
        err = next_err;
    }
}

TEST_CASE("obstacle points land on the occluding disc") {
    Scene scene;
    Ellipsoid fruit;
    fruit.center = Vec3(0, 0, 0.5);
    fruit.semi_axes = Vec3(0.04, 0.04, 0.04);
    scene.primitives.push_back(Primitive{fruit, SemanticClass::Avocado});
    Disc leaf;
    leaf.center = Vec3(0.036, 0, 0.4);
    leaf.normal = Vec3::UnitZ();
    leaf.radius = 0.012;
    scene.primitives.push_back(Primitive{leaf, SemanticClass::Background});

    const CameraModel cam = default_camera();
    const Observation obs = render(scene, cam, Viewpoint{});
    const SensingResult sensed = analyze_observation(obs, cam);
    REQUIRE(sensed.fruit_visible);
    REQUIRE(!sensed.obstacle_points.empty());
    for (const Vec3& p : sensed.obstacle_points) {
        CHECK(std::abs(p.z() - 0.4) <= 1e-3);  // on the leaf plane
        CHECK((p - leaf.center).head<2>().norm() <= leaf.radius + 1e-3);
    }
    CHECK(sensed.report.s_pick ==
          picking_score(sensed.report.s_dis, sensed.report.s_occ));

    // Without the leaf nothing sits in front of the fruit.
    Scene clean;
    clean.primitives.push_back(scene.primitives[0]);
    const SensingResult open = analyze_observation(render(clean, cam, Viewpoint{}), cam);
    CHECK(open.obstacle_points.empty());
    CHECK(open.report.s_occ == 0.0);
}
