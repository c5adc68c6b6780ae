#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "gsnbv/scene.hpp"

using namespace gsnbv;

namespace {

Primitive sphere(const Vec3& center, double radius, SemanticClass cls) {
    Ellipsoid e;
    e.center = center;
    e.semi_axes = Vec3::Constant(radius);
    return Primitive{e, cls};
}

CameraModel default_camera() {
    return CameraModel::from_hfov(640, 480, 69.0 * std::numbers::pi / 180.0);
}

}  // namespace

TEST_CASE("ray hits a unit sphere head-on at t = 2") {
    const Primitive prim = sphere(Vec3(3, 0, 0), 1.0, SemanticClass::Background);
    const auto t = intersect(Ray{Vec3::Zero(), Vec3::UnitX()}, prim);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("ray parallel to a disc plane misses") {
    Disc d;
    d.center = Vec3(0, 0, 1);
    d.normal = Vec3::UnitZ();
    d.radius = 0.5;
    const auto t = intersect(Ray{Vec3(-2, 0, 1), Vec3::UnitX()}, Primitive{d, {}});
    CHECK(!t.has_value());
}

TEST_CASE("oriented box intersection from outside and inside") {
    Box b;
    b.center = Vec3(1, 0, 0);
    b.half_extents = Vec3(0.5, 0.5, 0.5);
    auto t = intersect(Ray{Vec3(-1, 0, 0), Vec3::UnitX()}, Primitive{b, {}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(1.5));
    // Origin inside: first surface crossing is the exit face.
    t = intersect(Ray{Vec3(1, 0, 0), Vec3::UnitX()}, Primitive{b, {}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(0.5));
}

TEST_CASE("capped cylinder intersection") {
    Cylinder c;
    c.base = Vec3(0, 0, 0);
    c.axis = Vec3::UnitZ();
    c.radius = 0.1;
    c.height = 1.0;
    // Side hit.
    auto t = intersect(Ray{Vec3(-1, 0, 0.5), Vec3::UnitX()}, Primitive{c, {}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(0.9));
    // Cap hit from above.
    t = intersect(Ray{Vec3(0, 0, 2), -Vec3::UnitZ()}, Primitive{c, {}});
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(1.0));
    // Miss beyond the cap.
    t = intersect(Ray{Vec3(-1, 0, 1.5), Vec3::UnitX()}, Primitive{c, {}});
    CHECK(!t.has_value());
}

// Dense ray-marching oracle for the ellipsoid: march at 1e-4 m steps and
// report the first inside sample. Chords shorter than the sampler
// resolution are skipped (counted, bounded below 1%).
TEST_CASE("ellipsoid intersection matches the ray-marching oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);

    constexpr double kStep = 1e-4;
    int skipped = 0;
    constexpr int kEllipsoids = 100;
    constexpr int kRaysPer = 1000;

    for (int ei = 0; ei < kEllipsoids; ++ei) {
        Ellipsoid e;
        e.center = Vec3(sym(rng), sym(rng), sym(rng)) * 0.3;
        e.semi_axes = Vec3(0.05 + 0.25 * u01(rng), 0.05 + 0.25 * u01(rng),
                           0.05 + 0.25 * u01(rng));
        e.axis = Vec3(sym(rng), sym(rng), sym(rng) + 1.5).normalized();
        const Primitive prim{e, SemanticClass::Avocado};

        // Precomputed inside-test in scaled local coordinates.
        Eigen::Matrix3d rot;
        {
            const Vec3 w = e.axis;
            Vec3 ref = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
            const Vec3 uu = (ref - ref.dot(w) * w).normalized();
            rot.col(0) = uu;
            rot.col(1) = w.cross(uu);
            rot.col(2) = w;
        }
        const Eigen::Matrix3d to_unit =
            Vec3(1.0 / e.semi_axes.x(), 1.0 / e.semi_axes.y(), 1.0 / e.semi_axes.z())
                .asDiagonal() *
            rot.transpose();

        for (int ri = 0; ri < kRaysPer; ++ri) {
            const Vec3 offset = Vec3(sym(rng), sym(rng), sym(rng)).normalized();
            const Vec3 origin = e.center + offset * (0.6 + 0.4 * u01(rng));
            // Mix of likely hits (aimed near the center) and likely misses.
            Vec3 aim = e.center;
            if (ri % 3 == 0) {
                aim += Vec3(sym(rng), sym(rng), sym(rng)) * 0.6;
            } else {
                aim += Vec3(sym(rng), sym(rng), sym(rng)) * 0.05;
            }
            if ((aim - origin).norm() < 1e-3) continue;
            const Vec3 dir = (aim - origin).normalized();

            const Vec3 q0 = to_unit * (origin - e.center);
            const Vec3 qd = to_unit * dir;
            const double t_max = (origin - e.center).norm() + 0.35;
            double t_march = -1.0;
            for (double t = 0.0; t <= t_max; t += kStep) {
                if ((q0 + t * qd).squaredNorm() <= 1.0) {
                    t_march = t;
                    break;
                }
            }

            const auto t_hit = intersect(Ray{origin, dir}, prim);
            if (t_march >= 0.0) {
                REQUIRE(t_hit.has_value());
                CHECK(std::abs(*t_hit - t_march) <= 1e-3);
            } else if (t_hit.has_value()) {
                // Oracle resolution: tolerate only sub-resolution chords.
                const double a = qd.squaredNorm();
                const double b = 2.0 * q0.dot(qd);
                const double c = q0.squaredNorm() - 1.0;
                const double disc = b * b - 4.0 * a * c;
                REQUIRE(disc >= 0.0);
                const double chord = std::sqrt(disc) / a;
                CHECK(chord < 3.0 * kStep);
                ++skipped;
            }
        }
    }
    CHECK(skipped < kEllipsoids * kRaysPer / 100);
}

TEST_CASE("empty scene renders all-invalid") {
    Scene scene;
    const Observation obs = render(scene, default_camera(), Viewpoint{});
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u) {
            REQUIRE(!obs.depth_valid(u, v));
            REQUIRE(obs.label_at(u, v) == kNoClass);
        }
}

TEST_CASE("axial sphere renders exact center-pixel depth and label") {
    Scene scene;
    scene.primitives.push_back(sphere(Vec3(0, 0, 0.5), 0.04, SemanticClass::Avocado));
    const CameraModel cam = default_camera();
    const Observation obs = render(scene, cam, Viewpoint{});
    const int cu = cam.width / 2;
    const int cv = cam.height / 2;
    REQUIRE(obs.depth_valid(cu, cv));
    CHECK(obs.depth_at(cu, cv) == doctest::Approx(0.46).epsilon(1e-6));
    CHECK(obs.has_label(cu, cv, SemanticClass::Avocado));
}

TEST_CASE("far clipping invalidates distant hits") {
    Scene scene;
    scene.primitives.push_back(sphere(Vec3(0, 0, 0.8), 0.04, SemanticClass::Avocado));
    const Observation obs = render(scene, default_camera(), Viewpoint{});
    // Nearest fruit point is at 0.76 m > 0.72 m far clip.
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u) REQUIRE(!obs.depth_valid(u, v));
}

TEST_CASE("depth validity band is exactly [near, far]") {
    CameraModel cam = default_camera();
    const int cu = cam.width / 2;
    const int cv = cam.height / 2;
    auto center_depth = [&](double dist) {
        Scene scene;
        Disc d;
        d.center = Vec3(0, 0, dist);
        d.normal = Vec3::UnitZ();
        d.radius = 1.0;
        scene.primitives.push_back(Primitive{d, SemanticClass::Background});
        const Observation obs = render(scene, cam, Viewpoint{});
        return obs.depth[obs.idx(cu, cv)];
    };
    CHECK(center_depth(cam.near_clip) == doctest::Approx(cam.near_clip));
    CHECK(center_depth(cam.near_clip - 1e-6) < 0.0);
    CHECK(center_depth(cam.far_clip) == doctest::Approx(cam.far_clip));
    CHECK(center_depth(cam.far_clip + 1e-6) < 0.0);
}

TEST_CASE("semantic labels appear only where depth is valid") {
    Scene scene;
    scene.primitives.push_back(sphere(Vec3(0.02, 0, 0.5), 0.05, SemanticClass::Avocado));
    scene.primitives.push_back(sphere(Vec3(-0.25, 0, 0.9), 0.1, SemanticClass::Background));
    const Observation obs = render(scene, default_camera(), Viewpoint{});
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u) {
            if (obs.label_at(u, v) != kNoClass) REQUIRE(obs.depth_valid(u, v));
        }
}

TEST_CASE("render is bit-identical on repeat") {
    Scene scene;
    scene.primitives.push_back(sphere(Vec3(0.01, -0.02, 0.4), 0.05, SemanticClass::Avocado));
    Viewpoint pose;
    pose.position = Vec3(0.001, 0.002, -0.01);
    pose.orientation = look_at_quaternion(pose.position, Vec3(0.01, -0.02, 0.4));
    const CameraModel cam = default_camera();
    const Observation a = render(scene, cam, pose);
    const Observation b = render(scene, cam, pose);
    CHECK(std::memcmp(a.depth.data(), b.depth.data(), a.depth.size() * sizeof(double)) == 0);
    CHECK(a.semantic == b.semantic);
}

TEST_CASE("mask noise: identity at rate zero, deterministic, concentrated") {
    Observation obs;
    obs.width = 1000;
    obs.height = 1000;
    obs.depth.assign(1000 * 1000, 0.5);
    obs.semantic.assign(1000 * 1000, static_cast<uint8_t>(SemanticClass::Avocado));

    std::mt19937_64 rng0(5);
    const Observation same = apply_mask_noise(obs, 0.0, rng0);
    CHECK(same.semantic == obs.semantic);

    std::mt19937_64 rng1(5);
    std::mt19937_64 rng2(5);
    const Observation n1 = apply_mask_noise(obs, 0.1, rng1);
    const Observation n2 = apply_mask_noise(obs, 0.1, rng2);
    CHECK(n1.semantic == n2.semantic);
    CHECK(n1.depth == obs.depth);

    size_t dropped = 0;
    for (const uint8_t s : n1.semantic)
        if (s == kNoClass) ++dropped;
    const double rate = static_cast<double>(dropped) / n1.semantic.size();
    CHECK(std::abs(rate - 0.1) <= 0.002);
}

TEST_CASE("scene validation enforces the fruit/peduncle pair") {
    Scene scene;
    CHECK_THROWS_AS(scene.validate(), Error);

    Ellipsoid fruit;
    fruit.center = Vec3(0, 0, 0.5);
    fruit.semi_axes = Vec3(0.04, 0.04, 0.06);
    scene.primitives.push_back(Primitive{fruit, SemanticClass::Avocado});
    CHECK_THROWS_AS(scene.validate(), Error);

    Cylinder ped;
    ped.base = Vec3(0, 0, 0.56);
    ped.axis = Vec3::UnitZ();
    ped.radius = 0.004;
    ped.height = 0.05;
    scene.primitives.push_back(Primitive{ped, SemanticClass::Peduncle});
    CHECK_NOTHROW(scene.validate());

    // Detached peduncle violates the invariant.
    std::get<Cylinder>(scene.primitives[1].shape).base = Vec3(0, 0, 0.6);
    CHECK_THROWS_AS(scene.validate(), Error);
}
