#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include <json.hpp>

#include "gsnbv/errors.hpp"
#include "gsnbv/perception.hpp"
#include "gsnbv/scenarios.hpp"

using namespace gsnbv;

namespace {

constexpr double kPi = std::numbers::pi;

size_t fruit_pixels(const Scenario& s, const Viewpoint& vp) {
    const Observation obs = render(s.scene, s.camera, vp);
    size_t n = 0;
    for (const uint8_t label : obs.semantic)
        if (label == static_cast<uint8_t>(SemanticClass::Avocado)) ++n;
    return n;
}

Viewpoint ring_view(const Scenario& s, double theta) {
    const FruitPose& truth = s.scene.fruit_truth;
    const PickingRing ring(truth.position, truth.axis, s.config.ring_radius);
    Viewpoint vp;
    vp.position = ring.point_at(theta);
    vp.orientation = look_at_quaternion(vp.position, truth.position);
    return vp;
}

}  // namespace

TEST_CASE("the leafy scenario hides most of the fruit initially") {
    const Scenario s = builtin_group1();
    s.scene.validate();

    const double visibility = fruit_visibility(s);
    CHECK(visibility >= 0.23);
    CHECK(visibility <= 0.33);

    // Removing the foliage restores the full view.
    Scenario bare = s;
    std::erase_if(bare.scene.primitives,
                  [](const Primitive& p) { return p.cls == SemanticClass::Background; });
    CHECK(fruit_visibility(bare) == 1.0);
}

TEST_CASE("the initial leafy view is not pickable") {
    const Scenario s = builtin_group1();
    const Observation obs = render(s.scene, s.camera, s.initial_viewpoint());
    const SensingResult sensed = analyze_observation(obs, s.camera);
    CHECK(sensed.fruit_visible);
    CHECK(sensed.report.s_pick < 0.9);
}

TEST_CASE("the board blocks the rightmost quarter of the ring") {
    const Scenario s2 = builtin_group2();
    s2.scene.validate();

    // Every bearing within 45 degrees of the ring's zero direction loses the
    // fruit entirely.
    for (const double deg : {-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0}) {
        CAPTURE(deg);
        CHECK(fruit_pixels(s2, ring_view(s2, deg * kPi / 180.0)) == 0);
    }

    // The initial (north) view is unaffected by the board.
    const Scenario s1 = builtin_group1();
    CHECK(fruit_pixels(s2, s2.initial_viewpoint()) ==
          fruit_pixels(s1, s1.initial_viewpoint()));
    CHECK(fruit_pixels(s2, s2.initial_viewpoint()) > 0);
}

TEST_CASE("procedural scenarios are reproducible and well formed") {
    SUBCASE("same seed, same scenario") {
        const Scenario a = random_scenario(123, 5);
        const Scenario b = random_scenario(123, 5);
        CHECK(scenario_to_json(a) == scenario_to_json(b));
        const Scenario c = random_scenario(124, 5);
        CHECK(scenario_to_json(a) != scenario_to_json(c));
    }
    SUBCASE("no leaves means a clear view") {
        const Scenario s = random_scenario(9, 0);
        const Observation obs = render(s.scene, s.camera, s.initial_viewpoint());
        const SensingResult sensed = analyze_observation(obs, s.camera);
        CHECK(sensed.fruit_visible);
        CHECK(sensed.report.s_occ < 0.05);
    }
    SUBCASE("fifty seeds keep the invariants") {
        for (uint64_t seed = 0; seed < 50; ++seed) {
            CAPTURE(seed);
            const Scenario s = random_scenario(seed, 4);
            CHECK_NOTHROW(s.scene.validate());
            CHECK(fruit_pixels(s, s.initial_viewpoint()) > 0);
        }
    }
}

TEST_CASE("scenario files round-trip bit for bit") {
    for (const Scenario& s :
         {builtin_group1(), builtin_group2(), random_scenario(3, 5)}) {
        CAPTURE(s.name);
        const std::string text = scenario_to_json(s);
        const Scenario parsed = scenario_from_json(text);
        CHECK(scenario_to_json(parsed) == text);
    }
}

TEST_CASE("parsing rejects malformed scenarios") {
    CHECK_THROWS_AS(scenario_from_json("not json"), Error);
    CHECK_THROWS_AS(scenario_from_json("{}"), Error);
    // Well-formed JSON, but the peduncle floats away from the fruit.
    nlohmann::json j = nlohmann::json::parse(scenario_to_json(builtin_group1()));
    j["peduncle"]["base"][0] = 9.0;
    CHECK_THROWS_AS(scenario_from_json(j.dump()), Error);
}

#ifdef GSNBV_SCENES_DIR
TEST_CASE("the shipped scene files match the builtins") {
    const std::string dir = GSNBV_SCENES_DIR;
    const Scenario g1 = load_scenario(dir + "/group1.json");
    CHECK(scenario_to_json(g1) == scenario_to_json(builtin_group1()));
    const Scenario g2 = load_scenario(dir + "/group2.json");
    CHECK(scenario_to_json(g2) == scenario_to_json(builtin_group2()));
}
#endif

TEST_CASE("name resolution prefers the builtins") {
    CHECK(resolve_scenario("group1").name == "group1");
    CHECK(resolve_scenario("group2").name == "group2");
    CHECK_THROWS_AS(resolve_scenario("/no/such/file.json"), Error);
}
