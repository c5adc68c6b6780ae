#pragma once

#include <string>

#include "gsnbv/planner.hpp"
#include "gsnbv/scene.hpp"

namespace gsnbv {

// A runnable case study: scene, camera, starting pose, planner settings.
struct Scenario {
    std::string name;
    CameraModel camera;
    Vec3 initial_position{Vec3::Zero()};
    Vec3 initial_target{Vec3::Zero()};  // the initial camera aims here
    Scene scene;
    PlannerConfig config;

    Viewpoint initial_viewpoint() const;
};

// Leafy plant with the fruit partially hidden: initial fruit visibility is
// calibrated to roughly 28% of the unoccluded view.
Scenario builtin_group1();

// Group 1 plus a board east of the plant that fully blocks every viewpoint
// in the rightmost quarter of the reachable sector.
Scenario builtin_group2();

// Deterministic procedurally generated variant: the fruit near its default
// location, n random leaf discs between the camera and the fruit. Leaves
// that would hide the fruit completely from the initial pose are dropped.
Scenario random_scenario(uint64_t seed, int n_leaves,
                         double leaf_radius_min = 0.02, double leaf_radius_max = 0.035);

// Fraction of initially visible fruit pixels relative to the same render
// with all occluders removed (fruit and peduncle stay).
double fruit_visibility(const Scenario& scenario);

// JSON scenario file round-trip. Loading validates the scene invariants.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

// Resolve "group1"/"group2" to the builtins, anything else as a file path.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace gsnbv
