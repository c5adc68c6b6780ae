#pragma once

#include "gsnbv/planner.hpp"

namespace gsnbv {

inline constexpr double kGreedyStepRad = 15.0 * std::numbers::pi / 180.0;

// Random-sampling comparison planner: every iteration draws n uniform random
// angles over the full reachable sector (never shrunk), scores them with the
// same utility, and moves to the best one. Shares the sensing loop, map and
// termination rules with the primary planner.
PlanResult plan_random_ring(const Scene& scene, const CameraModel& cam,
                            const Viewpoint& initial, const PlannerConfig& cfg,
                            std::mt19937_64& rng);

// Hill-climbing comparison planner: evaluates the ring angles one step to
// either side of the current bearing (inside the initial sector), moves only
// on strict utility improvement, and stops at a local maximum otherwise.
PlanResult plan_greedy_local(const Scene& scene, const CameraModel& cam,
                             const Viewpoint& initial, const PlannerConfig& cfg,
                             std::mt19937_64& rng);

}  // namespace gsnbv
