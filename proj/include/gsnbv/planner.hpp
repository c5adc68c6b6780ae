#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "gsnbv/geometry.hpp"
#include "gsnbv/perception.hpp"
#include "gsnbv/scene.hpp"
#include "gsnbv/semantic_map.hpp"

namespace gsnbv {

struct PlannerConfig {
    double ring_radius = 0.21;                        // m, camera-to-fruit distance
    double sector_rad = 270.0 * std::numbers::pi / 180.0;  // reachable ring sector
    int n_candidates = 4;
    double lambda = -1.0;             // motion cost coefficient (negative: go far)
    double dissimilarity_radius = 0.1;  // m, min spacing between sampled viewpoints
    double min_utility = 10.0;        // threshold at full ray density, rescaled below
    int max_iterations = 10;          // planning moves after the initial sensing
    double blend_k = 0.7;             // fruit pose update factor
    int gain_ray_stride = 4;          // evaluate every Nth pixel per dimension
    int dilation_px = kDefaultDilationPx;
    double mask_dropout = 0.0;        // per-pixel label dropout rate
    bool keep_final_map = false;      // expose the voxel grid in the result

    // min_utility is stated for a full-resolution ray bundle; the subsampled
    // bundle sees 1/stride^2 of the rays, so the threshold scales with it.
    double effective_min_utility(const CameraModel& cam) const;
};

// Ring sample kept in the viewpoint queue. The gain is frozen at creation;
// only the motion-cost factor is refreshed when a view is selected.
struct Candidate {
    Viewpoint viewpoint;
    double theta = 0.0;
    double gain = 0.0;
    int created_iter = 0;
};

enum class StopReason {
    Pickable,           // success: picking score above threshold
    MaxIterations,      // budget exhausted
    EmptySamplingSpace, // no candidates even after one resample
    LocalMaximum,       // hill climber found no improving neighbour
    FruitNotFound,      // no usable fruit pixels at the initial pose
};

struct IterationRecord {
    Viewpoint pose;
    PickReport report;
    FruitPose fruit;
    double arc_measure_reprojected = -1.0;  // rad, after re-projection
    double arc_measure = -1.0;              // rad, after obstacle subtraction
    double t_sample_s = 0.0;                // sampling-space update + candidates
    double t_eval_s = 0.0;                  // gain evaluations
    double t_nbv_s = 0.0;                   // whole planning step
};

struct PlanResult {
    bool success = false;
    StopReason stop = StopReason::MaxIterations;
    std::vector<Viewpoint> pose_list;        // initial pose + every move
    std::vector<IterationRecord> iterations; // one per sensing step
    FruitPose fruit;                         // final estimate
    bool fruit_valid = false;
    std::shared_ptr<SemanticVoxelGrid> final_map;  // set iff cfg.keep_final_map

    int moves() const { return static_cast<int>(pose_list.size()) - 1; }
};

// Expected semantic information gain (bits) of a viewpoint: deterministic
// subsampled ray bundle; rays stop at the first occupied voxel; a
// region-of-interest voxel contributes its entropy when it is that first
// occupied voxel or an unobserved voxel crossed before one. Each voxel
// counts at most once per evaluation.
double expected_gain(const SemanticVoxelGrid& grid, const Viewpoint& vp,
                     const CameraModel& cam, int stride);

// U = G * exp(-lambda * d); lambda = -1 rewards distant moves.
double utility(double gain, double distance, double lambda);

// Sampling space persisted as world-space interval endpoints so it can be
// re-projected whenever the ring moves with the fruit estimate.
class SamplingSpace {
public:
    bool initialized() const { return initialized_; }
    // Store the arcs of `ring` as world-anchored endpoint pairs.
    void adopt(const ArcSet& arcs, const PickingRing& ring);
    // Rebuild the arcs on a (possibly different) ring.
    ArcSet project(const PickingRing& ring) const;

private:
    std::vector<std::pair<Vec3, Vec3>> boundaries_;
    bool initialized_ = false;
};

// Re-projected previous arcs minus the angular hull of this iteration's new
// obstacle points. The hull is the closed interval between the extreme
// signed bearing offsets of the points, measured from the current viewpoint
// bearing. `reprojected_measure` (optional) reports the measure before
// subtraction.
ArcSet update_sampling_space(const SamplingSpace& space, const PickingRing& ring,
                             const std::vector<Vec3>& new_obstacles,
                             double viewpoint_bearing,
                             double* reprojected_measure = nullptr);

// Equidistant ring samples aimed at the fruit, filtered by spacing against
// every previously generated sample (all of which are appended to
// `sampled_positions`) and by minimum utility. Gains are frozen on the
// survivors. `eval_seconds` (optional) accumulates gain-evaluation time.
std::vector<Candidate> generate_candidates(const ArcSet& arcs, const PickingRing& ring,
                                           const FruitPose& fruit,
                                           std::vector<Vec3>& sampled_positions,
                                           const Viewpoint& current,
                                           const SemanticVoxelGrid& grid,
                                           const CameraModel& cam,
                                           const PlannerConfig& cfg, int created_iter,
                                           double* eval_seconds = nullptr);

// Removes and returns the queue element maximizing the refreshed utility
// gain * exp(-lambda * distance-from-current). Ties prefer higher gain,
// then earlier creation, then lower angle. Throws EmptyQueue.
Candidate select_nbv(std::vector<Candidate>& queue, const Viewpoint& current,
                     double lambda);

// State handed to a planning policy after each non-terminal sensing step.
struct PlanStepContext {
    const SemanticVoxelGrid& grid;
    const CameraModel& cam;
    const PlannerConfig& cfg;
    const FruitPose& fruit;
    const PickingRing& ring;
    const Viewpoint& current;
    int step;                               // sensing step index, 0-based
    const std::vector<Vec3>& new_obstacles; // this step's obstacle points
    std::mt19937_64& rng;
    IterationRecord& record;                // for arc measures and timings
};

// Strategy for choosing the next viewpoint; state lives in the policy.
class ViewpointPolicy {
public:
    virtual ~ViewpointPolicy() = default;
    // Next camera pose, or nullopt to stop (failure_reason explains why).
    virtual std::optional<Viewpoint> next(PlanStepContext& ctx) = 0;
    virtual StopReason failure_reason() const = 0;
};

// Shared sensing/mapping/termination loop driving any policy: render, score,
// insert into the map, check pickability and the iteration budget, update
// the fruit pose and ring, then ask the policy where to move.
PlanResult run_plan_loop(const Scene& scene, const CameraModel& cam,
                         const Viewpoint& initial, const PlannerConfig& cfg,
                         std::mt19937_64& rng, ViewpointPolicy& policy);

// The geometry-and-semantics planner: monotone sampling-space shrinkage,
// equidistant candidates, frozen-gain viewpoint queue.
PlanResult plan(const Scene& scene, const CameraModel& cam, const Viewpoint& initial,
                const PlannerConfig& cfg, std::mt19937_64& rng);

}  // namespace gsnbv
