#include "gsnbv/planner.hpp"

#include <chrono>
#include <cmath>

#include "gsnbv/errors.hpp"

namespace gsnbv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double PlannerConfig::effective_min_utility(const CameraModel& cam) const {
    const int stride = std::max(1, gain_ray_stride);
    const double rays_used = std::ceil(static_cast<double>(cam.width) / stride) *
                             std::ceil(static_cast<double>(cam.height) / stride);
    const double rays_full = static_cast<double>(cam.width) * cam.height;
    return min_utility * rays_used / rays_full;
}

double expected_gain(const SemanticVoxelGrid& grid, const Viewpoint& vp,
                     const CameraModel& cam, int stride) {
    const int step = std::max(1, stride);
    std::vector<uint8_t> counted(grid.voxel_count(), 0);
    double gain = 0.0;
    for (int v = 0; v < cam.height; v += step) {
        for (int u = 0; u < cam.width; u += step) {
            const Vec3 dir = vp.orientation * cam.pixel_dir_cam(u, v);
            grid.walk_ray(vp.position, dir, cam.far_clip, [&](size_t idx, double) {
                if (grid.occupied(idx)) {
                    // First occupied voxel: visible surface, then the ray stops.
                    if (grid.in_roi(idx) && !counted[idx]) {
                        counted[idx] = 1;
                        gain += grid.semantic_entropy(idx);
                    }
                    return false;
                }
                // Unknown space is see-through but still uncertain.
                if (grid.in_roi(idx) && grid.unobserved(idx) && !counted[idx]) {
                    counted[idx] = 1;
                    gain += grid.semantic_entropy(idx);
                }
                return true;
            });
        }
    }
    return gain;
}

double utility(double gain, double distance, double lambda) {
    return gain * std::exp(-lambda * distance);
}

void SamplingSpace::adopt(const ArcSet& arcs, const PickingRing& ring) {
    boundaries_.clear();
    boundaries_.reserve(arcs.intervals().size());
    for (const ArcInterval& iv : arcs.intervals())
        boundaries_.emplace_back(ring.point_at(iv.lo), ring.point_at(iv.hi));
    initialized_ = true;
}

ArcSet SamplingSpace::project(const PickingRing& ring) const {
    ArcSet arcs;
    for (const auto& [start_pt, end_pt] : boundaries_) {
        double lo, hi;
        try {
            lo = ring.bearing_of(start_pt);
            hi = ring.bearing_of(end_pt);
        } catch (const OnAxis&) {
            continue;  // endpoint degenerate on the new ring: drop the piece
        }
        if (hi < lo) hi += 2.0 * std::numbers::pi;
        arcs.add(lo, hi);
    }
    return arcs;
}

ArcSet update_sampling_space(const SamplingSpace& space, const PickingRing& ring,
                             const std::vector<Vec3>& new_obstacles,
                             double viewpoint_bearing, double* reprojected_measure) {
    ArcSet arcs = space.project(ring);
    if (reprojected_measure) *reprojected_measure = arcs.measure();
    if (new_obstacles.empty()) return arcs;

    // Angular hull of the new obstacle points: extreme signed offsets from
    // the current viewpoint bearing.
    bool have_offset = false;
    double lo_off = 0.0, hi_off = 0.0;
    for (const Vec3& p : new_obstacles) {
        double bearing;
        try {
            bearing = ring.bearing_of(p);
        } catch (const OnAxis&) {
            continue;  // point on the ring axis has no direction to block
        }
        const double off = signed_angle_diff(bearing, viewpoint_bearing);
        if (!have_offset) {
            lo_off = hi_off = off;
            have_offset = true;
        } else {
            lo_off = std::min(lo_off, off);
            hi_off = std::max(hi_off, off);
        }
    }
    if (have_offset)
        arcs.subtract(viewpoint_bearing + lo_off, viewpoint_bearing + hi_off);
    return arcs;
}

std::vector<Candidate> generate_candidates(const ArcSet& arcs, const PickingRing& ring,
                                           const FruitPose& fruit,
                                           std::vector<Vec3>& sampled_positions,
                                           const Viewpoint& current,
                                           const SemanticVoxelGrid& grid,
                                           const CameraModel& cam,
                                           const PlannerConfig& cfg, int created_iter,
                                           double* eval_seconds) {
    std::vector<Candidate> out;
    std::vector<double> angles;
    try {
        angles = uniform_equidistant_sample(arcs, cfg.n_candidates);
    } catch (const EmptySamplingSpace&) {
        return out;
    }

    const double min_u = cfg.effective_min_utility(cam);
    for (const double theta : angles) {
        const Vec3 pos = ring.point_at(theta);
        bool too_close = false;
        for (const Vec3& prev : sampled_positions) {
            if ((pos - prev).norm() < cfg.dissimilarity_radius) {
                too_close = true;
                break;
            }
        }
        // Every generated sample joins the history, even rejected ones.
        sampled_positions.push_back(pos);
        if (too_close) continue;

        Candidate cand;
        cand.theta = theta;
        cand.created_iter = created_iter;
        cand.viewpoint.position = pos;
        cand.viewpoint.orientation = look_at_quaternion(pos, fruit.position);

        const auto t0 = Clock::now();
        cand.gain = expected_gain(grid, cand.viewpoint, cam, cfg.gain_ray_stride);
        if (eval_seconds) *eval_seconds += seconds_since(t0);

        if (utility(cand.gain, (pos - current.position).norm(), cfg.lambda) < min_u)
            continue;
        out.push_back(cand);
    }
    return out;
}

Candidate select_nbv(std::vector<Candidate>& queue, const Viewpoint& current,
                     double lambda) {
    if (queue.empty()) throw EmptyQueue{};
    size_t best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < queue.size(); ++i) {
        const double u =
            utility(queue[i].gain, (queue[i].viewpoint.position - current.position).norm(),
                    lambda);
        const bool better =
            u > best_u ||
            (u == best_u &&
             (queue[i].gain > queue[best].gain ||
              (queue[i].gain == queue[best].gain &&
               (queue[i].created_iter < queue[best].created_iter ||
                (queue[i].created_iter == queue[best].created_iter &&
                 queue[i].theta < queue[best].theta)))));
        if (better) {
            best = i;
            best_u = u;
        }
    }
    Candidate chosen = queue[best];
    queue.erase(queue.begin() + static_cast<long>(best));
    return chosen;
}

PlanResult run_plan_loop(const Scene& scene, const CameraModel& cam,
                         const Viewpoint& initial, const PlannerConfig& cfg,
                         std::mt19937_64& rng, ViewpointPolicy& policy) {
    PlanResult result;
    result.pose_list.push_back(initial);
    Viewpoint pose = initial;

    std::optional<SemanticVoxelGrid> grid;
    FruitPose fruit;
    bool have_fruit = false;

    for (int step = 0; step <= cfg.max_iterations; ++step) {
        Observation obs = render(scene, cam, pose);
        if (cfg.mask_dropout > 0.0) obs = apply_mask_noise(obs, cfg.mask_dropout, rng);
        const SensingResult sensed = analyze_observation(obs, cam, cfg.dilation_px);

        IterationRecord rec;
        rec.pose = pose;
        rec.report = sensed.report;

        std::optional<FruitPose> estimate;
        if (sensed.fruit_visible) {
            try {
                estimate = estimate_fruit_pose(obs, cam);
            } catch (const TooFewPoints&) {
            }
        }

        if (!grid) {
            // The map and its region of interest are anchored at the first
            // fruit estimate; without one there is nothing to plan toward.
            if (!estimate) {
                rec.fruit = fruit;
                result.iterations.push_back(rec);
                result.stop = StopReason::FruitNotFound;
                return result;
            }
            grid.emplace(SemanticVoxelGrid::centered_on(estimate->position));
            RoiBox roi;
            roi.center = estimate->position;
            grid->mark_roi(roi);
            fruit = *estimate;
            have_fruit = true;
        }
        grid->insert_observation(obs, cam);

        if (pickable(sensed.report.s_pick)) {
            rec.fruit = fruit;
            result.iterations.push_back(rec);
            result.success = true;
            result.stop = StopReason::Pickable;
            break;
        }
        if (step == cfg.max_iterations) {
            rec.fruit = fruit;
            result.iterations.push_back(rec);
            result.stop = StopReason::MaxIterations;
            break;
        }

        // Blend the new estimate into the running fruit pose (the very first
        // estimate was adopted wholesale above).
        if (estimate && step > 0) fruit = update_fruit_pose(fruit, *estimate, cfg.blend_k);
        rec.fruit = fruit;

        const PickingRing ring = ring_from_pose(fruit, cfg.ring_radius);
        PlanStepContext ctx{*grid, cam,  cfg, fruit, ring,
                            pose,  step, sensed.obstacle_points, rng, rec};
        const auto t0 = Clock::now();
        const std::optional<Viewpoint> next_pose = policy.next(ctx);
        rec.t_nbv_s = seconds_since(t0);
        result.iterations.push_back(rec);

        if (!next_pose) {
            result.stop = policy.failure_reason();
            break;
        }
        pose = *next_pose;
        result.pose_list.push_back(pose);
    }

    result.fruit = fruit;
    result.fruit_valid = have_fruit;
    if (cfg.keep_final_map && grid)
        result.final_map = std::make_shared<SemanticVoxelGrid>(std::move(*grid));
    return result;
}

namespace {

// The primary policy: monotone arc shrinkage + frozen-gain viewpoint queue.
class GsNbvPolicy final : public ViewpointPolicy {
public:
    std::optional<Viewpoint> next(PlanStepContext& ctx) override {
        const auto t_sample0 = Clock::now();
        if (!space_.initialized()) {
            // Reachable sector centered on the initial camera bearing.
            const double anchor = ctx.ring.bearing_of(ctx.current.position);
            space_.adopt(ArcSet::sector(anchor, ctx.cfg.sector_rad), ctx.ring);
        }
        sampled_positions_.push_back(ctx.current.position);

        double bearing;
        try {
            bearing = ctx.ring.bearing_of(ctx.current.position);
        } catch (const OnAxis&) {
            bearing = 0.0;  // camera on the ring axis: no angular reference
        }
        ArcSet arcs = update_sampling_space(space_, ctx.ring, ctx.new_obstacles, bearing,
                                            &ctx.record.arc_measure_reprojected);
        space_.adopt(arcs, ctx.ring);
        ctx.record.arc_measure = arcs.measure();

        auto fresh = generate_candidates(arcs, ctx.ring, ctx.fruit, sampled_positions_,
                                         ctx.current, ctx.grid, ctx.cam, ctx.cfg,
                                         ctx.step, &ctx.record.t_eval_s);
        if (fresh.empty() && queue_.empty()) {
            // One resample under the same rules before giving up.
            fresh = generate_candidates(arcs, ctx.ring, ctx.fruit, sampled_positions_,
                                        ctx.current, ctx.grid, ctx.cam, ctx.cfg,
                                        ctx.step, &ctx.record.t_eval_s);
        }
        queue_.insert(queue_.end(), fresh.begin(), fresh.end());
        ctx.record.t_sample_s = seconds_since(t_sample0) - ctx.record.t_eval_s;

        if (queue_.empty()) return std::nullopt;
        return select_nbv(queue_, ctx.current, ctx.cfg.lambda).viewpoint;
    }

    StopReason failure_reason() const override { return StopReason::EmptySamplingSpace; }

private:
    SamplingSpace space_;
    std::vector<Candidate> queue_;
    std::vector<Vec3> sampled_positions_;
};

}  // namespace

PlanResult plan(const Scene& scene, const CameraModel& cam, const Viewpoint& initial,
                const PlannerConfig& cfg, std::mt19937_64& rng) {
    GsNbvPolicy policy;
    return run_plan_loop(scene, cam, initial, cfg, rng, policy);
}

}  // namespace gsnbv
