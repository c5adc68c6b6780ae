#include "gsnbv/baselines.hpp"

#include <chrono>
#include <cmath>

#include "gsnbv/errors.hpp"

namespace gsnbv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// One angle drawn uniformly by arc length over the interval union.
double random_angle(const ArcSet& arcs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, arcs.measure());
    double s = u(rng);
    for (const ArcInterval& iv : arcs.intervals()) {
        const double len = iv.hi - iv.lo;
        if (s < len) return iv.lo + s;
        s -= len;
    }
    return arcs.intervals().back().hi;  // numeric edge of the draw
}

// The full reachable sector anchored at the initial camera bearing,
// re-projected onto whatever ring the fruit estimate implies.
class SectorTracker {
public:
    ArcSet current(const PlanStepContext& ctx) {
        if (!space_.initialized()) {
            const double anchor = ctx.ring.bearing_of(ctx.current.position);
            space_.adopt(ArcSet::sector(anchor, ctx.cfg.sector_rad), ctx.ring);
        }
        ArcSet arcs = space_.project(ctx.ring);
        space_.adopt(arcs, ctx.ring);
        return arcs;
    }

private:
    SamplingSpace space_;
};

class RandomRingPolicy final : public ViewpointPolicy {
public:
    std::optional<Viewpoint> next(PlanStepContext& ctx) override {
        const auto t0 = Clock::now();
        const ArcSet arcs = sector_.current(ctx);
        ctx.record.arc_measure_reprojected = arcs.measure();
        ctx.record.arc_measure = arcs.measure();  // never shrunk
        if (arcs.empty()) return std::nullopt;

        std::optional<Viewpoint> best;
        double best_u = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < ctx.cfg.n_candidates; ++i) {
            Viewpoint vp;
            vp.position = ctx.ring.point_at(random_angle(arcs, ctx.rng));
            vp.orientation = look_at_quaternion(vp.position, ctx.fruit.position);

            const auto te = Clock::now();
            const double gain =
                expected_gain(ctx.grid, vp, ctx.cam, ctx.cfg.gain_ray_stride);
            ctx.record.t_eval_s += seconds_since(te);

            const double u = utility(
                gain, (vp.position - ctx.current.position).norm(), ctx.cfg.lambda);
            if (u > best_u) {
                best_u = u;
                best = vp;
            }
        }
        ctx.record.t_sample_s = seconds_since(t0) - ctx.record.t_eval_s;
        return best;
    }

    StopReason failure_reason() const override { return StopReason::EmptySamplingSpace; }

private:
    SectorTracker sector_;
};

class GreedyLocalPolicy final : public ViewpointPolicy {
public:
    std::optional<Viewpoint> next(PlanStepContext& ctx) override {
        const auto t0 = Clock::now();
        const ArcSet arcs = sector_.current(ctx);
        ctx.record.arc_measure_reprojected = arcs.measure();
        ctx.record.arc_measure = arcs.measure();
        if (arcs.empty()) {
            reason_ = StopReason::EmptySamplingSpace;
            return std::nullopt;
        }

        double theta;
        try {
            theta = ctx.ring.bearing_of(ctx.current.position);
        } catch (const OnAxis&) {
            reason_ = StopReason::EmptySamplingSpace;
            return std::nullopt;
        }

        // Baseline utility of staying put: distance zero, current gain.
        const auto tc = Clock::now();
        const double here_gain =
            expected_gain(ctx.grid, ctx.current, ctx.cam, ctx.cfg.gain_ray_stride);
        ctx.record.t_eval_s += seconds_since(tc);
        const double here_u = utility(here_gain, 0.0, ctx.cfg.lambda);

        std::optional<Viewpoint> best;
        double best_u = here_u;
        for (const double candidate_theta : {theta - kGreedyStepRad, theta + kGreedyStepRad}) {
            if (!arcs.contains(wrap_angle(candidate_theta))) continue;
            Viewpoint vp;
            vp.position = ctx.ring.point_at(candidate_theta);
            vp.orientation = look_at_quaternion(vp.position, ctx.fruit.position);

            const auto te = Clock::now();
            const double gain =
                expected_gain(ctx.grid, vp, ctx.cam, ctx.cfg.gain_ray_stride);
            ctx.record.t_eval_s += seconds_since(te);

            const double u = utility(
                gain, (vp.position - ctx.current.position).norm(), ctx.cfg.lambda);
            if (u > best_u) {  // strict improvement only
                best_u = u;
                best = vp;
            }
        }
        ctx.record.t_sample_s = seconds_since(t0) - ctx.record.t_eval_s;
        if (!best) reason_ = StopReason::LocalMaximum;
        return best;
    }

    StopReason failure_reason() const override { return reason_; }

private:
    SectorTracker sector_;
    StopReason reason_ = StopReason::LocalMaximum;
};

}  // namespace

PlanResult plan_random_ring(const Scene& scene, const CameraModel& cam,
                            const Viewpoint& initial, const PlannerConfig& cfg,
                            std::mt19937_64& rng) {
    RandomRingPolicy policy;
    return run_plan_loop(scene, cam, initial, cfg, rng, policy);
}

PlanResult plan_greedy_local(const Scene& scene, const CameraModel& cam,
                             const Viewpoint& initial, const PlannerConfig& cfg,
                             std::mt19937_64& rng) {
    GreedyLocalPolicy policy;
    return run_plan_loop(scene, cam, initial, cfg, rng, policy);
}

}  // namespace gsnbv
