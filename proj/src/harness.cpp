#include "gsnbv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "gsnbv/errors.hpp"

namespace gsnbv {

namespace {

// Compact, locale-independent, deterministic number formatting.
std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double m = 0.0;
    for (const double x : xs) m += x;
    return m / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean_of(xs);
    double v = 0.0;
    for (const double x : xs) v += (x - m) * (x - m);
    return std::sqrt(v / static_cast<double>(xs.size()));
}

std::vector<double> finite_only(std::vector<double> xs) {
    std::erase_if(xs, [](double x) { return !std::isfinite(x); });
    return xs;
}

int worker_count(int n_trials) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("GSNBV_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) workers = std::min(workers, cap);
    }
    return std::min(workers, std::max(1, n_trials));
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
    const size_t dot = path.find_last_of('.');
    const size_t slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::Pickable: return "pickable";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::EmptySamplingSpace: return "empty_sampling_space";
        case StopReason::LocalMaximum: return "local_maximum";
        case StopReason::FruitNotFound: return "fruit_not_found";
    }
    return "unknown";
}

PlannerFn planner_by_name(const std::string& name) {
    if (name == "gsnbv") return &plan;
    if (name == "random-lite") return &plan_random_ring;
    if (name == "greedy-lite") return &plan_greedy_local;
    throw Error("unknown planner: " + name +
                " (expected gsnbv, random-lite or greedy-lite)");
}

TrialMetrics run_trial(const Scenario& scenario, const std::string& planner,
                       uint64_t seed, const std::string& map_dump_path) {
    PlannerFn fn = planner_by_name(planner);
    PlannerConfig cfg = scenario.config;
    cfg.keep_final_map = !map_dump_path.empty();
    std::mt19937_64 rng(seed);

    const PlanResult result =
        fn(scenario.scene, scenario.camera, scenario.initial_viewpoint(), cfg, rng);

    TrialMetrics m;
    m.planner = planner;
    m.seed = seed;
    m.success = result.success;
    m.iterations = result.moves();
    m.stop = result.stop;
    m.pose_list = result.pose_list;

    const FruitPose& truth = scenario.scene.fruit_truth;
    if (result.fruit_valid) {
        m.pos_err_m = (result.fruit.position - truth.position).norm();
        const double cosang =
            std::clamp(result.fruit.axis.normalized().dot(truth.axis.normalized()), -1.0, 1.0);
        m.axis_err_deg = std::acos(cosang) * 180.0 / std::numbers::pi;
    } else {
        m.pos_err_m = std::numeric_limits<double>::quiet_NaN();
        m.axis_err_deg = std::numeric_limits<double>::quiet_NaN();
    }

    for (const IterationRecord& rec : result.iterations) {
        m.s_pick.push_back(rec.report.s_pick);
        m.unoccluded.push_back(1.0 - rec.report.s_occ);
        if (rec.arc_measure >= 0.0) {
            m.arc_measure.push_back(rec.arc_measure);
            m.arc_measure_reprojected.push_back(rec.arc_measure_reprojected);
        }
        m.t_sample_s += rec.t_sample_s;
        m.t_eval_s += rec.t_eval_s;
        m.t_nbv_s += rec.t_nbv_s;
    }

    try {
        const PickingRing truth_ring(truth.position, truth.axis, cfg.ring_radius);
        m.final_bearing_rad = truth_ring.bearing_of(result.pose_list.back().position);
    } catch (const OnAxis&) {
        m.final_bearing_rad = std::numeric_limits<double>::quiet_NaN();
    }

    if (!map_dump_path.empty() && result.final_map) result.final_map->dump(map_dump_path);
    return m;
}

std::vector<TrialMetrics> run_trials(const Scenario& scenario, const std::string& planner,
                                     int n_trials, uint64_t base_seed,
                                     const std::string& map_dump_path) {
    if (n_trials < 1) throw Error("need at least one trial");
    planner_by_name(planner);  // validate before spawning workers

    std::vector<TrialMetrics> results(static_cast<size_t>(n_trials));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_text;
    std::mutex error_mutex;

    auto work = [&]() {
        for (int i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1)) {
            if (failed.load()) return;
            try {
                results[static_cast<size_t>(i)] =
                    run_trial(scenario, planner, base_seed + static_cast<uint64_t>(i),
                              i == 0 ? map_dump_path : std::string{});
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_text = "trial " + std::to_string(i) + " failed";
                failed.store(true);
                return;
            }
        }
    };

    const int workers = worker_count(n_trials);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    if (failed.load()) throw Error(error_text);
    return results;
}

ReportSummary write_report(const std::vector<TrialMetrics>& metrics,
                           const std::string& path) {
    if (metrics.empty()) throw Error("cannot write a report without metrics");

    size_t max_steps = 0;
    for (const TrialMetrics& m : metrics) max_steps = std::max(max_steps, m.s_pick.size());

    std::ofstream out(path);
    if (!out) throw Error("cannot open report file: " + path);

    out << "planner,seed,success,iterations,pos_err_m,axis_err_deg";
    for (size_t i = 0; i < max_steps; ++i) out << ",s_pick_iter" << i;
    out << ",t_sample_s,t_eval_s,t_nbv_s\n";

    for (const TrialMetrics& m : metrics) {
        out << m.planner << ',' << m.seed << ',' << (m.success ? 1 : 0) << ','
            << m.iterations << ',' << fmt(m.pos_err_m) << ',' << fmt(m.axis_err_deg);
        for (size_t i = 0; i < max_steps; ++i) {
            out << ',';
            if (i < m.s_pick.size()) out << fmt(m.s_pick[i]);
        }
        out << ',' << fmt(m.t_sample_s) << ',' << fmt(m.t_eval_s) << ',' << fmt(m.t_nbv_s)
            << '\n';
    }

    // Summary block: one set of rows per planner, in first-appearance order.
    out << "\nmetric,planner,mean,std\n";
    std::vector<std::string> planners;
    for (const TrialMetrics& m : metrics)
        if (std::find(planners.begin(), planners.end(), m.planner) == planners.end())
            planners.push_back(m.planner);

    ReportSummary overall;
    for (const std::string& planner : planners) {
        std::vector<double> success, iters, pos, axis, ts, te, tn;
        for (const TrialMetrics& m : metrics) {
            if (m.planner != planner) continue;
            success.push_back(m.success ? 1.0 : 0.0);
            iters.push_back(m.iterations);
            pos.push_back(m.pos_err_m);
            axis.push_back(m.axis_err_deg);
            ts.push_back(m.t_sample_s);
            te.push_back(m.t_eval_s);
            tn.push_back(m.t_nbv_s);
        }
        const auto posf = finite_only(pos);
        const auto axisf = finite_only(axis);
        ReportSummary s;
        s.success_rate = mean_of(success);
        s.mean_iterations = mean_of(iters);
        s.std_iterations = std_of(iters);
        s.mean_pos_err = mean_of(posf);
        s.std_pos_err = std_of(posf);
        s.mean_axis_err = mean_of(axisf);
        s.std_axis_err = std_of(axisf);
        s.mean_t_sample = mean_of(ts);
        s.mean_t_eval = mean_of(te);
        s.mean_t_nbv = mean_of(tn);

        out << "success_rate," << planner << ',' << fmt(s.success_rate) << ','
            << fmt(std_of(success)) << '\n';
        out << "iterations," << planner << ',' << fmt(s.mean_iterations) << ','
            << fmt(s.std_iterations) << '\n';
        out << "pos_err_m," << planner << ',' << fmt(s.mean_pos_err) << ','
            << fmt(s.std_pos_err) << '\n';
        out << "axis_err_deg," << planner << ',' << fmt(s.mean_axis_err) << ','
            << fmt(s.std_axis_err) << '\n';
        out << "t_sample_s," << planner << ',' << fmt(s.mean_t_sample) << ','
            << fmt(std_of(ts)) << '\n';
        out << "t_eval_s," << planner << ',' << fmt(s.mean_t_eval) << ',' << fmt(std_of(te))
            << '\n';
        out << "t_nbv_s," << planner << ',' << fmt(s.mean_t_nbv) << ',' << fmt(std_of(tn))
            << '\n';
        if (planner == planners.front()) overall = s;
    }
    if (!out) throw Error("failed writing report: " + path);
    out.close();

    // Companion file with the unoccluded-rate series for plotting.
    const std::string un_path = sibling_path(path, "_unoccluded");
    std::ofstream un(un_path);
    if (!un) throw Error("cannot open report file: " + un_path);
    size_t max_un = 0;
    for (const TrialMetrics& m : metrics) max_un = std::max(max_un, m.unoccluded.size());
    un << "planner,seed";
    for (size_t i = 0; i < max_un; ++i) un << ",unoccluded_iter" << i;
    un << '\n';
    for (const TrialMetrics& m : metrics) {
        un << m.planner << ',' << m.seed;
        for (size_t i = 0; i < max_un; ++i) {
            un << ',';
            if (i < m.unoccluded.size()) un << fmt(m.unoccluded[i]);
        }
        un << '\n';
    }
    if (!un) throw Error("failed writing report: " + un_path);
    return overall;
}

void write_pose_dump(const std::vector<TrialMetrics>& metrics, const std::string& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const TrialMetrics& m : metrics) {
        nlohmann::json trial;
        trial["planner"] = m.planner;
        trial["seed"] = m.seed;
        trial["success"] = m.success;
        trial["stop"] = stop_reason_name(m.stop);
        nlohmann::json poses = nlohmann::json::array();
        for (const Viewpoint& vp : m.pose_list) {
            poses.push_back({{"position", {vp.position.x(), vp.position.y(), vp.position.z()}},
                             {"orientation_wxyz",
                              {vp.orientation.w(), vp.orientation.x(), vp.orientation.y(),
                               vp.orientation.z()}}});
        }
        trial["poses"] = std::move(poses);
        doc.push_back(std::move(trial));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open pose dump file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw Error("failed writing pose dump: " + path);
}

}  // namespace gsnbv
