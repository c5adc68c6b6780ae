#pragma once

#include <string>
#include <vector>

#include "gsnbv/baselines.hpp"
#include "gsnbv/planner.hpp"
#include "gsnbv/scenarios.hpp"

namespace gsnbv {

// Everything the report needs from one planning trial.
struct TrialMetrics {
    std::string planner;
    uint64_t seed = 0;
    bool success = false;
    int iterations = 0;  // planning moves executed
    StopReason stop = StopReason::MaxIterations;
    double pos_err_m = 0.0;     // final estimate vs ground truth
    double axis_err_deg = 0.0;
    std::vector<double> s_pick;      // one entry per sensing step
    std::vector<double> unoccluded;  // 1 - s_occ per sensing step
    std::vector<double> arc_measure;              // post-subtraction, per step
    std::vector<double> arc_measure_reprojected;  // pre-subtraction, per step
    double t_sample_s = 0.0;  // summed over steps
    double t_eval_s = 0.0;
    double t_nbv_s = 0.0;
    double final_bearing_rad = 0.0;  // final pose on the ground-truth ring
    std::vector<Viewpoint> pose_list;
};

// Planner registry for the CLI names.
using PlannerFn = PlanResult (*)(const Scene&, const CameraModel&, const Viewpoint&,
                                 const PlannerConfig&, std::mt19937_64&);
PlannerFn planner_by_name(const std::string& name);  // throws Error on unknown names

// One full planning run with metrics extraction. When map_dump_path is
// non-empty the trial's final voxel grid is written there.
TrialMetrics run_trial(const Scenario& scenario, const std::string& planner,
                       uint64_t seed, const std::string& map_dump_path = "");

// Trial i runs with seed base_seed + i; order of results is by trial index.
// Worker count: GSNBV_THREADS when set, else the hardware concurrency,
// always clamped to the trial count. Only the first trial honours
// map_dump_path.
std::vector<TrialMetrics> run_trials(const Scenario& scenario, const std::string& planner,
                                     int n_trials, uint64_t base_seed,
                                     const std::string& map_dump_path = "");

struct ReportSummary {
    double success_rate = 0.0;
    double mean_iterations = 0.0, std_iterations = 0.0;
    double mean_pos_err = 0.0, std_pos_err = 0.0;
    double mean_axis_err = 0.0, std_axis_err = 0.0;
    double mean_t_sample = 0.0, mean_t_eval = 0.0, mean_t_nbv = 0.0;
};

// Writes the per-trial CSV (fixed columns, then s_pick per sensing step,
// then timing columns), a summary block after a blank line, and a sibling
// "<stem>_unoccluded.csv" with the per-iteration unoccluded rates.
// Throws Error on empty metrics or IO failure.
ReportSummary write_report(const std::vector<TrialMetrics>& metrics,
                           const std::string& path);

// The pose lists of every trial as a JSON document.
void write_pose_dump(const std::vector<TrialMetrics>& metrics, const std::string& path);

const char* stop_reason_name(StopReason reason);

}  // namespace gsnbv
