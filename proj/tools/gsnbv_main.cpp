#include <cstdio>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsnbv/harness.hpp"

namespace {

int cmd_run(const std::string& scenario_name, const std::string& planner, int trials,
            uint64_t seed, const std::string& out_path, const std::string& dump_map,
            const std::string& dump_poses, double mask_dropout, int gain_ray_stride) {
    gsnbv::Scenario scenario = gsnbv::resolve_scenario(scenario_name);
    if (mask_dropout >= 0.0) scenario.config.mask_dropout = mask_dropout;
    if (gain_ray_stride > 0) scenario.config.gain_ray_stride = gain_ray_stride;

    const std::vector<gsnbv::TrialMetrics> metrics =
        gsnbv::run_trials(scenario, planner, trials, seed, dump_map);

    if (!out_path.empty()) {
        const gsnbv::ReportSummary s = gsnbv::write_report(metrics, out_path);
        std::printf("report: %s\n", out_path.c_str());
        std::printf("%s on %s: success %.0f%%, mean moves %.2f, pos err %.4f m\n",
                    planner.c_str(), scenario.name.c_str(), 100.0 * s.success_rate,
                    s.mean_iterations, s.mean_pos_err);
    } else {
        int successes = 0;
        for (const auto& m : metrics) successes += m.success ? 1 : 0;
        std::printf("%s on %s: %d/%d trials succeeded\n", planner.c_str(),
                    scenario.name.c_str(), successes, trials);
        for (const auto& m : metrics)
            std::printf("  seed %llu: %s after %d moves (s_pick %.3f)\n",
                        static_cast<unsigned long long>(m.seed),
                        gsnbv::stop_reason_name(m.stop), m.iterations,
                        m.s_pick.empty() ? 0.0 : m.s_pick.back());
    }
    if (!dump_poses.empty()) {
        gsnbv::write_pose_dump(metrics, dump_poses);
        std::printf("poses: %s\n", dump_poses.c_str());
    }
    if (!dump_map.empty()) std::printf("voxel map (trial 0): %s\n", dump_map.c_str());
    return 0;
}

int cmd_render(const std::string& scenario_name, int pose_index, const std::string& out) {
    gsnbv::Scenario scenario = gsnbv::resolve_scenario(scenario_name);

    gsnbv::Viewpoint vp;
    if (pose_index == 0) {
        vp = scenario.initial_viewpoint();
    } else {
        const gsnbv::FruitPose& truth = scenario.scene.fruit_truth;
        const gsnbv::PickingRing ring(truth.position, truth.axis,
                                      scenario.config.ring_radius);
        const double theta = (pose_index - 1) * std::numbers::pi / 4.0;
        vp.position = ring.point_at(theta);
        vp.orientation = gsnbv::look_at_quaternion(vp.position, truth.position);
    }

    const gsnbv::Observation obs =
        gsnbv::render(scenario.scene, scenario.camera, vp);

    const size_t comma = out.find(',');
    if (comma == std::string::npos)
        throw gsnbv::Error("--out wants \"depth.pgm,semantic.pgm\"");
    const std::string depth_path = out.substr(0, comma);
    const std::string sem_path = out.substr(comma + 1);
    gsnbv::write_depth_pgm(obs, depth_path);
    gsnbv::write_semantic_pgm(obs, sem_path);

    int fruit_px = 0, valid_px = 0;
    for (int v = 0; v < obs.height; ++v)
        for (int u = 0; u < obs.width; ++u) {
            if (obs.depth_valid(u, v)) ++valid_px;
            if (obs.has_label(u, v, gsnbv::SemanticClass::Avocado)) ++fruit_px;
        }
    std::printf("rendered pose %d of %s: %d valid px, %d fruit px\n", pose_index,
                scenario.name.c_str(), valid_px, fruit_px);
    std::printf("depth: %s\nsemantic: %s\n", depth_path.c_str(), sem_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry-guided next-best-view planning for occluded fruit picking"};
    app.require_subcommand(1);

    std::string scenario = "group1";
    std::string planner = "gsnbv";
    int trials = 1;
    uint64_t seed = 42;
    std::string out_path, dump_map, dump_poses;
    double mask_dropout = -1.0;
    int gain_ray_stride = 0;

    CLI::App* run = app.add_subcommand("run", "Run planning trials and report metrics");
    run->add_option("--scenario", scenario,
                    "group1, group2, or a path to a scenario JSON file");
    run->add_option("--planner", planner, "gsnbv, random-lite or greedy-lite");
    run->add_option("--trials", trials, "number of trials (seeds seed..seed+n-1)")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "base RNG seed");
    run->add_option("--out", out_path, "write the per-trial CSV report here");
    run->add_option("--dump-map", dump_map, "write trial 0's final voxel grid here");
    run->add_option("--dump-poses", dump_poses, "write every trial's pose list (JSON)");
    run->add_option("--mask-dropout", mask_dropout,
                    "per-pixel semantic dropout rate override")
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--gain-rays", gain_ray_stride,
                    "pixel stride for gain evaluation (override)")
        ->check(CLI::PositiveNumber);

    std::string render_out = "depth.pgm,semantic.pgm";
    int pose_index = 0;
    CLI::App* render = app.add_subcommand("render", "Render one viewpoint to PGM images");
    render->add_option("--scenario", scenario,
                       "group1, group2, or a path to a scenario JSON file");
    render->add_option("--pose-index", pose_index,
                       "0 = initial pose, 1..8 = ring bearings 0,45,...,315 deg")
        ->check(CLI::Range(0, 8));
    render->add_option("--out", render_out, "depth and semantic PGM paths, comma separated");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario, planner, trials, seed, out_path, dump_map, dump_poses,
                           mask_dropout, gain_ray_stride);
        if (render->parsed()) return cmd_render(scenario, pose_index, render_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
