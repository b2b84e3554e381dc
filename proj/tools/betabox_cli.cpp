// Command line front end.
//
// Four subcommands tie the library together: `sample` draws translation
// vectors and writes them with their statistics, `bench` times the six
// samplers against each other, `workspace` runs the cloud, boundary,
// convergence and closeness pipeline for a robot or a calibration toy, and
// `control` builds the closed loop, checks the gain ordering and simulates a
// tracking scenario. Robots come from JSON files looked up by name in the
// config directory (BETABOX_CONFIG_DIR, default ./configs) or by literal
// path. Flags the user does not pass fall back to the defaults block of the
// robot file.
//
// Exit codes: 0 success, 2 bad configuration or bad user input, 3 sampling
// produced no accepted samples, 4 simulation overflow (a diagnostic JSON is
// still written), 1 anything unexpected.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include <betabox/bench.hpp>
#include <betabox/config.hpp>
#include <betabox/control.hpp>
#include <betabox/errors.hpp>
#include <betabox/io.hpp>
#include <betabox/kinematics.hpp>
#include <betabox/sampling.hpp>
#include <betabox/transform.hpp>
#include <betabox/workspace.hpp>

namespace {

using betabox::RobotConfig;

std::string join(const std::string& dir, const char* file) {
    return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

struct SampleArgs {
    std::string robot = "a";
    std::string method = "direct";
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    bool use_sqrt = false;
    std::uint32_t max_attempts = 1000;
    unsigned threads = 1;
    std::string out = ".";
    bool count_given = false;
    bool seed_given = false;
};

int cmd_sample(const SampleArgs& args) {
    const RobotConfig config = betabox::load_robot(args.robot);
    const betabox::TubeSet tubes = config.tube_set();
    const std::uint64_t count = args.count_given ? args.count : config.defaults.sample_count;
    const std::uint64_t seed = args.seed_given ? args.seed : config.defaults.seed;

    const betabox::Method method = betabox::method_from_name(args.method);
    const auto batch = betabox::sample(tubes, method, count, seed, args.use_sqrt,
                                       args.max_attempts, args.threads);
    const auto stats = betabox::batch_stats(batch, tubes);

    std::uint64_t constraint_violations = 0;
    for (Eigen::Index i = 0; i < batch.beta.rows(); ++i) {
        const Eigen::VectorXd beta = batch.beta.row(i).transpose();
        if (!betabox::check_constraints(tubes, beta, config.defaults.tolerance).valid)
            ++constraint_violations;
    }

    ensure_dir(args.out);
    betabox::io::write_samples_csv(join(args.out, "samples.csv"), batch);

    nlohmann::ordered_json doc;
    doc["robot"] = config.name;
    doc["method"] = betabox::method_name(method);
    doc["requested"] = stats.requested;
    doc["seed"] = seed;
    doc["sqrt"] = args.use_sqrt;
    doc["max_attempts"] = args.max_attempts;
    doc["threads"] = args.threads;
    doc["accepted"] = stats.accepted;
    doc["failed"] = stats.failed;
    doc["raw_draws"] = stats.raw_draws;
    doc["success_rate"] = stats.success_rate;
    doc["fail_rate"] = stats.fail_rate;
    doc["mean_attempts"] = stats.mean_attempts;
    doc["theoretical_rate"] = stats.theoretical_rate;
    doc["component_mean"] = betabox::io::json_vector(stats.component_mean);
    doc["tolerance"] = config.defaults.tolerance;
    doc["constraint_violations"] = constraint_violations;
    betabox::io::write_json(join(args.out, "stats.json"), doc);

    if (batch.accepted() == 0) {
        std::cerr << "error: every requested sample failed\n";
        return 3;
    }
    std::cout << "accepted " << stats.accepted << " of " << stats.requested << " samples\n";
    return 0;
}

struct BenchArgs {
    std::string robot = "a";
    std::uint64_t count = 1000;
    int repeats = 5;
    std::uint64_t seed = 0;
    std::uint32_t max_attempts = 1000;
    std::string out;
    bool seed_given = false;
};

int cmd_bench(const BenchArgs& args) {
    const RobotConfig config = betabox::load_robot(args.robot);
    const std::uint64_t seed = args.seed_given ? args.seed : config.defaults.seed;
    const auto report = betabox::run_bench(config.tube_set(), args.count, args.repeats, seed,
                                           args.max_attempts);
    std::cout << betabox::format_bench_table(report);
    if (!args.out.empty()) {
        auto doc = betabox::bench_json(report);
        doc["robot"] = config.name;
        betabox::io::write_json(args.out, doc);
    }
    return 0;
}

struct WorkspaceArgs {
    std::string robot;
    std::string toy;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    bool use_sqrt = false;
    int permutations = 10;
    double concavity = 1.0;
    int grid_steps = 20;
    unsigned threads = 1;
    std::string out = ".";
    bool count_given = false;
    bool seed_given = false;
};

int cmd_workspace(const WorkspaceArgs& args) {
    if (!args.robot.empty() && !args.toy.empty())
        throw betabox::InvalidConfiguration("pass either --robot or --toy, not both");

    std::uint64_t count = args.count_given ? args.count : 2000;
    std::uint64_t seed = args.seed_given ? args.seed : 12345;
    std::string source;
    Eigen::MatrixX2d cloud;
    if (!args.toy.empty()) {
        if (args.toy == "square")
            cloud = betabox::toy_square_points(count, seed);
        else if (args.toy == "disk")
            cloud = betabox::toy_disk_points(count, seed, args.use_sqrt);
        else if (args.toy == "cc")
            cloud = betabox::toy_cc_points(count, seed, args.use_sqrt);
        else
            throw betabox::InvalidConfiguration("unknown toy \"" + args.toy +
                                                "\", expected square, disk or cc");
        source = "toy:" + args.toy;
    } else {
        const RobotConfig config = betabox::load_robot(args.robot.empty() ? "a" : args.robot);
        if (!args.count_given) count = config.defaults.sample_count;
        if (!args.seed_given) seed = config.defaults.seed;
        cloud = betabox::robot_cloud(config.model(), count, seed, args.use_sqrt, args.threads);
        source = config.name;
    }

    ensure_dir(args.out);
    betabox::io::write_points_csv(join(args.out, "cloud.csv"), cloud);

    bool degenerate = false;
    betabox::BoundaryEstimate boundary;
    try {
        boundary = betabox::concave_boundary(cloud, args.concavity);
    } catch (const betabox::DegenerateCloud&) {
        degenerate = true;
        boundary.polygon.clear();
        boundary.area = 0.0;
        boundary.concavity = args.concavity;
    }
    betabox::io::write_polygon_csv(join(args.out, "boundary.csv"), boundary.polygon);

    if (args.grid_steps < 1)
        throw betabox::OutOfRangeInput("need at least one prefix count");
    std::vector<std::uint64_t> counts;
    const std::uint64_t step =
        std::max<std::uint64_t>(1, count / static_cast<std::uint64_t>(args.grid_steps));
    for (std::uint64_t c = step; c < count; c += step)
        if (c >= 3) counts.push_back(c);
    if (count >= 3) counts.push_back(count);
    betabox::ConvergenceCurve curve;
    if (!counts.empty())
        curve = betabox::convergence_curve(cloud, counts, args.concavity, seed,
                                           args.permutations);
    betabox::io::write_curve_csv(join(args.out, "curve.csv"), curve);

    nlohmann::ordered_json samples_to_99;  // null when the curve never gets there
    try {
        if (!counts.empty()) samples_to_99 = betabox::samples_to_fraction(curve, 0.99);
    } catch (const betabox::NoConvergence&) {
    }

    const auto closeness = betabox::closeness_stats(cloud);

    nlohmann::ordered_json doc;
    doc["source"] = source;
    doc["count"] = count;
    doc["seed"] = seed;
    doc["sqrt"] = args.use_sqrt;
    doc["concavity"] = args.concavity;
    doc["permutations"] = args.permutations;
    doc["threads"] = args.threads;
    doc["degenerate"] = degenerate;
    doc["area"] = boundary.area;
    doc["threshold_radius"] = boundary.threshold_radius;
    doc["full_area"] = curve.full_area;
    doc["samples_to_99"] = samples_to_99;
    doc["closeness"] = {{"mean", closeness.mean},
                        {"stddev", closeness.stddev},
                        {"median_of_medians", closeness.median_of_medians},
                        {"block", closeness.block},
                        {"pairs", closeness.pairs}};
    betabox::io::write_json(join(args.out, "workspace.json"), doc);

    std::cout << "cloud of " << count << " points, boundary area " << boundary.area << "\n";
    return 0;
}

struct ControlArgs {
    std::string robot = "a";
    std::vector<double> kp;
    std::vector<double> ki;
    std::string scenario = "step";
    double amplitude = 0.5;
    double dt = 0.01;
    double horizon = 20.0;
    bool transformed = false;
    bool saturate = false;
    double norm_bound = 1e9;
    std::string out = ".";
};

int cmd_control(const ControlArgs& args) {
    const RobotConfig config = betabox::load_robot(args.robot);
    const betabox::TubeSet tubes = config.tube_set();

    Eigen::VectorXd kp = config.kp;
    Eigen::VectorXd ki = config.ki;
    if (!args.kp.empty())
        kp = Eigen::Map<const Eigen::VectorXd>(args.kp.data(),
                                               static_cast<Eigen::Index>(args.kp.size()));
    if (!args.ki.empty())
        ki = Eigen::Map<const Eigen::VectorXd>(args.ki.data(),
                                               static_cast<Eigen::Index>(args.ki.size()));
    const betabox::PiGains gains(kp, ki);
    const auto ordering = betabox::gain_ordering_check(gains);

    const auto t = betabox::build_transform(tubes);
    const auto vanilla = betabox::build_closed_loop(gains);
    const auto ss = args.transformed ? betabox::transform_state_space(vanilla, t) : vanilla;
    const auto spectrum_vanilla = betabox::eigenvalues(vanilla.A);
    const auto spectrum_run = betabox::eigenvalues(ss.A);

    const Eigen::Index n = static_cast<Eigen::Index>(tubes.size());
    std::function<Eigen::VectorXd(double)> reference;
    if (args.scenario == "step") {
        const Eigen::VectorXd corner = Eigen::VectorXd::Constant(n, args.amplitude);
        const Eigen::VectorXd target = t.M * corner;
        reference = [target](double) { return target; };
    } else if (args.scenario == "hold") {
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
        reference = [zero](double) { return zero; };
    } else if (args.scenario == "sine") {
        const Eigen::MatrixXd m = t.M;
        const double amplitude = args.amplitude;
        reference = [m, amplitude, n](double time) {
            Eigen::VectorXd u(n);
            for (Eigen::Index i = 0; i < n; ++i)
                u[i] = 0.5 + 0.5 * amplitude *
                                 std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) *
                                          time / 10.0);
            return Eigen::VectorXd(m * u);
        };
    } else {
        throw betabox::InvalidConfiguration("unknown scenario \"" + args.scenario +
                                            "\", expected step, sine or hold");
    }

    nlohmann::ordered_json doc;
    doc["robot"] = config.name;
    doc["kp"] = betabox::io::json_vector(kp);
    doc["ki"] = betabox::io::json_vector(ki);
    doc["scenario"] = args.scenario;
    doc["amplitude"] = args.amplitude;
    doc["dt"] = args.dt;
    doc["horizon"] = args.horizon;
    doc["transformed"] = args.transformed;
    doc["saturate"] = args.saturate;
    doc["norm_bound"] = args.norm_bound;
    doc["ordering"] = {{"pass", ordering.pass()},
                       {"kp_violations", ordering.kp_violations},
                       {"ki_violations", ordering.ki_violations}};
    doc["spectrum_vanilla"] = betabox::io::json_spectrum(spectrum_vanilla);
    doc["spectrum_run"] = betabox::io::json_spectrum(spectrum_run);

    ensure_dir(args.out);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * n);
    betabox::Trajectory traj;
    try {
        traj = betabox::simulate(ss, reference, args.dt, args.horizon, x0, args.saturate, tubes,
                                 args.norm_bound);
    } catch (const betabox::NumericalOverflow& e) {
        doc["overflow"] = true;
        doc["error"] = e.what();
        betabox::io::write_json(join(args.out, "analysis.json"), doc);
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }

    doc["overflow"] = false;
    doc["steps"] = traj.time.size();
    doc["violations"] = traj.violation_count();
    doc["worst_violation_mm"] = traj.worst_violation;
    betabox::io::write_json(join(args.out, "analysis.json"), doc);
    betabox::io::write_trajectory_csv(join(args.out, "trajectory.csv"), traj);

    std::cout << "simulated " << traj.time.size() << " steps, " << traj.violation_count()
              << " constraint violations\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"translation joint space toolkit"};
    app.require_subcommand(1);

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "draw translation vectors and write them as CSV");
    sample->add_option("--robot", sample_args.robot, "robot name or config path");
    sample->add_option("--method", sample_args.method,
                       "reject_a, reject_b, reject_c, reject_d, direct or direct_batch");
    auto* sample_count =
        sample->add_option("--count", sample_args.count, "samples to draw (default from config)");
    auto* sample_seed =
        sample->add_option("--seed", sample_args.seed, "base seed (default from config)");
    sample->add_flag("--sqrt", sample_args.use_sqrt, "volumetric reshaping of the unit draws");
    sample->add_option("--max-attempts", sample_args.max_attempts,
                       "resampling cap per sample for the rejection family");
    sample->add_option("--threads", sample_args.threads, "worker threads, output independent");
    sample->add_option("--out", sample_args.out, "output directory");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "time the six samplers against each other");
    bench->add_option("--robot", bench_args.robot, "robot name or config path");
    bench->add_option("--count", bench_args.count, "samples per batch");
    bench->add_option("--repeats", bench_args.repeats, "rounds per method");
    auto* bench_seed =
        bench->add_option("--seed", bench_args.seed, "base seed (default from config)");
    bench->add_option("--max-attempts", bench_args.max_attempts,
                      "resampling cap per sample for the rejection family");
    bench->add_option("--out", bench_args.out, "also write the report as JSON to this path");

    WorkspaceArgs workspace_args;
    auto* workspace =
        app.add_subcommand("workspace", "cloud, boundary, convergence and closeness pipeline");
    workspace->add_option("--robot", workspace_args.robot, "robot name or config path");
    workspace->add_option("--toy", workspace_args.toy, "calibration cloud: square, disk or cc");
    auto* workspace_count =
        workspace->add_option("--count", workspace_args.count, "cloud size (default from config)");
    auto* workspace_seed =
        workspace->add_option("--seed", workspace_args.seed, "base seed (default from config)");
    workspace->add_flag("--sqrt", workspace_args.use_sqrt, "volumetric reshaping of the draws");
    workspace->add_option("--permutations", workspace_args.permutations,
                          "shufflings for the convergence band");
    workspace->add_option("--concavity", workspace_args.concavity,
                          "boundary tightness in [0, 1], 0 keeps the convex hull");
    workspace->add_option("--grid-steps", workspace_args.grid_steps,
                          "prefix counts on the convergence curve");
    workspace->add_option("--threads", workspace_args.threads,
                          "worker threads, output independent");
    workspace->add_option("--out", workspace_args.out, "output directory");

    ControlArgs control_args;
    auto* control =
        app.add_subcommand("control", "closed loop construction, gain checks and simulation");
    control->add_option("--robot", control_args.robot, "robot name or config path");
    control->add_option("--kp", control_args.kp, "proportional gains, one per tube");
    control->add_option("--ki", control_args.ki, "integral gains, one per tube");
    control->add_option("--scenario", control_args.scenario, "step, sine or hold");
    control->add_option("--amplitude", control_args.amplitude,
                        "reference size as a fraction of the feasible box");
    control->add_option("--dt", control_args.dt, "integration step in seconds");
    control->add_option("--T", control_args.horizon, "simulation horizon in seconds");
    control->add_flag("--transformed", control_args.transformed,
                      "simulate in the disentangled coordinates");
    control->add_flag("--saturate", control_args.saturate,
                      "clamp outputs to the feasible box before constraint checks");
    control->add_option("--norm-bound", control_args.norm_bound,
                        "state norm treated as numerical overflow");
    control->add_option("--out", control_args.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    sample_args.count_given = sample_count->count() > 0;
    sample_args.seed_given = sample_seed->count() > 0;
    bench_args.seed_given = bench_seed->count() > 0;
    workspace_args.count_given = workspace_count->count() > 0;
    workspace_args.seed_given = workspace_seed->count() > 0;

    try {
        if (app.got_subcommand(sample)) return cmd_sample(sample_args);
        if (app.got_subcommand(bench)) return cmd_bench(bench_args);
        if (app.got_subcommand(workspace)) return cmd_workspace(workspace_args);
        if (app.got_subcommand(control)) return cmd_control(control_args);
    } catch (const betabox::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
