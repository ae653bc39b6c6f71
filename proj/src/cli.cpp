#include "rfsde/cli.hpp"

#include "rfsde/config.hpp"
#include "rfsde/errors.hpp"
#include "rfsde/output.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>
#include <optional>
#include <thread>

namespace rfsde {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    unsigned threads = 1;
    bool svg = false;
    bool circulant = false;
    std::optional<double> eps;
    std::size_t rep = 0;
    double t = 0.5;
};

class Stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Session {
    LoadedConfig loaded;
    out::RunManifest manifest;
    fs::path dir;
    Stopwatch clock;
};

Session open_session(const std::string& command, const Options& opt, std::ostream& err)
{
    LoadedConfig loaded = load_config(opt.config_path);
    if (opt.seed) loaded.config.master_seed = *opt.seed;
    if (opt.circulant) loaded.config.fbm_method = FbmMethod::circulant;
    for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';

    // Overrides change the effective config, so they are part of the hash.
    json canon = json::parse(loaded.canonical);
    canon["seed"] = loaded.config.master_seed;
    canon["fbm_method"] = opt.circulant ? "circulant" : "cholesky";
    loaded.canonical = canon.dump();

    out::RunManifest manifest(command, loaded.canonical, loaded.config.master_seed);
    manifest.set_grid(loaded.config.H, loaded.config.T, loaded.config.n);
    return Session{std::move(loaded), std::move(manifest), fs::path(opt.out_dir), Stopwatch{}};
}

double pick_epsilon(const ExperimentConfig& cfg, const Options& opt)
{
    if (opt.eps) {
        if (!(*opt.eps >= 0.0)) throw ConfigError("--eps must be nonnegative");
        return *opt.eps;
    }
    if (cfg.epsilons.empty()) throw ConfigError("config key 'epsilons': empty and no --eps given");
    return cfg.epsilons.front();
}

void cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("simulate", opt, err);
    const ExperimentConfig& cfg = s.loaded.config;
    const double eps = pick_epsilon(cfg, opt);
    const Grid grid(cfg.T, cfg.n);
    const FbmPath B = sample_fbm(cfg.H, cfg.n, cfg.T, SeedSpec{cfg.master_seed, opt.rep}, cfg.fbm_method);
    s.manifest.add_timing("sample_fbm", s.clock.lap());
    const Eigen::VectorXd noise = eps * B.values;
    const ReflectedPath path = solve_reflected(cfg.drift, cfg.tube, noise, cfg.x0, grid);
    s.manifest.add_timing("solve", s.clock.lap());
    s.manifest.write_file(s.dir, "path.csv", out::csv_path(path));
    s.manifest.write(s.dir);
    out << "wrote " << (s.dir / "path.csv").string() << '\n';
}

void cmd_trend(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("trend", opt, err);
    const ExperimentConfig& cfg = s.loaded.config;
    const Grid grid(cfg.T, cfg.n);
    const TrendSolution sol = solve_trend(cfg.drift, cfg.tube, cfg.x0, grid);
    s.manifest.add_timing("solve", s.clock.lap());
    s.manifest.write_file(s.dir, "trend.csv", out::csv_trend(sol));
    s.manifest.write(s.dir);
    out << "wrote " << (s.dir / "trend.csv").string() << '\n';
}

void cmd_estimate(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("estimate", opt, err);
    ExperimentConfig cfg = s.loaded.config;
    if (opt.eps) cfg.epsilons = {pick_epsilon(cfg, opt)};
    cfg.replications = std::max<std::size_t>(cfg.replications, opt.rep + 1);
    const Experiment exp(cfg);
    s.manifest.add_timing("setup", s.clock.lap());

    const Eigen::VectorXd B = exp.noise_path(opt.rep);
    out::CsvTable table({"t", "tau", "epsilon", "bandwidth", "tau_hat"});
    json summary{{"replication", opt.rep}, {"estimates", json::array()}};
    for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
        const double eps = cfg.epsilons[e];
        const Eigen::VectorXd noise = eps * B;
        const ReflectedPath path = solve_reflected(cfg.drift, exp.tube(), noise, cfg.x0, exp.grid());
        const Eigen::VectorXd tau_hat = estimate_trend(path.X, exp.weights(e));
        for (std::size_t i = 0; i < exp.eval_indices().size(); ++i) {
            const auto k = static_cast<Eigen::Index>(exp.eval_indices()[i]);
            table.add_row(std::vector<double>{exp.eval_times()[i], exp.trend().tau[k], eps, exp.bandwidth(e),
                                              tau_hat[static_cast<Eigen::Index>(i)]});
        }
        const ErrorDecomposition d = decompose_error(path, exp.trend(), B, cfg.drift, eps, exp.estimator_config(e),
                                                     exp.decomposition_time());
        double sup = 0.0;
        for (std::size_t i = 0; i < exp.eval_indices().size(); ++i)
            sup = std::max(sup, std::abs(tau_hat[static_cast<Eigen::Index>(i)] -
                                         exp.trend().tau[static_cast<Eigen::Index>(exp.eval_indices()[i])]));
        summary["estimates"].push_back({{"epsilon", eps},
                                        {"bandwidth", exp.bandwidth(e)},
                                        {"sup_error", sup},
                                        {"decomposition", out::to_json(d)}});
    }
    s.manifest.add_timing("estimate", s.clock.lap());
    s.manifest.write_file(s.dir, "estimate.csv", table.str());
    s.manifest.write_file(s.dir, "estimate.json", summary.dump(2) + "\n");
    s.manifest.write(s.dir);
    out << "wrote " << (s.dir / "estimate.csv").string() << '\n';
}

void cmd_risk_sweep(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("risk-sweep", opt, err);
    const Experiment exp(s.loaded.config);
    s.manifest.add_timing("setup", s.clock.lap());
    const RiskReport report = risk_sweep(exp, opt.threads);
    s.manifest.add_timing("replications", s.clock.lap());
    s.manifest.write_file(s.dir, "risk_curve.csv", out::csv_risk_curve(report));
    s.manifest.write_file(s.dir, "risk_report.json", out::to_json(report).dump(2) + "\n");
    if (opt.svg) s.manifest.write_file(s.dir, "risk_curve.svg", out::svg_risk_curve(report));
    s.manifest.write(s.dir);
    if (report.slope_available)
        out << "slope " << out::format_double(report.slope.slope) << " (target "
            << out::format_double(report.target_slope) << ")\n";
    else
        out << "slope unavailable\n";
}

void cmd_state_scaling(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("state-scaling", opt, err);
    const Experiment exp(s.loaded.config);
    s.manifest.add_timing("setup", s.clock.lap());
    const StateScalingReport report = state_scaling_study(exp, opt.threads);
    s.manifest.add_timing("replications", s.clock.lap());
    s.manifest.write_file(s.dir, "state_scaling.csv", out::csv_state_scaling(report));
    s.manifest.write_file(s.dir, "state_scaling.json", out::to_json(report).dump(2) + "\n");
    s.manifest.write(s.dir);
    out << "state slope " << out::format_double(report.state_slope.slope) << " (target 2)\n";
}

void cmd_asymptotics(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("asymptotics", opt, err);
    const Experiment exp(s.loaded.config);
    s.manifest.add_timing("setup", s.clock.lap());
    const AsymptoticReport report = asymptotic_study(exp, opt.t, opt.threads);
    s.manifest.add_timing("replications", s.clock.lap());
    s.manifest.write_file(s.dir, "asymptotics.json", out::to_json(report).dump(2) + "\n");
    s.manifest.write(s.dir);
    out << "sigma2_HK " << out::format_double(report.sigma2) << ", mu " << out::format_double(report.mu)
        << ", extrapolated mu " << out::format_double(report.extrapolated_mu) << '\n';
}

void cmd_sigma2(const Options& opt, std::ostream& out, std::ostream& err)
{
    Session s = open_session("sigma2", opt, err);
    const ExperimentConfig& cfg = s.loaded.config;
    const double v = sigma2_hk(cfg.kernel, cfg.H);
    s.manifest.add_timing("quadrature", s.clock.lap());
    const json j{{"kernel", kernel_name(cfg.kernel.family)},
                 {"scale", cfg.kernel.scale},
                 {"H", cfg.H},
                 {"sigma2_HK", v}};
    s.manifest.write_file(s.dir, "sigma2.json", j.dump(2) + "\n");
    s.manifest.write(s.dir);
    out << out::format_double(v) << '\n';
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Reflected fractional SDE toolkit: simulation, trend estimation and rate studies", "rfsde"};
    app.require_subcommand(1, 1);
    Options opt;

    using Handler = void (*)(const Options&, std::ostream&, std::ostream&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"simulate", "dump one reflected path (t, X, Y, W, l, u)", cmd_simulate},
        {"trend", "dump the noiseless solution and its regimes", cmd_trend},
        {"estimate", "trend estimate and error decomposition for one path", cmd_estimate},
        {"risk-sweep", "Monte Carlo risk curve and log-log slope", cmd_risk_sweep},
        {"state-scaling", "eps^2 scaling of the sup distance to the noiseless solution", cmd_state_scaling},
        {"asymptotics", "pointwise variance and bias limits", cmd_asymptotics},
        {"sigma2", "print the asymptotic variance constant for the kernel and H", cmd_sigma2},
    };
    std::vector<std::pair<CLI::App*, Handler>> subs;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", opt.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", opt.seed, "override the master seed");
        sub->add_option("--out-dir", opt.out_dir, "output directory");
        sub->add_option("--threads", opt.threads, "replication workers")->check(CLI::Range(1u, 1024u));
        sub->add_flag("--circulant", opt.circulant, "sample fBm by circulant embedding");
        if (name == "simulate" || name == "estimate") {
            sub->add_option("--eps", opt.eps, "noise level (default: first of 'epsilons')");
            sub->add_option("--rep", opt.rep, "replication stream index");
        }
        if (name == "risk-sweep") sub->add_flag("--svg", opt.svg, "also write risk_curve.svg");
        if (name == "asymptotics") sub->add_option("--t", opt.t, "evaluation time");
        subs.emplace_back(sub, fn);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        for (const auto& [sub, fn] : subs)
            if (sub->parsed()) fn(opt, out, err);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kExitPrecondition;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, char** argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace rfsde
