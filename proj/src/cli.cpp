#include "casym/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casym/analysis.hpp"
#include "casym/config.hpp"
#include "casym/csv.hpp"
#include "casym/engine.hpp"
#include "casym/errors.hpp"
#include "casym/fluid.hpp"
#include "casym/fokker_planck.hpp"
#include "casym/scenarios.hpp"

namespace casym {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = ".";
    int runs = 0;
    long iters = -1;
    std::vector<std::string> sets;
    int threads = -1;
};

struct Extra {
    int bins = 20;
    std::vector<double> rho;
    std::string posts;
    std::string followers;
    std::size_t max_lag = 30;
    std::string input;
    std::string id_column;
};

struct Context {
    std::string subcommand;
    CLI::App* app = nullptr;
    CommonArgs args;
    Extra extra;
    ModelConfig config;
    int threads = 0;
    fs::path out;
    std::vector<std::string> outputs;
    std::ostream* log = nullptr;
};

std::string fmt(double v) { return format_double(v); }

bool overrides_key(const std::vector<std::string>& sets, const std::string& key) {
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq != std::string::npos && s.substr(0, eq) == key) return true;
    }
    return false;
}

int resolve_threads(const Context& ctx, int from_config) {
    if (ctx.args.threads >= 0) return ctx.args.threads;
    if (const char* env = std::getenv("ASYM_SIM_THREADS")) {
        try {
            int t = std::stoi(env);
            if (t >= 0) return t;
        } catch (const std::exception&) {
        }
        throw ValidationError("ASYM_SIM_THREADS: expected a non-negative integer");
    }
    return from_config;
}

void prepare(Context& ctx, bool needs_config = true) {
    ModelConfig base = ctx.args.config.empty() ? default_config() : load_config(ctx.args.config);
    std::vector<std::string> sets = ctx.args.sets;
    if (ctx.app->count("--seed")) sets.push_back("run.seed=" + std::to_string(ctx.args.seed));
    if (ctx.args.runs > 0) sets.push_back("run.runs=" + std::to_string(ctx.args.runs));
    if (ctx.args.iters >= 0) sets.push_back("run.n_iter=" + std::to_string(ctx.args.iters));
    ctx.config = needs_config ? with_overrides(base, sets) : base;
    ctx.threads = resolve_threads(ctx, ctx.config.run.threads);
    ctx.out = ctx.args.out;
    fs::create_directories(ctx.out);
}

void write_manifest(const Context& ctx, const json& extra = json::object()) {
    json m;
    m["tool"] = "casym";
    m["version"] = kVersion;
    m["subcommand"] = ctx.subcommand;
    m["seed"] = ctx.config.run.seed;
    m["runs"] = ctx.config.run.runs;
    m["iters"] = ctx.config.run.n_iter;
    m["overrides"] = ctx.args.sets;
    m["config"] = config_to_json(ctx.config);
    m["outputs"] = ctx.outputs;
    for (const auto& item : extra.items()) m[item.key()] = item.value();
    std::ofstream f(ctx.out / "manifest.json");
    f << m.dump(2) << '\n';
}

CsvWriter open_csv(Context& ctx, const std::string& name, const std::vector<std::string>& header) {
    ctx.outputs.push_back(name);
    return CsvWriter(ctx.out / name, header);
}

std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

template <class... V>
std::vector<std::string> concat(std::vector<std::string> a, const V&... rest) {
    (a.insert(a.end(), rest.begin(), rest.end()), ...);
    return a;
}

std::vector<std::string> fmt_all(const std::vector<double>& v) {
    std::vector<std::string> out;
    for (double x : v) out.push_back(fmt(x));
    return out;
}

// ---- subcommands ----

int cmd_simulate(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    Trajectory tr = run(c, c.run.seed, c.run.n_iter);
    const std::size_t ni = c.influencers.size();
    const std::size_t d = static_cast<std::size_t>(c.space.dims);
    auto w = open_csv(ctx, "trajectory.csv", concat({"step"}, indexed("pi_", ni), indexed("meanx_", d)));
    for (std::size_t s = 0; s < tr.size(); ++s)
        w.row(concat({std::to_string(tr.steps[s])}, fmt_all(tr.pi[s]), fmt_all(tr.mean_opinion[s])));

    Histogram h = opinion_histogram(*tr.final_state, c.space, ctx.extra.bins);
    auto hw = open_csv(ctx, "histogram.csv", concat(indexed("bin_", d), std::vector<std::string>{"count"}));
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t cell = 0; cell < h.counts.size(); ++cell) {
        std::size_t rem = cell;
        for (std::size_t k = d; k-- > 0;) {
            idx[k] = rem % static_cast<std::size_t>(h.bins);
            rem /= static_cast<std::size_t>(h.bins);
        }
        std::vector<std::string> row;
        for (auto b : idx) row.push_back(std::to_string(b));
        row.push_back(std::to_string(h.counts[cell]));
        hw.row(row);
    }
    write_manifest(ctx, {{"bins", ctx.extra.bins}});
    return 0;
}

int cmd_ensemble(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    auto seeds = consecutive_seeds(c.run.seed, c.run.runs);
    EnsembleResult r = ensemble(c, seeds, c.run.n_iter, c.run.tail_samples, ctx.threads);
    auto w = open_csv(ctx, "ensemble.csv", {"influencer_id", "pi_mean", "ci_low", "ci_high"});
    for (std::size_t i = 0; i < r.pi_mean.size(); ++i)
        w.row({std::to_string(i), fmt(r.pi_mean[i]), fmt(r.pi_ci_low[i]), fmt(r.pi_ci_high[i])});
    auto wo = open_csv(ctx, "ensemble_opinion.csv", {"axis", "mean", "ci_low", "ci_high"});
    for (std::size_t k = 0; k < r.opinion_mean.size(); ++k)
        wo.row({std::to_string(k), fmt(r.opinion_mean[k]), fmt(r.opinion_ci_low[k]), fmt(r.opinion_ci_high[k])});
    auto wr = open_csv(ctx, "ensemble_runs.csv",
                       concat({"run", "seed"}, indexed("pi_", r.pi_mean.size()), indexed("meanx_", r.opinion_mean.size())));
    for (std::size_t k = 0; k < seeds.size(); ++k)
        wr.row(concat({std::to_string(k), std::to_string(seeds[k])}, fmt_all(r.run_pi[k]), fmt_all(r.run_opinion[k])));
    write_manifest(ctx);
    return 0;
}

JointOptions joint_options(const ModelConfig& c) {
    JointOptions opt;
    opt.inner.tolerance = std::min(1e-12, c.solver.tolerance);
    opt.max_outer = c.solver.max_outer;
    return opt;
}

int cmd_fluid(Context& ctx) {
    prepare(ctx);
    FluidProblem p = FluidProblem::from_config(ctx.config);
    FixedPointSolution s = joint_fixed_point(p, joint_options(ctx.config));
    auto w = open_csv(ctx, "fluid.csv", {"z", "xbar"});
    for (std::size_t k = 0; k < s.z.size(); ++k) w.row({fmt(s.z[k]), fmt(s.xbar[k])});
    auto wp = open_csv(ctx, "fluid_popularity.csv", {"influencer_id", "pi"});
    for (std::size_t i = 0; i < s.pi.size(); ++i) wp.row({std::to_string(i), fmt(s.pi[i])});
    write_manifest(ctx, {{"residual", s.residual}, {"iterations", s.iterations}, {"converged", s.converged}});
    if (!s.converged) {
        *ctx.log << "fixed-point iteration did not converge (residual " << s.residual << " after " << s.iterations
                 << " outer iterations); last iterate written\n";
        return 2;
    }
    return 0;
}

int cmd_fpa_scan(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    std::vector<double> rhos = c.solver.rho_values;
    if (overrides_key(ctx.args.sets, "kernels.rho")) rhos = {c.kernels.rho};
    else if (!ctx.extra.rho.empty()) rhos = ctx.extra.rho;
    auto rows = fpa_scan(c, rhos, joint_options(c));
    auto w = open_csv(ctx, "fpa.csv", {"rho", "pi1_fpa", "xbar", "n_fixed_points", "stable_points"});
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.solution.converged;
        std::string stable;
        for (double v : r.scan.stable_points()) stable += (stable.empty() ? "" : ";") + fmt(v);
        std::string xbar;
        for (double v : r.solution.xbar) xbar += (xbar.empty() ? "" : ";") + fmt(v);
        double pi1 = r.solution.pi.size() > 1 ? r.solution.pi[1] : r.solution.pi[0];
        w.row({fmt(r.rho), fmt(pi1), xbar, std::to_string(r.scan.fixed_points.size()), stable});
    }
    write_manifest(ctx, {{"rho_values", rhos}});
    if (!ok) {
        *ctx.log << "at least one fixed-point solve did not converge; see fpa.csv\n";
        return 2;
    }
    return 0;
}

int cmd_fp_density(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    FluidProblem p = FluidProblem::from_config(c);
    FixedPointSolution s = joint_fixed_point(p, joint_options(c));
    if (!s.converged) throw ConvergenceError("fixed-point iteration for the popularities did not converge");
    FpSettings fs;
    fs.variance = c.solver.variance;
    auto grid = uniform_grid(c.space.lower, c.space.upper, c.solver.density_nodes);
    StationaryDensity d = stationary_density(s.pi, grid, p, fs);
    auto w = open_csv(ctx, "density.csv", {"z", "x", "f"});
    for (std::size_t k = 0; k < d.z.size(); ++k)
        for (std::size_t j = 0; j < d.x.size(); ++j) w.row({fmt(d.z[k]), fmt(d.x[j]), fmt(d.density[k][j])});
    auto we = open_csv(ctx, "equilibrium.csv", {"z", "x", "stable"});
    for (double z : p.prejudice.nodes)
        for (const auto& e : equilibrium_points(z, s.pi, grid, p)) we.row({fmt(z), fmt(e.x), e.stable ? "1" : "0"});
    write_manifest(ctx, {{"pi", s.pi}});
    return 0;
}

int cmd_sweep(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    if (!c.sweep) throw ValidationError("sweep: config has no sweep section");
    SweepSpec spec = *c.sweep;
    if (ctx.args.runs > 0) spec.runs = ctx.args.runs;
    auto rows = run_sweep(c, spec, ctx.threads);
    const std::size_t ni = c.influencers.size();
    const std::size_t d = static_cast<std::size_t>(c.space.dims);
    auto w = open_csv(ctx, "sweep.csv", concat({"param", "value", "run"}, indexed("pi_", ni), indexed("meanx_", d)));
    auto ws = open_csv(ctx, "sweep_summary.csv", {"param", "value", "influencer_id", "pi_mean", "ci_low", "ci_high"});
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.result.run_pi.size(); ++k)
            w.row(concat({spec.param, fmt(r.value), std::to_string(k)}, fmt_all(r.result.run_pi[k]),
                         fmt_all(r.result.run_opinion[k])));
        for (std::size_t i = 0; i < ni; ++i)
            ws.row({spec.param, fmt(r.value), std::to_string(i), fmt(r.result.pi_mean[i]), fmt(r.result.pi_ci_low[i]),
                    fmt(r.result.pi_ci_high[i])});
    }
    write_manifest(ctx);
    return 0;
}

int cmd_case_study(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    if (!c.case_study) throw ValidationError("case_study: config has no case_study section");
    auto seeds = consecutive_seeds(c.run.seed, c.run.runs);
    CaseStudyResult r = run_case_study(c, seeds, ctx.threads);
    auto w = open_csv(ctx, "case_study.csv", {"week", "pi_conte", "ci_low", "ci_high"});
    for (std::size_t k = 0; k < r.weeks.size(); ++k)
        w.row({std::to_string(r.weeks[k]), fmt(r.pi_mean[k]), fmt(r.ci_low[k]), fmt(r.ci_high[k])});
    auto wr = open_csv(ctx, "case_study_runs.csv",
                       {"run", "seed", "pi_window_start", "pi_window_end", "rise", "min_after_window"});
    for (std::size_t k = 0; k < r.runs.size(); ++k) {
        const auto& x = r.runs[k];
        wr.row({std::to_string(k), std::to_string(x.seed), fmt(x.pi_window_start), fmt(x.pi_window_end),
                fmt(x.rise()), fmt(x.min_after_window)});
    }
    write_manifest(ctx, {{"mean_rise", r.mean_rise()}, {"rise_flag", r.rise_flag()}});
    return 0;
}

int cmd_sensitivity(Context& ctx) {
    prepare(ctx);
    const auto& c = ctx.config;
    auto seeds = consecutive_seeds(c.run.seed, c.run.runs);
    auto rows = run_sensitivity(c, sensitivity_table(), seeds, ctx.threads);
    auto w = open_csv(ctx, "sensitivity.csv", {"scenario", "week", "pi_conte", "ci_low", "ci_high"});
    auto ws = open_csv(ctx, "sensitivity_summary.csv",
                       {"scenario", "alpha", "beta", "theta_scale", "x_conte", "x_salvini", "rise", "rise_flag"});
    for (const auto& r : rows) {
        const auto& s = r.scenario;
        for (std::size_t k = 0; k < r.result.weeks.size(); ++k)
            w.row({std::to_string(s.id), std::to_string(r.result.weeks[k]), fmt(r.result.pi_mean[k]),
                   fmt(r.result.ci_low[k]), fmt(r.result.ci_high[k])});
        ws.row({std::to_string(s.id), fmt(s.alpha), fmt(s.beta), fmt(s.theta_scale), fmt(s.x_conte), fmt(s.x_salvini),
                fmt(r.result.mean_rise()), r.result.rise_flag() ? "1" : "0"});
    }
    write_manifest(ctx);
    return 0;
}

int cmd_analyze(Context& ctx) {
    prepare(ctx, false);
    auto posts = read_posts(ctx.extra.posts);
    auto groups = group_posts(posts);
    std::set<std::string> topic_set;
    for (const auto& p : posts)
        if (p.labeled()) topic_set.insert(*p.topic);
    std::vector<std::string> topics(topic_set.begin(), topic_set.end());

    auto wc = open_csv(ctx, "consistency.csv",
                       {"influencer_id", "reference_topic", "consistency", "labeled_posts", "tie"});
    auto wa = open_csv(ctx, "acov.csv", {"influencer_id", "topic", "lag", "value"});
    for (const auto& [id, ps] : groups) {
        ConsistencyEstimate e;
        try {
            e = consistency_estimate(ps);
        } catch (const UndefinedStatisticError& ex) {
            *ctx.log << "warning: " << id << ": " << ex.what() << '\n';
            continue;
        }
        wc.row({id, e.reference_topic, fmt(e.consistency), std::to_string(e.labeled_posts), e.tie ? "1" : "0"});
        if (e.tie) *ctx.log << "warning: " << id << ": reference topic tie broken lexicographically\n";
        for (const auto& [topic, seq] : indicator_sequences(ps, e.reference_topic, topics)) {
            if (seq.size() <= ctx.extra.max_lag) {
                *ctx.log << "warning: " << id << "/" << topic << ": sequence shorter than max lag, skipped\n";
                continue;
            }
            std::vector<double> acf;
            try {
                acf = normalized_autocovariance(seq, ctx.extra.max_lag);
            } catch (const UndefinedStatisticError&) {
                *ctx.log << "warning: " << id << "/" << topic << ": constant indicator sequence, skipped\n";
                continue;
            }
            for (std::size_t lag = 0; lag < acf.size(); ++lag)
                wa.row({id, topic, std::to_string(lag), fmt(acf[lag])});
        }
    }
    if (!ctx.extra.followers.empty()) {
        auto followers = read_followers(ctx.extra.followers);
        std::map<std::string, std::vector<FollowerRecord>> fgroups;
        for (const auto& f : followers) fgroups[f.influencer_id].push_back(f);
        auto wp = open_csv(ctx, "pearson.csv", {"influencer_id", "months", "r"});
        for (const auto& [id, fs] : fgroups) {
            auto it = groups.find(id);
            std::vector<PostRecord> none;
            const auto& ps = it == groups.end() ? none : it->second;
            try {
                PearsonResult pr = posts_followers_pearson(ps, fs);
                for (const auto& wmsg : pr.series.warnings) *ctx.log << "warning: " << id << ": " << wmsg << '\n';
                wp.row({id, std::to_string(pr.series.months.size()), fmt(pr.r)});
            } catch (const UndefinedStatisticError& ex) {
                *ctx.log << "warning: " << id << ": " << ex.what() << '\n';
            }
        }
    }
    json inputs = {{"posts", ctx.extra.posts}, {"max_lag", ctx.extra.max_lag}};
    if (!ctx.extra.followers.empty()) inputs["followers"] = ctx.extra.followers;
    write_manifest(ctx, {{"inputs", inputs}});
    return 0;
}

int cmd_plot_data(Context& ctx) {
    prepare(ctx, false);
    CsvTable t = read_csv(ctx.extra.input);
    std::size_t id_col = ctx.extra.id_column.empty() ? 0 : t.column(ctx.extra.id_column);
    std::string name = fs::path(ctx.extra.input).stem().string() + "_long.csv";
    auto w = open_csv(ctx, name, {t.header[id_col], "variable", "value"});
    for (const auto& row : t.rows)
        for (std::size_t k = 0; k < row.size(); ++k)
            if (k != id_col) w.row({row[id_col], t.header[k], row[k]});
    write_manifest(ctx, {{"inputs", {{"input", ctx.extra.input}}}});
    return 0;
}

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config, "Scenario JSON file (built-in defaults when omitted)");
    sub->add_option("--seed", a.seed, "Master seed");
    sub->add_option("--out", a.out, "Output directory")->capture_default_str();
    sub->add_option("--runs", a.runs, "Number of realizations")->check(CLI::PositiveNumber);
    sub->add_option("--iters", a.iters, "Iterations per run")->check(CLI::NonNegativeNumber);
    sub->add_option("--set", a.sets, "Config override KEY=VALUE (repeatable)")->allow_extra_args(false);
    sub->add_option("--threads", a.threads, "Worker cap (0: all cores)")->check(CLI::NonNegativeNumber);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Communication-asymmetry opinion model: simulation, fixed points and post statistics", "casym"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Context ctx;
    ctx.log = &err;
    std::map<std::string, std::function<int(Context&)>> handlers = {
        {"simulate", cmd_simulate},       {"ensemble", cmd_ensemble},   {"fluid", cmd_fluid},
        {"fpa-scan", cmd_fpa_scan},       {"fp-density", cmd_fp_density}, {"sweep", cmd_sweep},
        {"case-study", cmd_case_study},   {"sensitivity", cmd_sensitivity}, {"analyze", cmd_analyze},
        {"plot-data", cmd_plot_data},
    };
    std::map<std::string, std::string> help = {
        {"simulate", "Run one realization; writes trajectory.csv and histogram.csv"},
        {"ensemble", "Run --runs realizations and average the tail of each"},
        {"fluid", "Solve the fluid-limit stationary equations"},
        {"fpa-scan", "Fixed points of the two-influencer map over a list of rho values"},
        {"fp-density", "Stationary Fokker-Planck density at the fluid fixed point"},
        {"sweep", "Ensemble per value of the config's sweep section"},
        {"case-study", "Transient, crisis window and reversion; weekly focus popularity"},
        {"sensitivity", "The 24-scenario robustness matrix of the case study"},
        {"analyze", "Consistency, autocovariance and post/follower correlation from CSV inputs"},
        {"plot-data", "Reshape a wide CSV into long form"},
    };
    for (const auto& [name, fn] : handlers) {
        auto* sub = app.add_subcommand(name, help[name]);
        add_common(sub, ctx.args);
        if (name == "simulate")
            sub->add_option("--bins", ctx.extra.bins, "Histogram bins per axis")->check(CLI::Range(2, 1000));
        if (name == "fpa-scan") sub->add_option("--rho", ctx.extra.rho, "Rho values to scan");
        if (name == "analyze") {
            sub->add_option("--posts", ctx.extra.posts, "posts.csv: influencer_id,timestamp,topic")->required();
            sub->add_option("--followers", ctx.extra.followers, "followers.csv: influencer_id,month,followers");
            sub->add_option("--max-lag", ctx.extra.max_lag, "Largest autocovariance lag");
        }
        if (name == "plot-data") {
            sub->add_option("--input", ctx.extra.input, "CSV file to reshape")->required();
            sub->add_option("--id", ctx.extra.id_column, "Identifier column (default: first)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    for (auto* sub : app.get_subcommands()) {
        ctx.subcommand = sub->get_name();
        ctx.app = sub;
    }
    try {
        return handlers.at(ctx.subcommand)(ctx);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateDiffusionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace casym
