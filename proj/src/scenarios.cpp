#include "casym/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "casym/errors.hpp"

namespace casym {

using nlohmann::json;

ModelConfig two_influencer_line_config(double rho) {
    json j = {
        {"space", {{"dims", 1}}},
        {"influencers",
         {{{"opinion", {0.0}}, {"reference_dir", 0}, {"consistency", 1.0}, {"post_freq", 0.3}, {"initial_popularity", 100.0}},
          {{"opinion", {1.0}}, {"reference_dir", 0}, {"consistency", 1.0}, {"post_freq", 0.7}, {"initial_popularity", 100.0}}}},
        {"population", {{"n_users", 10000}, {"init", "point"}, {"point", {0.4}}}},
        {"weights", {{"alpha", 0.05}, {"beta", 0.93}}},
        {"kernels", {{"rho", rho}, {"feedback", "linear"}}},
        {"run", {{"n_iter", 100000}}},
    };
    return config_from_json(j);
}

ModelConfig echo_chamber_config(double rho) {
    json j = {
        {"influencers",
         {{{"opinion", {0.0, 0.0}}, {"reference_dir", 0}, {"consistency", 0.8}, {"post_freq", 0.5}},
          {{"opinion", {1.0, 1.0}}, {"reference_dir", 0}, {"consistency", 0.8}, {"post_freq", 0.5}}}},
        {"kernels", {{"rho", rho}}},
    };
    return config_from_json(j);
}

ModelConfig frequency_sweep_config() {
    json j = {
        {"influencers",
         {{{"opinion", {0.0, 0.0}}, {"reference_dir", 0}, {"consistency", 0.8}, {"post_freq", 0.5}},
          {{"opinion", {1.0, 1.0}}, {"reference_dir", 1}, {"consistency", 0.8}, {"post_freq", 0.5}}}},
        {"kernels", {{"rho", 1.0}}},
        {"sweep",
         {{"param", "influencers.0.post_freq"},
          {"values", {0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5}},
          {"runs", 10},
          {"tail_samples", 100}}},
    };
    return config_from_json(j);
}

ModelConfig case_study_config() {
    json j = {
        {"influencers",
         {{{"opinion", {0.76, 0.0}}, {"reference_dir", 0}, {"consistency", 1.0}, {"post_freq", 0.108}, {"initial_popularity", 20.0}},
          {{"opinion", {0.0, 1.0}}, {"reference_dir", 0}, {"consistency", 1.0}, {"post_freq", 0.892}, {"initial_popularity", 20.0}}}},
        {"population", {{"n_users", 10000}, {"beta_a", {10.0, 2.0}}, {"beta_b", {10.0, 8.0}}}},
        {"weights", {{"alpha", 0.3}, {"beta", 0.65}}},
        {"kernels", {{"rho", 0.0}, {"feedback", "gaussian"}, {"feedback_scale", 8.25}}},
        {"run", {{"n_iter", 15000}, {"runs", 10}}},
        {"case_study",
         {{"transient", 10000},
          {"window", 550},
          {"steps_per_week", 110},
          {"crisis_offset_weeks", 3},
          {"weeks", 11},
          {"crisis_topic", 1},
          {"focus", 0}}},
    };
    return config_from_json(j);
}

ModelConfig apply_sweep_value(const ModelConfig& base, const std::string& param, double value) {
    std::string key = param;
    for (auto& ch : key)
        if (ch == '[' || ch == ']') ch = '.';
    key.erase(std::unique(key.begin(), key.end(), [](char a, char b) { return a == '.' && b == '.'; }), key.end());
    if (!key.empty() && key.back() == '.') key.pop_back();

    ModelConfig c = base;
    const std::string prefix = "influencers.";
    const std::string suffix = ".post_freq";
    if (key.rfind(prefix, 0) == 0 && key.size() > suffix.size() &&
        key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string idx = key.substr(prefix.size(), key.size() - prefix.size() - suffix.size());
        if (c.influencers.size() != 2)
            throw ValidationError("sweep.param: post_freq sweeps need exactly two influencers");
        std::size_t k = std::stoul(idx);
        if (k > 1) throw ValidationError("sweep.param: no such influencer");
        c.influencers[k].post_freq = value;
        c.influencers[1 - k].post_freq = 1.0 - value;
    } else if (key == "weights.stubbornness") {
        if (!(value >= 0.0 && value <= 1.0)) throw ValidationError("sweep.values: stubbornness must lie in [0, 1]");
        c.weights = UpdateWeights::from_stubbornness(value, base.weights.beta);
    } else {
        json doc = config_to_json(base);
        set_path(doc, key, value);
        c = config_from_json(doc);
    }
    c.validate();
    return c;
}

std::vector<SweepRow> run_sweep(const ModelConfig& base, const SweepSpec& sweep, int threads) {
    if (sweep.values.empty()) throw ValidationError("sweep.values: at least one value is required");
    std::vector<double> values = sweep.values;
    std::sort(values.begin(), values.end());
    auto seeds = consecutive_seeds(base.run.seed, sweep.runs);
    std::vector<SweepRow> rows;
    for (double v : values) {
        ModelConfig c = apply_sweep_value(base, sweep.param, v);
        rows.push_back({v, ensemble(c, seeds, c.run.n_iter, sweep.tail_samples, threads)});
    }
    return rows;
}

PhaseSchedule crisis_schedule(const ModelConfig& config) {
    if (!config.case_study) throw ValidationError("case_study: section required");
    const auto& cs = *config.case_study;
    Phase ph;
    ph.start = cs.transient + cs.crisis_offset_weeks * cs.steps_per_week;
    ph.end = ph.start + cs.window;
    ph.topic.assign(config.influencers.size(), cs.crisis_topic);
    return {{ph}};
}

long case_study_iterations(const CaseStudySpec& cs) {
    return cs.transient + cs.weeks * cs.steps_per_week;
}

long week_step(const CaseStudySpec& cs, long week) {
    return cs.transient + week * cs.steps_per_week;
}

CaseStudyRun run_case_study_once(const ModelConfig& config, std::uint64_t seed) {
    if (!config.case_study) throw ValidationError("case_study: section required");
    const auto& cs = *config.case_study;
    ModelConfig c = config;
    if (!c.schedule) c.schedule = crisis_schedule(c);
    c.validate();
    const long crisis_start = cs.transient + cs.crisis_offset_weeks * cs.steps_per_week;
    const long crisis_end = crisis_start + cs.window;

    RunOptions opt;
    opt.stride = cs.steps_per_week;
    opt.keep_final_state = false;
    for (long w = 0; w <= cs.weeks; ++w) opt.extra_samples.push_back(week_step(cs, w));
    opt.extra_samples.push_back(crisis_start);
    opt.extra_samples.push_back(crisis_end);
    Trajectory tr = run(c, seed, case_study_iterations(cs), opt);

    auto at = [&](long step) {
        auto it = std::lower_bound(tr.steps.begin(), tr.steps.end(), step);
        if (it == tr.steps.end() || *it != step) throw std::logic_error("case study: missing sample");
        return tr.pi[static_cast<std::size_t>(it - tr.steps.begin())][cs.focus];
    };
    CaseStudyRun r;
    r.seed = seed;
    r.pi_start = at(0);
    for (long w = 0; w <= cs.weeks; ++w) r.weekly_pi.push_back(at(week_step(cs, w)));
    r.pi_window_start = at(crisis_start);
    r.pi_window_end = at(crisis_end);
    r.min_after_window = r.pi_window_end;
    for (long w = 0; w <= cs.weeks; ++w)
        if (week_step(cs, w) > crisis_end) r.min_after_window = std::min(r.min_after_window, r.weekly_pi[w]);
    return r;
}

namespace {

CaseStudyResult summarize_case_study(const CaseStudySpec& cs, std::vector<CaseStudyRun> runs) {
    CaseStudyResult res;
    for (long w = 0; w <= cs.weeks; ++w) {
        std::vector<double> col;
        for (const auto& r : runs) col.push_back(r.weekly_pi[w]);
        MeanCi m = mean_ci95(col);
        res.weeks.push_back(w);
        res.pi_mean.push_back(m.mean);
        res.ci_low.push_back(m.low);
        res.ci_high.push_back(m.high);
    }
    res.runs = std::move(runs);
    return res;
}

} // namespace

double CaseStudyResult::mean_rise() const {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.rise();
    return s / static_cast<double>(runs.size());
}

CaseStudyResult run_case_study(const ModelConfig& config, std::span<const std::uint64_t> seeds, int threads) {
    if (seeds.empty()) throw ValidationError("case study: at least one seed is required");
    if (!config.case_study) throw ValidationError("case_study: section required");
    std::vector<CaseStudyRun> runs(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t k) { runs[k] = run_case_study_once(config, seeds[k]); });
    return summarize_case_study(*config.case_study, std::move(runs));
}

std::vector<SensitivityScenario> sensitivity_table() {
    std::vector<SensitivityScenario> rows;
    int id = 1;
    for (double theta : {8.0, 8.25, 8.5})
        for (auto [alpha, beta] : {std::pair{0.25, 0.708}, std::pair{0.45, 0.475}})
            for (double xc : {0.74, 0.78})
                for (double xs : {0.01, 0.05}) rows.push_back({id++, alpha, beta, theta, xc, xs});
    return rows;
}

ModelConfig apply_scenario(const ModelConfig& base, const SensitivityScenario& s) {
    if (!base.case_study || base.influencers.size() != 2)
        throw ValidationError("sensitivity: base config needs a case_study section and two influencers");
    ModelConfig c = base;
    c.weights = UpdateWeights::from_alpha_beta(s.alpha, s.beta);
    c.kernels.feedback = FeedbackFamily::gaussian;
    c.kernels.feedback_scale = s.theta_scale;
    std::size_t focus = base.case_study->focus;
    c.influencers[focus].opinion[0] = s.x_conte;
    c.influencers[1 - focus].opinion[0] = s.x_salvini;
    c.validate();
    return c;
}

std::vector<SensitivityRow> run_sensitivity(const ModelConfig& base, const std::vector<SensitivityScenario>& table,
                                            std::span<const std::uint64_t> seeds, int threads) {
    if (seeds.empty()) throw ValidationError("sensitivity: at least one seed is required");
    std::vector<ModelConfig> configs;
    for (const auto& s : table) configs.push_back(apply_scenario(base, s));
    const std::size_t ns = seeds.size();
    std::vector<std::vector<CaseStudyRun>> runs(table.size(), std::vector<CaseStudyRun>(ns));
    parallel_for(table.size() * ns, threads, [&](std::size_t task) {
        std::size_t row = task / ns;
        runs[row][task % ns] = run_case_study_once(configs[row], seeds[task % ns]);
    });
    std::vector<SensitivityRow> out;
    for (std::size_t k = 0; k < table.size(); ++k)
        out.push_back({table[k], summarize_case_study(*configs[k].case_study, std::move(runs[k]))});
    return out;
}

std::vector<FpaScanRow> fpa_scan(const ModelConfig& base, std::span<const double> rho_values, const JointOptions& opt) {
    std::vector<FpaScanRow> rows(rho_values.size());
    parallel_for(rho_values.size(), base.run.threads, [&](std::size_t k) {
        ModelConfig c = base;
        c.kernels.rho = rho_values[k];
        c.validate();
        FluidProblem p = FluidProblem::from_config(c);
        FpaScanRow row;
        row.rho = rho_values[k];
        row.solution = joint_fixed_point(p, opt);
        if (p.size() == 2 && p.prejudice.is_point_mass()) {
            auto s = TwoInfluencerScenario::from_problem(p, c.solver.printed_map_form);
            row.scan = find_fixed_points_1d([&](double x) { return two_influencer_map(x, s); }, c.solver.scan_grid,
                                            c.solver.tolerance);
        }
        rows[k] = std::move(row);
    });
    return rows;
}

} // namespace casym
