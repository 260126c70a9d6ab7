#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "casym/config.hpp"
#include "casym/engine.hpp"
#include "casym/fluid.hpp"

namespace casym {

// 1-D, point-mass prejudice at 0.4, influencers at 0 and 1 with f = (0.3, 0.7).
[[nodiscard]] ModelConfig two_influencer_line_config(double rho);

// Both influencers share reference direction 0, mirrored positions.
[[nodiscard]] ModelConfig echo_chamber_config(double rho);

// 2-D config with c = (0.8, 0.8), rho = 1, used for the posting-frequency sweep.
[[nodiscard]] ModelConfig frequency_sweep_config();

// Politics (axis 0) / End-government (axis 1) case study.
[[nodiscard]] ModelConfig case_study_config();

// ---- sweeps ----

struct SweepRow {
    double value = 0.0;
    EnsembleResult result;
};

// Applies one sweep value to a copy of `base`. Recognized special paths:
// `influencers.0.post_freq` (complement goes to influencer 1),
// `weights.stubbornness` (beta fixed). Other paths are plain overrides.
[[nodiscard]] ModelConfig apply_sweep_value(const ModelConfig& base, const std::string& param, double value);

[[nodiscard]] std::vector<SweepRow> run_sweep(const ModelConfig& base, const SweepSpec& sweep, int threads = 0);

// ---- case study ----

// Phase schedule forcing every influencer onto the crisis topic during the window.
[[nodiscard]] PhaseSchedule crisis_schedule(const ModelConfig& config);
[[nodiscard]] long case_study_iterations(const CaseStudySpec& cs);
// Step at which week `w` of the observation period begins.
[[nodiscard]] long week_step(const CaseStudySpec& cs, long week);

struct CaseStudyRun {
    std::uint64_t seed = 0;
    std::vector<double> weekly_pi;  // focus influencer at weeks 0..weeks; week 0 ends the transient
    double pi_start = 0.0;          // at step 0
    double pi_window_start = 0.0;
    double pi_window_end = 0.0;
    double min_after_window = 0.0;  // smallest value from the window end onward

    [[nodiscard]] double rise() const { return pi_window_end - pi_window_start; }
};

struct CaseStudyResult {
    std::vector<long> weeks;
    std::vector<double> pi_mean, ci_low, ci_high;
    std::vector<CaseStudyRun> runs;

    [[nodiscard]] double mean_rise() const;
    [[nodiscard]] bool rise_flag() const { return mean_rise() > 0.0; }
};

[[nodiscard]] CaseStudyRun run_case_study_once(const ModelConfig& config, std::uint64_t seed);
[[nodiscard]] CaseStudyResult run_case_study(const ModelConfig& config, std::span<const std::uint64_t> seeds,
                                             int threads = 0);

struct SensitivityScenario {
    int id = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double theta_scale = 0.0;
    double x_conte = 0.0;
    double x_salvini = 0.0;
};

// The 24 parameter combinations of the robustness study, in table order.
[[nodiscard]] std::vector<SensitivityScenario> sensitivity_table();
[[nodiscard]] ModelConfig apply_scenario(const ModelConfig& base, const SensitivityScenario& s);

struct SensitivityRow {
    SensitivityScenario scenario;
    CaseStudyResult result;
};

[[nodiscard]] std::vector<SensitivityRow> run_sensitivity(const ModelConfig& base,
                                                          const std::vector<SensitivityScenario>& table,
                                                          std::span<const std::uint64_t> seeds, int threads = 0);

// ---- fixed-point scans ----

struct FpaScanRow {
    double rho = 0.0;
    FixedPointSolution solution;
    ScalarMapScan scan;
};

[[nodiscard]] std::vector<FpaScanRow> fpa_scan(const ModelConfig& base, std::span<const double> rho_values,
                                               const JointOptions& opt = {});

} // namespace casym
