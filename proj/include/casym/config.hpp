#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casym/core.hpp"

namespace casym {

enum class InitKind { beta, point };

struct PopulationSpec {
    std::size_t n_users = 10000;
    InitKind init = InitKind::beta;
    // Per-axis Beta shapes on [a,b]; a single entry applies to every axis.
    std::vector<double> beta_a{10.0};
    std::vector<double> beta_b{10.0};
    // Point-mass location, one entry per axis (init == point).
    std::vector<double> point;
    // false: x(0) = z. true: x(0) drawn independently with the same law as z.
    bool independent_initial = false;

    [[nodiscard]] double shape_a(int axis) const;
    [[nodiscard]] double shape_b(int axis) const;
};

struct RunSpec {
    long n_iter = 100000;
    std::uint64_t seed = 1;
    long sample_stride = 0;  // 0: n_iter / 1000
    std::size_t tail_samples = 100;
    int runs = 10;
    int threads = 0;         // 0: hardware concurrency
    double post_rate = 1.0;  // lambda; used only by the Fokker-Planck module
};

struct Phase {
    long start = 0;
    long end = 0;  // exclusive
    std::vector<std::optional<int>> topic;  // per influencer
};

struct PhaseSchedule {
    std::vector<Phase> phases;

    // Forced topic for influencer i at step n, if any phase covers n.
    [[nodiscard]] std::optional<int> topic_override(long step, std::size_t influencer) const;
};

struct CaseStudySpec {
    long transient = 10000;
    long window = 550;
    long steps_per_week = 110;
    long crisis_offset_weeks = 3;
    long weeks = 11;
    int crisis_topic = 1;
    std::size_t focus = 0;  // influencer reported as pi_conte
};

enum class VarianceScaling { diffusion, velocity };

// Settings for the fluid and Fokker-Planck solvers.
struct SolverSpec {
    std::vector<double> rho_values{0.0, 0.001, 0.01, 0.1, 0.3, 0.4, 0.5, 0.8, 1.0};
    int scan_grid = 1000;
    double tolerance = 1e-10;
    int max_outer = 10000;  // outer iterations of the joint fixed point
    int prejudice_nodes = 201;
    int density_nodes = 2001;
    bool printed_map_form = false;
    VarianceScaling variance = VarianceScaling::diffusion;
};

struct SweepSpec {
    std::string param;
    std::vector<double> values;
    int runs = 10;
    std::size_t tail_samples = 100;
};

struct ModelConfig {
    OpinionSpace space;
    std::vector<InfluencerSpec> influencers;
    PopulationSpec population;
    UpdateWeights weights;
    KernelSpec kernels;
    RunSpec run;
    std::optional<PhaseSchedule> schedule;
    std::optional<CaseStudySpec> case_study;
    std::optional<SweepSpec> sweep;
    SolverSpec solver;

    // Throws ValidationError naming the offending field path.
    void validate() const;
};

// Defaults: two influencers at opposite corners of the 2-D box.
[[nodiscard]] ModelConfig default_config();

[[nodiscard]] ModelConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json config_to_json(const ModelConfig& c);
[[nodiscard]] ModelConfig load_config(const std::filesystem::path& path);

// Applies `key=value` to a JSON document. Keys are dotted paths; list
// elements are addressed as `influencers.0.x` or `influencers[0].x`. The
// value is parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);
void set_path(nlohmann::json& doc, const std::string& path, nlohmann::json value);

// Config with `--set` style overrides applied, then re-validated.
[[nodiscard]] ModelConfig with_overrides(const ModelConfig& base, const std::vector<std::string>& assignments);

[[nodiscard]] std::string to_string(FeedbackFamily f);

} // namespace casym
