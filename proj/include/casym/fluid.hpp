#pragma once

#include <functional>
#include <span>
#include <vector>

#include "casym/config.hpp"

namespace casym {

// Prejudice law h(z) on a 1-D axis as quadrature nodes and weights.
struct PrejudiceDensity {
    std::vector<double> nodes;
    std::vector<double> weights;  // sum to 1

    static PrejudiceDensity point_mass(double z);
    // Beta(a_shape, b_shape) scaled to [lower, upper], trapezoidal weights.
    static PrejudiceDensity beta(double a_shape, double b_shape, double lower, double upper, int n_nodes);
    [[nodiscard]] bool is_point_mass() const { return nodes.size() == 1; }
};

// One-dimensional model as seen by the fluid and Fokker-Planck solvers.
struct FluidProblem {
    std::vector<double> positions;  // x^(i)
    std::vector<double> post_freq;  // f^(i)
    std::vector<double> initial_pi;
    UpdateWeights weights;
    KernelSpec kernels;
    PrejudiceDensity prejudice;
    double lower = 0.0;
    double upper = 1.0;
    double lambda = 1.0;

    [[nodiscard]] std::size_t size() const { return positions.size(); }
    // Uses axis 0 of the config; requires a 1-D space.
    static FluidProblem from_config(const ModelConfig& config);
    void validate() const;
};

struct IterationOptions {
    double damping = 0.5;
    double tolerance = 1e-10;
    int max_iterations = 100000;
};

struct EquilibriumResult {
    double xbar = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Right-hand side of the self-consistency equation for xbar at prejudice z.
[[nodiscard]] double equilibrium_rhs(double x, double z, std::span<const double> pi, const FluidProblem& p);

// Damped fixed-point iteration on xbar seeded from `seed`.
[[nodiscard]] EquilibriumResult equilibrium_opinion(double z, std::span<const double> pi, const FluidProblem& p,
                                                    double seed, const IterationOptions& opt = {});
[[nodiscard]] EquilibriumResult equilibrium_opinion(double z, std::span<const double> pi, const FluidProblem& p,
                                                    const IterationOptions& opt = {});

// Every root of x = rhs(x) on [lower, upper], found by scanning `n_seeds` points.
[[nodiscard]] std::vector<double> equilibrium_roots(double z, std::span<const double> pi, const FluidProblem& p,
                                                    int n_seeds = 401, double tolerance = 1e-12);

// F_i(pi_i) = sum_k h_k f_i omega theta at xbar(z_k).
[[nodiscard]] double popularity_weight(std::size_t i, double pi_i, std::span<const double> xbar, const FluidProblem& p);

struct PopularityResult {
    std::vector<double> pi;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

[[nodiscard]] PopularityResult popularity_fixed_point(std::span<const double> xbar, const FluidProblem& p,
                                                      std::span<const double> pi_start,
                                                      const IterationOptions& opt = {});

struct FixedPointSolution {
    std::vector<double> z;     // prejudice nodes
    std::vector<double> xbar;  // xbar(z) per node
    std::vector<double> pi;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct JointOptions {
    double tolerance = 1e-8;
    int max_outer = 10000;
    IterationOptions inner{0.5, 1e-12, 100000};
};

[[nodiscard]] FixedPointSolution joint_fixed_point(const FluidProblem& p, const JointOptions& opt = {});

// Two influencers on one axis with a point-mass prejudice.
struct TwoInfluencerScenario {
    double x0 = 0.0;
    double x1 = 1.0;
    double f0 = 0.5;
    double f1 = 0.5;
    double z = 0.5;
    UpdateWeights weights;
    KernelSpec kernels;
    // Use pi_1 in both omega exponents instead of each influencer's own share.
    bool printed_form = false;

    static TwoInfluencerScenario from_problem(const FluidProblem& p, bool printed_form = false);
    [[nodiscard]] double xbar(double pi1) const;
};

[[nodiscard]] double two_influencer_map(double pi1, const TwoInfluencerScenario& s);

struct ScalarFixedPoint {
    double value = 0.0;
    double derivative = 0.0;
    bool stable = false;
    bool endpoint = false;
};

struct ScalarMapScan {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<ScalarFixedPoint> fixed_points;

    [[nodiscard]] std::vector<double> stable_points() const;
};

[[nodiscard]] ScalarMapScan find_fixed_points_1d(const std::function<double(double)>& map, int grid_size,
                                                 double tolerance, double h = 1e-4);

// Root in [0,1] of m(f1-f0)pi^2 + [f0(1-q)+f1(q-m)]pi - f1 q = 0.
[[nodiscard]] double closed_form_rho0(double f0, double f1, double m, double q);

// alpha/(1-beta) z + gamma/(1-beta) x_win.
[[nodiscard]] double winner_opinion(double z, double x_win, const UpdateWeights& w);

} // namespace casym
