#pragma once

#include <span>
#include <vector>

#include "casym/config.hpp"
#include "casym/fluid.hpp"

namespace casym {

struct FpSettings {
    // diffusion: lambda * sum f theta omega (dx - v/lambda)^2
    // velocity:  lambda^2 * sum f theta omega (dx - v/lambda)^2
    // Both agree at lambda = 1.
    VarianceScaling variance = VarianceScaling::diffusion;
    double variance_floor = 1e-12;
};

[[nodiscard]] std::vector<double> uniform_grid(double lower, double upper, int nodes);

[[nodiscard]] double drift(double x, double z, std::span<const double> pi, const FluidProblem& p);
[[nodiscard]] double velocity_variance(double x, double z, std::span<const double> pi, const FluidProblem& p,
                                       const FpSettings& s = {});

struct DriftDiffusionField {
    std::vector<double> x;
    std::vector<double> drift;
    std::vector<double> variance;
    std::vector<double> dvariance;  // second-order finite differences
};

[[nodiscard]] DriftDiffusionField drift_diffusion_field(double z, std::span<const double> pi,
                                                        std::span<const double> grid, const FluidProblem& p,
                                                        const FpSettings& s = {});

// Second-order finite-difference derivative on a uniform grid.
[[nodiscard]] std::vector<double> grid_derivative(std::span<const double> x, std::span<const double> y);

struct StationaryDensity {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<std::vector<double>> density;  // [z node][x node], conditional on z
    std::vector<double> log_normalization;     // log c1(z): f = c1 exp(A - A(a))

    // Mode of slice k refined by a parabola through the largest node.
    [[nodiscard]] double mode(std::size_t k = 0) const;
};

// Throws DegenerateDiffusionError when the variance drops below the floor.
[[nodiscard]] StationaryDensity stationary_density(double z, std::span<const double> pi,
                                                   std::span<const double> grid, const FluidProblem& p,
                                                   const FpSettings& s = {});
// One slice per prejudice node of p.prejudice.
[[nodiscard]] StationaryDensity stationary_density(std::span<const double> pi, std::span<const double> grid,
                                                   const FluidProblem& p, const FpSettings& s = {});

// -v f + 1/2 d(sigma^2 f)/dx on the grid, for checking zero flux.
[[nodiscard]] std::vector<double> probability_flux(const DriftDiffusionField& field, std::span<const double> f);

struct EquilibriumPoint {
    double x = 0.0;
    bool stable = false;
};

[[nodiscard]] std::vector<EquilibriumPoint> equilibrium_points(double z, std::span<const double> pi,
                                                               std::span<const double> grid, const FluidProblem& p,
                                                               double tolerance = 1e-13);

// Opinion distribution as weighted atoms (x_k, z_k, w_k), weights summing to 1.
struct OpinionMeasure {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> weight;

    static OpinionMeasure point_mass(double x, double z);
    // Trapezoidal weights of each density slice times the prejudice weights of p.
    static OpinionMeasure from_density(const StationaryDensity& d, std::span<const double> prejudice_weights);
};

// lambda f_i * integral of theta * omega over the measure.
[[nodiscard]] double popularity_rate(std::size_t i, double pi_i, const OpinionMeasure& measure,
                                     const FluidProblem& p);

} // namespace casym
