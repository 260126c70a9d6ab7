#include "casym/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "casym/errors.hpp"

namespace casym {

namespace {

struct Jump {
    double weight;  // f theta omega
    double dx;
};

std::vector<Jump> jumps(double x, double z, std::span<const double> pi, const FluidProblem& p) {
    std::vector<Jump> out;
    out.reserve(p.size());
    const auto& w = p.weights;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double xi = p.positions[i];
        double d = std::abs(x - xi);
        double wt = p.post_freq[i] * visibility(d, pi[i], p.kernels.rho);
        if (wt > 0.0) wt *= feedback_prob(d, p.kernels);
        out.push_back({wt, w.alpha * (z - xi) + (1.0 - w.beta) * (xi - x)});
    }
    return out;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
    return s;
}

} // namespace

std::vector<double> uniform_grid(double lower, double upper, int nodes) {
    if (nodes < 2) throw std::invalid_argument("uniform_grid: need at least 2 nodes");
    std::vector<double> g(nodes);
    double h = (upper - lower) / (nodes - 1);
    for (int k = 0; k < nodes; ++k) g[k] = lower + h * k;
    g.back() = upper;
    return g;
}

double drift(double x, double z, std::span<const double> pi, const FluidProblem& p) {
    double v = 0.0;
    for (const auto& j : jumps(x, z, pi, p)) v += j.weight * j.dx;
    return p.lambda * v;
}

double velocity_variance(double x, double z, std::span<const double> pi, const FluidProblem& p,
                         const FpSettings& s) {
    auto js = jumps(x, z, pi, p);
    double mean_jump = 0.0;  // v * dT with dT = 1/lambda
    for (const auto& j : js) mean_jump += j.weight * j.dx;
    double acc = 0.0;
    for (const auto& j : js) acc += j.weight * (j.dx - mean_jump) * (j.dx - mean_jump);
    return s.variance == VarianceScaling::velocity ? p.lambda * p.lambda * acc : p.lambda * acc;
}

std::vector<double> grid_derivative(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n) throw std::invalid_argument("grid_derivative: need at least 3 matching nodes");
    const double h = (x[n - 1] - x[0]) / static_cast<double>(n - 1);
    std::vector<double> d(n);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (y[k + 1] - y[k - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    return d;
}

DriftDiffusionField drift_diffusion_field(double z, std::span<const double> pi, std::span<const double> grid,
                                          const FluidProblem& p, const FpSettings& s) {
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("drift_diffusion_field: grid must increase");
    DriftDiffusionField f;
    f.x.assign(grid.begin(), grid.end());
    for (double x : grid) {
        f.drift.push_back(drift(x, z, pi, p));
        f.variance.push_back(velocity_variance(x, z, pi, p, s));
    }
    f.dvariance = grid_derivative(f.x, f.variance);
    return f;
}

double StationaryDensity::mode(std::size_t k) const {
    const auto& f = density.at(k);
    std::size_t m = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    if (m == 0 || m + 1 == f.size()) return x[m];
    double l0 = std::log(std::max(f[m - 1], 1e-300));
    double l1 = std::log(std::max(f[m], 1e-300));
    double l2 = std::log(std::max(f[m + 1], 1e-300));
    double denom = l0 - 2.0 * l1 + l2;
    if (!(denom < 0.0)) return x[m];
    double h = x[m + 1] - x[m];
    return x[m] + 0.5 * h * (l0 - l2) / denom;
}

StationaryDensity stationary_density(double z, std::span<const double> pi, std::span<const double> grid,
                                     const FluidProblem& p, const FpSettings& s) {
    DriftDiffusionField field = drift_diffusion_field(z, pi, grid, p, s);
    const std::size_t n = grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (!(field.variance[k] >= s.variance_floor)) {
            std::ostringstream msg;
            msg << "velocity variance " << field.variance[k] << " at x=" << grid[k] << " (z=" << z
                << ") is below the floor " << s.variance_floor
                << "; the diffusion approximation degenerates here, use the fluid-solver equilibrium points instead";
            throw DegenerateDiffusionError(msg.str());
        }
    }
    std::vector<double> eta(n);
    for (std::size_t k = 0; k < n; ++k)
        eta[k] = 2.0 * (field.drift[k] - 0.5 * field.dvariance[k]) / field.variance[k];
    std::vector<double> A(n, 0.0);
    for (std::size_t k = 1; k < n; ++k) A[k] = A[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (eta[k] + eta[k - 1]);
    double amax = *std::max_element(A.begin(), A.end());
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = std::exp(A[k] - amax);
    double Z = trapezoid(grid, f);
    for (auto& v : f) v /= Z;

    StationaryDensity out;
    out.x.assign(grid.begin(), grid.end());
    out.z = {z};
    out.density = {std::move(f)};
    out.log_normalization = {-amax - std::log(Z)};
    return out;
}

StationaryDensity stationary_density(std::span<const double> pi, std::span<const double> grid, const FluidProblem& p,
                                     const FpSettings& s) {
    StationaryDensity out;
    out.x.assign(grid.begin(), grid.end());
    for (double z : p.prejudice.nodes) {
        StationaryDensity slice = stationary_density(z, pi, grid, p, s);
        out.z.push_back(z);
        out.density.push_back(std::move(slice.density[0]));
        out.log_normalization.push_back(slice.log_normalization[0]);
    }
    return out;
}

std::vector<double> probability_flux(const DriftDiffusionField& field, std::span<const double> f) {
    const std::size_t n = field.x.size();
    std::vector<double> sf(n);
    for (std::size_t k = 0; k < n; ++k) sf[k] = field.variance[k] * f[k];
    auto dsf = grid_derivative(field.x, sf);
    std::vector<double> J(n);
    for (std::size_t k = 0; k < n; ++k) J[k] = -field.drift[k] * f[k] + 0.5 * dsf[k];
    return J;
}

std::vector<EquilibriumPoint> equilibrium_points(double z, std::span<const double> pi, std::span<const double> grid,
                                                 const FluidProblem& p, double tolerance) {
    auto v = [&](double x) { return drift(x, z, pi, p); };
    auto classify = [&](double x) {
        double h = 1e-6;
        double lo = std::max(grid.front(), x - h);
        double hi = std::min(grid.back(), x + h);
        return EquilibriumPoint{x, (v(hi) - v(lo)) / (hi - lo) < 0.0};
    };
    std::vector<EquilibriumPoint> out;
    std::vector<double> vals;
    for (double x : grid) vals.push_back(v(x));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (vals[k] == 0.0) {
            out.push_back(classify(grid[k]));
            continue;
        }
        if (k + 1 == grid.size() || vals[k + 1] == 0.0 || (vals[k] < 0.0) == (vals[k + 1] < 0.0)) continue;
        double lo = grid[k], hi = grid[k + 1], vlo = vals[k];
        while (hi - lo > tolerance) {
            double mid = 0.5 * (lo + hi);
            double vm = v(mid);
            if (vm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((vm < 0.0) == (vlo < 0.0)) {
                lo = mid;
                vlo = vm;
            } else {
                hi = mid;
            }
        }
        out.push_back(classify(0.5 * (lo + hi)));
    }
    return out;
}

OpinionMeasure OpinionMeasure::point_mass(double x, double z) {
    return {{x}, {z}, {1.0}};
}

OpinionMeasure OpinionMeasure::from_density(const StationaryDensity& d, std::span<const double> prejudice_weights) {
    if (prejudice_weights.size() != d.density.size())
        throw std::invalid_argument("OpinionMeasure: one prejudice weight per density slice is required");
    OpinionMeasure m;
    const auto& x = d.x;
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < d.density.size(); ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            double left = j > 0 ? 0.5 * (x[j] - x[j - 1]) : 0.0;
            double right = j + 1 < n ? 0.5 * (x[j + 1] - x[j]) : 0.0;
            m.x.push_back(x[j]);
            m.z.push_back(d.z[k]);
            m.weight.push_back(prejudice_weights[k] * d.density[k][j] * (left + right));
        }
    }
    double total = std::accumulate(m.weight.begin(), m.weight.end(), 0.0);
    for (auto& w : m.weight) w /= total;
    return m;
}

double popularity_rate(std::size_t i, double pi_i, const OpinionMeasure& measure, const FluidProblem& p) {
    double acc = 0.0;
    const double xi = p.positions.at(i);
    for (std::size_t k = 0; k < measure.x.size(); ++k) {
        double d = std::abs(measure.x[k] - xi);
        double w = visibility(d, pi_i, p.kernels.rho);
        if (w > 0.0) acc += measure.weight[k] * w * feedback_prob(d, p.kernels);
    }
    return p.lambda * p.post_freq[i] * acc;
}

} // namespace casym
