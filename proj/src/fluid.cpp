#include "casym/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#include "casym/errors.hpp"

namespace casym {

namespace {

double attraction(double x, double xi, double pi_i, double f_i, const KernelSpec& k) {
    double d = std::abs(x - xi);
    if (f_i == 0.0) return 0.0;
    double w = visibility(d, pi_i, k.rho);
    if (w == 0.0) return 0.0;
    return f_i * w * feedback_prob(d, k);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

// pi_i <- F_i(pi_i) / sum_j F_j(pi_j); empty when every F vanishes.
std::vector<double> popularity_map(std::span<const double> xbar, const FluidProblem& p, std::span<const double> pi) {
    std::vector<double> F(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += (F[i] = popularity_weight(i, pi[i], xbar, p));
    if (!(total > 0.0)) return {};
    for (auto& v : F) v /= total;
    return F;
}

} // namespace

PrejudiceDensity PrejudiceDensity::point_mass(double z) {
    return {{z}, {1.0}};
}

PrejudiceDensity PrejudiceDensity::beta(double a_shape, double b_shape, double lower, double upper, int n_nodes) {
    if (n_nodes < 2) throw std::invalid_argument("prejudice grid needs at least 2 nodes");
    boost::math::beta_distribution<double> dist(a_shape, b_shape);
    PrejudiceDensity h;
    double step = (upper - lower) / (n_nodes - 1);
    for (int k = 0; k < n_nodes; ++k) {
        double t = static_cast<double>(k) / (n_nodes - 1);
        // Unbounded endpoint densities are replaced by the half-cell value.
        if ((k == 0 && a_shape < 1.0) || (k == n_nodes - 1 && b_shape < 1.0))
            t = k == 0 ? 0.5 / (n_nodes - 1) : 1.0 - 0.5 / (n_nodes - 1);
        double w = boost::math::pdf(dist, t) * ((k == 0 || k == n_nodes - 1) ? 0.5 : 1.0);
        if (w <= 0.0) continue;  // zero-density endpoints carry no mass
        h.nodes.push_back(lower + step * k);
        h.weights.push_back(w);
    }
    double total = std::accumulate(h.weights.begin(), h.weights.end(), 0.0);
    for (auto& w : h.weights) w /= total;
    return h;
}

FluidProblem FluidProblem::from_config(const ModelConfig& c) {
    if (c.space.dims != 1) throw ValidationError("space.dims: the fluid and Fokker-Planck solvers need a 1-D space");
    FluidProblem p;
    std::vector<double> p0;
    for (const auto& s : c.influencers) {
        p.positions.push_back(s.opinion[0]);
        p.post_freq.push_back(s.post_freq);
        p0.push_back(s.initial_popularity);
    }
    p.initial_pi = normalize_popularity(p0);
    p.weights = c.weights;
    p.kernels = c.kernels;
    p.lower = c.space.lower;
    p.upper = c.space.upper;
    p.lambda = c.run.post_rate;
    if (c.population.init == InitKind::point)
        p.prejudice = PrejudiceDensity::point_mass(c.population.point[0]);
    else
        p.prejudice = PrejudiceDensity::beta(c.population.shape_a(0), c.population.shape_b(0), c.space.lower,
                                             c.space.upper, c.solver.prejudice_nodes);
    p.validate();
    return p;
}

void FluidProblem::validate() const {
    if (positions.empty() || positions.size() != post_freq.size() || positions.size() != initial_pi.size())
        throw ValidationError("fluid problem: influencer arrays must be non-empty and of equal length");
    if (!(weights.beta < 1.0)) throw ValidationError("weights.beta: the fluid limit needs beta < 1");
    weights.validate();
    kernels.validate();
    if (prejudice.nodes.empty() || prejudice.nodes.size() != prejudice.weights.size())
        throw ValidationError("fluid problem: prejudice nodes and weights must match");
    if (!(lambda > 0.0)) throw ValidationError("run.post_rate: must be > 0");
}

double equilibrium_rhs(double x, double z, std::span<const double> pi, const FluidProblem& p) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double w = attraction(x, p.positions[i], pi[i], p.post_freq[i], p.kernels);
        num += w * p.positions[i];
        den += w;
    }
    if (!(den > 0.0)) return x;  // no post is ever liked: every x is stationary
    return p.weights.q_factor() * z + p.weights.m() * (num / den);
}

EquilibriumResult equilibrium_opinion(double z, std::span<const double> pi, const FluidProblem& p, double seed,
                                      const IterationOptions& opt) {
    EquilibriumResult r;
    double x = seed;
    for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
        double g = equilibrium_rhs(x, z, pi, p);
        r.residual = std::abs(g - x);
        if (r.residual < opt.tolerance) {
            r.converged = true;
            break;
        }
        x = (1.0 - opt.damping) * x + opt.damping * g;
    }
    r.xbar = x;
    return r;
}

EquilibriumResult equilibrium_opinion(double z, std::span<const double> pi, const FluidProblem& p,
                                      const IterationOptions& opt) {
    return equilibrium_opinion(z, pi, p, z, opt);
}

std::vector<double> equilibrium_roots(double z, std::span<const double> pi, const FluidProblem& p, int n_seeds,
                                      double tolerance) {
    auto g = [&](double x) { return equilibrium_rhs(x, z, pi, p) - x; };
    std::vector<double> roots;
    auto push = [&](double r) {
        if (roots.empty() || std::abs(roots.back() - r) > 1e3 * tolerance) roots.push_back(r);
    };
    double step = (p.upper - p.lower) / (n_seeds - 1);
    double x0 = p.lower;
    double g0 = g(x0);
    if (g0 == 0.0) push(x0);
    for (int k = 1; k < n_seeds; ++k) {
        double x1 = k == n_seeds - 1 ? p.upper : p.lower + step * k;
        double g1 = g(x1);
        if (g1 == 0.0) {
            push(x1);
        } else if (g0 != 0.0 && (g0 < 0.0) != (g1 < 0.0)) {
            double lo = x0, hi = x1, glo = g0;
            while (hi - lo > tolerance) {
                double mid = 0.5 * (lo + hi);
                double gm = g(mid);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    return roots;
}

double popularity_weight(std::size_t i, double pi_i, std::span<const double> xbar, const FluidProblem& p) {
    double F = 0.0;
    for (std::size_t k = 0; k < xbar.size(); ++k)
        F += p.prejudice.weights[k] * attraction(xbar[k], p.positions[i], pi_i, p.post_freq[i], p.kernels);
    return F;
}

PopularityResult popularity_fixed_point(std::span<const double> xbar, const FluidProblem& p,
                                        std::span<const double> pi_start, const IterationOptions& opt) {
    PopularityResult r;
    r.pi.assign(pi_start.begin(), pi_start.end());
    for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
        auto target = popularity_map(xbar, p, r.pi);
        if (target.empty()) {
            r.residual = std::numeric_limits<double>::infinity();
            return r;
        }
        r.residual = max_abs_diff(r.pi, target);
        if (r.residual < opt.tolerance) {
            r.converged = true;
            break;
        }
        for (std::size_t i = 0; i < r.pi.size(); ++i)
            r.pi[i] = (1.0 - opt.damping) * r.pi[i] + opt.damping * target[i];
        r.pi = normalize_popularity(r.pi);
    }
    return r;
}

FixedPointSolution joint_fixed_point(const FluidProblem& p, const JointOptions& opt) {
    p.validate();
    FixedPointSolution sol;
    sol.z = p.prejudice.nodes;
    sol.xbar = sol.z;
    sol.pi = p.initial_pi;
    for (sol.iterations = 1; sol.iterations <= opt.max_outer; ++sol.iterations) {
        for (std::size_t k = 0; k < sol.z.size(); ++k)
            sol.xbar[k] = equilibrium_opinion(sol.z[k], sol.pi, p, sol.xbar[k], opt.inner).xbar;
        auto pr = popularity_fixed_point(sol.xbar, p, sol.pi, opt.inner);
        sol.pi = pr.pi;

        double res = 0.0;
        for (std::size_t k = 0; k < sol.z.size(); ++k)
            res = std::max(res, std::abs(sol.xbar[k] - equilibrium_rhs(sol.xbar[k], sol.z[k], sol.pi, p)));
        auto target = popularity_map(sol.xbar, p, sol.pi);
        res = target.empty() ? std::numeric_limits<double>::infinity() : std::max(res, max_abs_diff(sol.pi, target));
        sol.residual = res;
        if (res < opt.tolerance) {
            sol.converged = true;
            return sol;
        }
    }
    sol.iterations = opt.max_outer;
    return sol;
}

TwoInfluencerScenario TwoInfluencerScenario::from_problem(const FluidProblem& p, bool printed_form) {
    if (p.size() != 2 || !p.prejudice.is_point_mass())
        throw ValidationError("two-influencer map needs exactly two influencers and a point-mass prejudice");
    TwoInfluencerScenario s;
    s.x0 = p.positions[0];
    s.x1 = p.positions[1];
    s.f0 = p.post_freq[0];
    s.f1 = p.post_freq[1];
    s.z = p.prejudice.nodes[0];
    s.weights = p.weights;
    s.kernels = p.kernels;
    s.printed_form = printed_form;
    return s;
}

double TwoInfluencerScenario::xbar(double pi1) const {
    return weights.q_factor() * z + weights.m() * ((1.0 - pi1) * x0 + pi1 * x1);
}

double two_influencer_map(double pi1, const TwoInfluencerScenario& s) {
    double xb = s.xbar(pi1);
    double pi0 = s.printed_form ? pi1 : 1.0 - pi1;
    double F0 = attraction(xb, s.x0, pi0, s.f0, s.kernels);
    double F1 = attraction(xb, s.x1, pi1, s.f1, s.kernels);
    double total = F0 + F1;
    if (!(total > 0.0)) return pi1;
    return F1 / total;
}

std::vector<double> ScalarMapScan::stable_points() const {
    std::vector<double> out;
    for (const auto& fp : fixed_points)
        if (fp.stable) out.push_back(fp.value);
    return out;
}

ScalarMapScan find_fixed_points_1d(const std::function<double(double)>& map, int grid_size, double tolerance,
                                   double h) {
    if (grid_size < 100) throw std::invalid_argument("find_fixed_points_1d: grid_size must be >= 100");
    ScalarMapScan scan;
    for (int k = 0; k <= grid_size; ++k) {
        double x = static_cast<double>(k) / grid_size;
        scan.grid.push_back(x);
        scan.values.push_back(map(x));
    }
    auto derivative = [&](double x) {
        if (x - h < 0.0) return (map(x + h) - map(x)) / h;
        if (x + h > 1.0) return (map(x) - map(x - h)) / h;
        return (map(x + h) - map(x - h)) / (2.0 * h);
    };
    auto add = [&](double x, bool endpoint) {
        for (const auto& fp : scan.fixed_points)
            if (std::abs(fp.value - x) < 1e-9) return;
        ScalarFixedPoint fp;
        fp.value = x;
        fp.derivative = derivative(x);
        fp.stable = std::abs(fp.derivative) < 1.0;
        fp.endpoint = endpoint;
        scan.fixed_points.push_back(fp);
    };

    const int n = grid_size;
    std::vector<double> g(n + 1);
    for (int k = 0; k <= n; ++k) g[k] = scan.values[k] - scan.grid[k];

    if (std::abs(g[0]) < tolerance) add(0.0, true);
    for (int k = 0; k < n; ++k) {
        if (k > 0 && g[k] == 0.0) add(scan.grid[k], false);
        if (!((g[k] < 0.0 && g[k + 1] > 0.0) || (g[k] > 0.0 && g[k + 1] < 0.0))) continue;
        double lo = scan.grid[k], hi = scan.grid[k + 1], glo = g[k];
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            mid = 0.5 * (lo + hi);
            double gm = map(mid) - mid;
            if (std::abs(gm) < tolerance || hi - lo < 1e-15) break;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        bool near_end = mid < 1e-9 || mid > 1.0 - 1e-9;
        if (!near_end || std::abs(map(mid) - mid) < tolerance) add(mid, near_end);
    }
    if (std::abs(g[n]) < tolerance) add(1.0, true);
    std::sort(scan.fixed_points.begin(), scan.fixed_points.end(),
              [](const auto& a, const auto& b) { return a.value < b.value; });
    return scan;
}

double closed_form_rho0(double f0, double f1, double m, double q) {
    double a = m * (f1 - f0);
    double b = f0 * (1.0 - q) + f1 * (q - m);
    double c = -f1 * q;
    constexpr double slack = 1e-12;
    auto in_unit = [&](double r) { return r >= -slack && r <= 1.0 + slack; };
    auto clamp01 = [](double r) { return std::clamp(r, 0.0, 1.0); };
    if (std::abs(a) < 1e-14) {
        if (b == 0.0) throw std::invalid_argument("closed_form_rho0: degenerate equation");
        double r = -c / b;
        if (!in_unit(r)) throw std::invalid_argument("closed_form_rho0: no root in [0,1]");
        return clamp01(r);
    }
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw std::invalid_argument("closed_form_rho0: no real root");
    double sq = std::sqrt(disc);
    double t = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double r1 = t / a;
    double r2 = t != 0.0 ? c / t : r1;
    if (in_unit(r1) && in_unit(r2)) return clamp01(std::min(r1, r2));
    if (in_unit(r1)) return clamp01(r1);
    if (in_unit(r2)) return clamp01(r2);
    throw std::invalid_argument("closed_form_rho0: no root in [0,1]");
}

double winner_opinion(double z, double x_win, const UpdateWeights& w) {
    if (!(w.beta < 1.0)) throw std::invalid_argument("winner_opinion: beta must be < 1");
    return w.q_factor() * z + w.m() * x_win;
}

} // namespace casym
