#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casym/analysis.hpp"
#include "casym/core.hpp"
#include "casym/engine.hpp"
#include "casym/fluid.hpp"
#include "casym/fokker_planck.hpp"
#include "casym/rng.hpp"
#include "casym/scenarios.hpp"

using namespace casym;

namespace {

// Small generator over the project's own counter-based stream.
struct Gen {
    CounterRng rng;
    explicit Gen(std::uint64_t seed) : rng(seed, Stream::synthetic, 99) {}
    double unit() { return rng.uniform(); }
    double in(double lo, double hi) { return lo + (hi - lo) * unit(); }
    int below(int n) { return static_cast<int>(unit() * n); }
    UpdateWeights weights() {
        double a = unit(), b = unit(), g = unit();
        double s = a + b + g;
        return UpdateWeights::from_alpha_beta(a / s, b / s);
    }
    // Occasionally hit the boundary values exactly.
    double edgy() {
        int k = below(10);
        return k == 0 ? 0.0 : (k == 1 ? 1.0 : unit());
    }
};

constexpr int kCases = 2000;

} // namespace

TEST_CASE("update stays in the convex hull and matches the stubbornness form") {
    Gen g(1);
    for (int k = 0; k < kCases; ++k) {
        UpdateWeights w = g.weights();
        double x = g.edgy(), z = g.edgy(), xi = g.edgy();
        double y = update_opinion(x, z, xi, w);
        CHECK(y >= std::min({x, z, xi}));
        CHECK(y <= std::max({x, z, xi}));
        if (w.alpha + w.gamma > 0.0) CHECK(std::abs(update_opinion_stubborn(x, z, xi, w) - y) < 1e-12);
    }
}

TEST_CASE("kernels stay in [0,1]") {
    Gen g(2);
    for (int k = 0; k < kCases; ++k) {
        KernelSpec lin;
        double d = g.edgy();
        double t = feedback_prob(d, lin);
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
        KernelSpec gs;
        gs.feedback = FeedbackFamily::gaussian;
        gs.feedback_scale = g.in(0.01, 50.0);
        double tg = feedback_prob(g.in(0.0, 3.0), gs);
        CHECK(tg >= 0.0);
        CHECK(tg <= 1.0);
        double v = visibility(g.in(0.0, 2.0), g.edgy(), g.in(0.0, 10.0));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normalized popularities sum to one") {
    Gen g(3);
    for (int k = 0; k < kCases; ++k) {
        std::vector<double> p(1 + g.below(8));
        for (auto& v : p) v = g.in(0.0, 1e6) * (g.below(4) == 0 ? 0.0 : 1.0);
        auto pi = normalize_popularity(p);
        CHECK(std::abs(std::accumulate(pi.begin(), pi.end(), 0.0) - 1.0) < 1e-12);
    }
}

TEST_CASE("random configurations keep opinions in the box and popularity monotone") {
    Gen g(4);
    for (int k = 0; k < 25; ++k) {
        ModelConfig c = default_config();
        c.space.dims = 1 + g.below(3);
        c.space.lower = g.in(-2.0, 0.0);
        c.space.upper = c.space.lower + g.in(0.2, 1.0);
        int ni = 1 + g.below(4);
        c.influencers.clear();
        double fsum = 0.0;
        for (int i = 0; i < ni; ++i) {
            InfluencerSpec s;
            for (int a = 0; a < c.space.dims; ++a) s.opinion.push_back(g.in(c.space.lower, c.space.upper));
            s.reference_dir = g.below(c.space.dims);
            s.consistency = g.edgy();
            s.post_freq = g.in(0.0, 1.0);
            s.initial_popularity = g.in(0.0, 50.0) + (i == 0 ? 1.0 : 0.0);
            fsum += s.post_freq;
            c.influencers.push_back(s);
        }
        for (auto& s : c.influencers) s.post_freq /= fsum;
        double rest = 1.0;
        for (int i = 0; i + 1 < ni; ++i) rest -= c.influencers[i].post_freq;
        c.influencers.back().post_freq = rest;
        c.population.n_users = 50 + g.below(200);
        c.population.beta_a = {g.in(0.5, 10.0)};
        c.population.beta_b = {g.in(0.5, 10.0)};
        c.population.independent_initial = g.below(2) == 1;
        c.weights = g.weights();
        c.kernels.rho = g.below(3) == 0 ? 0.0 : g.in(0.0, 5.0);
        c.kernels.feedback = g.below(2) ? FeedbackFamily::gaussian : FeedbackFamily::linear;
        c.kernels.feedback_scale = g.in(0.1, 10.0);
        c.validate();

        std::uint64_t seed = 1000 + k;
        SimState s = initial_state(c, seed);
        bool ok = true;
        for (int n = 0; n < 300; ++n) {
            auto before = s.popularity;
            step_inplace(s, c, seed);
            for (std::size_t i = 0; i < before.size(); ++i) ok = ok && s.popularity[i] >= before[i];
            auto pi = s.normalized_popularity();
            ok = ok && std::abs(std::accumulate(pi.begin(), pi.end(), 0.0) - 1.0) < 1e-12;
        }
        for (double x : s.opinions) ok = ok && x >= c.space.lower && x <= c.space.upper;
        CHECK(ok);
    }
}

TEST_CASE("two-influencer map relabeling invariance") {
    Gen g(5);
    for (int k = 0; k < 200; ++k) {
        TwoInfluencerScenario s;
        s.x0 = g.unit();
        s.x1 = g.unit();
        s.f0 = g.unit();
        s.f1 = 1.0 - s.f0;
        s.z = g.unit();
        s.weights = g.weights();
        if (s.weights.beta >= 1.0) continue;
        s.kernels.rho = g.in(0.0, 2.0);
        s.kernels.feedback = g.below(2) ? FeedbackFamily::gaussian : FeedbackFamily::linear;
        s.kernels.feedback_scale = g.in(0.5, 10.0);
        TwoInfluencerScenario r = s;
        r.x0 = 1.0 - s.x1;
        r.x1 = 1.0 - s.x0;
        r.f0 = s.f1;
        r.f1 = s.f0;
        r.z = 1.0 - s.z;
        for (int j = 1; j < 20; ++j) {
            double p = j / 20.0;
            CHECK(std::abs(two_influencer_map(p, s) - (1.0 - two_influencer_map(1.0 - p, r))) < 1e-12);
        }
    }
}

TEST_CASE("closed form agrees with the joint fixed point at rho = 0") {
    Gen g(6);
    for (int k = 0; k < 100; ++k) {
        ModelConfig c = two_influencer_line_config(0.0);
        double f0 = g.in(0.05, 0.95);
        double z = g.in(0.05, 0.95);
        c.influencers[0].post_freq = f0;
        c.influencers[1].post_freq = 1.0 - f0;
        c.population.point = {z};
        FluidProblem p = FluidProblem::from_config(c);
        auto sol = joint_fixed_point(p);
        REQUIRE(sol.converged);
        double cf = closed_form_rho0(f0, 1.0 - f0, c.weights.m(), c.weights.q_factor() * z);
        CHECK(std::abs(cf - sol.pi[1]) < 1e-3);
        CHECK(std::abs(sol.pi[0] + sol.pi[1] - 1.0) < 1e-10);
    }
}

TEST_CASE("F_i is non-decreasing in pi_i") {
    Gen g(7);
    for (int k = 0; k < 100; ++k) {
        FluidProblem p = FluidProblem::from_config(two_influencer_line_config(g.in(0.0, 3.0)));
        p.positions = {g.unit(), g.unit()};
        std::vector<double> xbar{g.unit()};
        for (std::size_t i = 0; i < 2; ++i) {
            double prev = -1.0;
            for (int j = 0; j <= 100; ++j) {
                double F = popularity_weight(i, j / 100.0, xbar, p);
                CHECK(F >= prev);
                prev = F;
            }
        }
    }
}

TEST_CASE("velocity variance is non-negative") {
    Gen g(8);
    for (int k = 0; k < kCases; ++k) {
        FluidProblem p = FluidProblem::from_config(two_influencer_line_config(g.in(0.0, 3.0)));
        p.positions = {g.unit(), g.unit()};
        p.weights = g.weights();
        if (p.weights.beta >= 1.0) continue;
        std::vector<double> pi{g.unit(), 0.0};
        pi[1] = 1.0 - pi[0];
        FpSettings s;
        s.variance = g.below(2) ? VarianceScaling::velocity : VarianceScaling::diffusion;
        CHECK(velocity_variance(g.unit(), g.unit(), pi, p, s) >= 0.0);
    }
}

TEST_CASE("pearson is invariant under positive affine maps") {
    Gen g(9);
    for (int k = 0; k < 200; ++k) {
        std::size_t n = 3 + g.below(20);
        std::vector<double> x(n), y(n);
        for (auto& v : x) v = g.in(-5, 5);
        for (auto& v : y) v = g.in(-5, 5);
        double r = pearson(x, y);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        double a = g.in(0.1, 10), b = g.in(-10, 10);
        std::vector<double> x2;
        for (double v : x) x2.push_back(a * v + b);
        CHECK(std::abs(pearson(x2, y) - r) < 1e-12);
    }
}
