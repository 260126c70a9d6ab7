#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace casym {

struct OpinionSpace {
    int dims = 2;
    double lower = 0.0;
    double upper = 1.0;

    [[nodiscard]] double width() const { return upper - lower; }
    [[nodiscard]] bool contains(double x) const { return x >= lower && x <= upper; }
    // Reflection x -> (a+b) - x.
    [[nodiscard]] double reflect(double x) const { return lower + upper - x; }
    void validate() const;
};

struct InfluencerSpec {
    std::vector<double> opinion;
    int reference_dir = 0;
    double consistency = 0.8;
    double post_freq = 0.5;
    double initial_popularity = 100.0;
};

struct UserState {
    std::vector<double> opinion;
    std::vector<double> prejudice;
};

// Convex weights of the opinion update x <- alpha*z + beta*x + gamma*x_inf.
struct UpdateWeights {
    double alpha = 0.05;
    double beta = 0.93;
    double gamma = 0.02;

    static UpdateWeights from_alpha_beta(double alpha, double beta);
    // beta held fixed; alpha = delta(1-beta), gamma = (1-delta)(1-beta).
    static UpdateWeights from_stubbornness(double delta, double beta);

    [[nodiscard]] double stubbornness() const;  // delta = alpha / (alpha + gamma)
    [[nodiscard]] double m() const;             // gamma / (1 - beta)
    [[nodiscard]] double q_factor() const;      // alpha / (1 - beta)
    void validate() const;
};

enum class FeedbackFamily { linear, gaussian };

struct KernelSpec {
    double rho = 1.0;
    FeedbackFamily feedback = FeedbackFamily::linear;
    double feedback_scale = 1.0;  // k in exp(-k d^2), gaussian only

    void validate() const;
};

// omega = exp(-rho d^2 / pi), with the pi -> 0 limit (1 at d = 0, else 0).
[[nodiscard]] inline double visibility(double dist_ref, double pi, double rho) {
    if (rho == 0.0) return 1.0;
    if (pi <= 0.0) return dist_ref == 0.0 ? 1.0 : 0.0;
    return std::exp(-rho * dist_ref * dist_ref / pi);
}

// theta(d): 1 - d (linear) or exp(-k d^2) (gaussian).
// Throws std::invalid_argument for the linear family when d > 1.
[[nodiscard]] double feedback_prob(double dist, const KernelSpec& spec);

// Convex form. The result is clamped to the convex hull of the inputs so that
// rounding in alpha+beta+gamma never pushes an opinion outside the box.
[[nodiscard]] inline double update_opinion(double x, double z, double x_inf, const UpdateWeights& w) {
    double y = w.alpha * z + w.beta * x + w.gamma * x_inf;
    double lo = x < z ? x : z;
    double hi = x < z ? z : x;
    lo = x_inf < lo ? x_inf : lo;
    hi = x_inf > hi ? x_inf : hi;
    return y < lo ? lo : (y > hi ? hi : y);
}

// Stubbornness form (1-beta)[delta z + (1-delta) x_inf] + beta x.
[[nodiscard]] double update_opinion_stubborn(double x, double z, double x_inf, const UpdateWeights& w);

// Topic index given two uniforms in [0,1): u_ref decides reference vs other,
// u_other picks uniformly among the d-1 other directions.
[[nodiscard]] int topic_from_uniforms(const InfluencerSpec& spec, int dims, double u_ref, double u_other);

template <class Rng>
[[nodiscard]] int sample_topic(const InfluencerSpec& spec, int dims, Rng& rng) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    return topic_from_uniforms(spec, dims, u1, u2);
}

// n_likes / n_users; throws std::invalid_argument when n_likes > n_users.
[[nodiscard]] double popularity_increment(std::uint64_t n_likes, std::uint64_t n_users);

// p / sum(p). A zero vector maps to the uniform distribution.
[[nodiscard]] std::vector<double> normalize_popularity(std::span<const double> p);

} // namespace casym
