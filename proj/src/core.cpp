#include "casym/core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "casym/errors.hpp"

namespace casym {

namespace {
constexpr double kSumTol = 1e-12;
}

void OpinionSpace::validate() const {
    if (dims < 1) throw ValidationError("space.dims: must be >= 1");
    if (!(lower < upper)) throw ValidationError("space.lower: must be < space.upper");
}

UpdateWeights UpdateWeights::from_alpha_beta(double alpha, double beta) {
    return {alpha, beta, 1.0 - alpha - beta};
}

UpdateWeights UpdateWeights::from_stubbornness(double delta, double beta) {
    return {delta * (1.0 - beta), beta, (1.0 - delta) * (1.0 - beta)};
}

double UpdateWeights::stubbornness() const {
    double s = alpha + gamma;
    if (s <= 0.0) throw std::invalid_argument("stubbornness undefined when alpha + gamma = 0");
    return alpha / s;
}

double UpdateWeights::m() const {
    if (beta >= 1.0) throw std::invalid_argument("m undefined for beta = 1");
    return gamma / (1.0 - beta);
}

double UpdateWeights::q_factor() const {
    if (beta >= 1.0) throw std::invalid_argument("q undefined for beta = 1");
    return alpha / (1.0 - beta);
}

void UpdateWeights::validate() const {
    if (!(alpha >= 0.0)) throw ValidationError("weights.alpha: must be >= 0");
    if (!(beta >= 0.0)) throw ValidationError("weights.beta: must be >= 0");
    if (!(gamma >= 0.0)) throw ValidationError("weights.gamma: must be >= 0");
    if (std::abs(alpha + beta + gamma - 1.0) > kSumTol)
        throw ValidationError("weights: alpha + beta + gamma must equal 1");
}

void KernelSpec::validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("kernels.rho: must be a finite value >= 0");
    if (feedback == FeedbackFamily::gaussian && !(feedback_scale > 0.0 && std::isfinite(feedback_scale)))
        throw ValidationError("kernels.feedback_scale: must be > 0");
}

double feedback_prob(double dist, const KernelSpec& spec) {
    if (spec.feedback == FeedbackFamily::linear) {
        if (dist > 1.0 + 1e-12 || dist < 0.0)
            throw std::invalid_argument("linear feedback requires 0 <= dist <= 1, got " + std::to_string(dist));
        return dist >= 1.0 ? 0.0 : 1.0 - dist;
    }
    return std::exp(-spec.feedback_scale * dist * dist);
}

double update_opinion_stubborn(double x, double z, double x_inf, const UpdateWeights& w) {
    double delta = w.stubbornness();
    return (1.0 - w.beta) * (delta * z + (1.0 - delta) * x_inf) + w.beta * x;
}

int topic_from_uniforms(const InfluencerSpec& spec, int dims, double u_ref, double u_other) {
    if (dims <= 1 || u_ref < spec.consistency) return spec.reference_dir;
    int k = static_cast<int>(u_other * (dims - 1));
    if (k >= dims - 1) k = dims - 2;
    return k < spec.reference_dir ? k : k + 1;
}

double popularity_increment(std::uint64_t n_likes, std::uint64_t n_users) {
    if (n_users == 0) throw std::invalid_argument("popularity_increment: n_users must be positive");
    if (n_likes > n_users) throw std::invalid_argument("popularity_increment: n_likes exceeds n_users");
    return static_cast<double>(n_likes) / static_cast<double>(n_users);
}

std::vector<double> normalize_popularity(std::span<const double> p) {
    std::vector<double> out(p.begin(), p.end());
    double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (total <= 0.0) {
        for (auto& v : out) v = 1.0 / static_cast<double>(out.size());
        return out;
    }
    for (auto& v : out) v /= total;
    return out;
}

} // namespace casym
