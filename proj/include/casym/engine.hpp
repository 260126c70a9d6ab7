#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "casym/config.hpp"

namespace casym {

struct SimState {
    long step = 0;
    int dims = 0;
    std::size_t n_users = 0;
    std::vector<double> opinions;    // row-major n_users x dims
    std::vector<double> prejudices;  // row-major n_users x dims
    std::vector<double> popularity;  // absolute p_i

    [[nodiscard]] std::span<const double> opinion(std::size_t u) const {
        return {opinions.data() + u * dims, static_cast<std::size_t>(dims)};
    }
    [[nodiscard]] std::span<const double> prejudice(std::size_t u) const {
        return {prejudices.data() + u * dims, static_cast<std::size_t>(dims)};
    }
    [[nodiscard]] UserState user(std::size_t u) const;
    [[nodiscard]] std::vector<double> normalized_popularity() const;
    [[nodiscard]] std::vector<double> mean_opinion() const;
};

struct StepRecord {
    std::size_t influencer = 0;
    int topic = 0;
    std::uint64_t likes = 0;
};

struct Trajectory {
    std::vector<long> steps;
    std::vector<std::vector<double>> pi;            // [sample][influencer]
    std::vector<std::vector<double>> mean_opinion;  // [sample][axis]
    std::optional<SimState> final_state;

    [[nodiscard]] std::size_t size() const { return steps.size(); }
    // Per-influencer mean of pi over the last `tail` samples.
    [[nodiscard]] std::vector<double> tail_mean_pi(std::size_t tail) const;
    [[nodiscard]] std::vector<double> tail_mean_opinion(std::size_t tail) const;
};

struct RunOptions {
    long stride = 0;                 // 0: config stride
    std::vector<long> extra_samples; // additional steps to record
    bool keep_final_state = true;
};

// Configured stride, or n_iter / 1000 (at least 1) when unset.
[[nodiscard]] long sample_stride(const ModelConfig& config, long n_iter);

[[nodiscard]] SimState initial_state(const ModelConfig& config, std::uint64_t seed);

// One iteration of the model loop. Draws are keyed by (seed, state.step).
StepRecord step_inplace(SimState& state, const ModelConfig& config, std::uint64_t seed);
[[nodiscard]] SimState step(SimState state, const ModelConfig& config, std::uint64_t seed);

[[nodiscard]] Trajectory run(const ModelConfig& config, std::uint64_t seed, long n_iter,
                             const RunOptions& options = {});

struct EnsembleResult {
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<double>> run_pi;       // [run][influencer], tail means
    std::vector<std::vector<double>> run_opinion;  // [run][axis], tail means
    std::vector<double> pi_mean, pi_ci_low, pi_ci_high;
    std::vector<double> opinion_mean, opinion_ci_low, opinion_ci_high;
};

// Mean and 95% Student-t interval across runs; zero width for one run.
struct MeanCi {
    double mean;
    double low;
    double high;
};
[[nodiscard]] MeanCi mean_ci95(std::span<const double> xs);

// Calls fn(k) for k in [0, n) on up to `threads` workers (0: hardware).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

[[nodiscard]] EnsembleResult ensemble(const ModelConfig& config, std::span<const std::uint64_t> seeds,
                                      long n_iter, std::size_t tail_samples, int threads = 0);

// seed, seed+1, ..., seed+runs-1
[[nodiscard]] std::vector<std::uint64_t> consecutive_seeds(std::uint64_t seed, int runs);

struct Histogram {
    int dims = 0;
    int bins = 0;
    std::vector<std::uint64_t> counts;  // row-major, axis 0 slowest
    double lower = 0.0;
    double upper = 1.0;
};

[[nodiscard]] Histogram opinion_histogram(const SimState& state, const OpinionSpace& space, int bins_per_axis);
// Counts along one axis only.
[[nodiscard]] std::vector<std::uint64_t> marginal_histogram(const SimState& state, const OpinionSpace& space,
                                                            int axis, int bins);

} // namespace casym
