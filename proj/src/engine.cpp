#include "casym/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "casym/errors.hpp"
#include "casym/rng.hpp"

namespace casym {

namespace {

double draw_beta(CounterRng& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    double x = ga(rng);
    double y = gb(rng);
    double s = x + y;
    return s > 0.0 ? x / s : 0.5;
}

std::size_t pick_influencer(const std::vector<InfluencerSpec>& infl, double u) {
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < infl.size(); ++i) {
        if (infl[i].post_freq <= 0.0) continue;
        cum += infl[i].post_freq;
        last = i;
        if (u < cum) return i;
    }
    return last;
}

struct LoopArgs {
    double* x;
    const double* z;
    std::size_t n_users;
    int dims;
    int ref;
    int topic;
    double x_ref;
    double x_topic;
    double omega_coef;  // rho / pi
    double scale;       // gaussian feedback scale
    UpdateWeights w;
    std::uint64_t key;
};

// Exposure: u < exp(-coef d^2). Feedback: u < theta(d). The outcome update is
// a select rather than a branch because roughly half the users like a post;
// the exposure exponential is only evaluated when the feedback draw passes.
template <bool AlwaysVisible, bool Gaussian>
std::uint64_t user_loop(const LoopArgs& a) {
    double* const x = a.x;
    const double* const z = a.z;
    const std::size_t n = a.n_users;
    const std::size_t d = static_cast<std::size_t>(a.dims);
    const std::size_t ref = static_cast<std::size_t>(a.ref);
    const std::size_t topic = static_cast<std::size_t>(a.topic);
    const double x_ref = a.x_ref;
    const double x_topic = a.x_topic;
    const double coef = a.omega_coef;
    const double scale = a.scale;
    const UpdateWeights w = a.w;
    const std::uint64_t key = a.key;
    std::uint64_t likes = 0;
    for (std::size_t u = 0; u < n; ++u) {
        UserDraws r = user_draws(key, u);
        double xj = x[u * d + topic];
        double dj = std::abs(xj - x_topic);
        double theta;
        if constexpr (Gaussian) theta = std::exp(-scale * dj * dj);
        else theta = 1.0 - dj;
        bool like = r.feedback < theta;
        if constexpr (!AlwaysVisible) {
            if (like) {
                double dr = x[u * d + ref] - x_ref;
                like = r.exposure < std::exp(-coef * dr * dr);
            }
        }
        double moved = update_opinion(xj, z[u * d + topic], x_topic, w);
        x[u * d + topic] = like ? moved : xj;
        likes += like;
    }
    return likes;
}

// Exposure when pi_i = 0: only users at zero reference distance see the post.
template <bool Gaussian>
std::uint64_t user_loop_invisible(const LoopArgs& a) {
    std::uint64_t likes = 0;
    const std::size_t d = static_cast<std::size_t>(a.dims);
    for (std::size_t u = 0; u < a.n_users; ++u) {
        double* xu = a.x + u * d;
        if (xu[a.ref] != a.x_ref) continue;
        UserDraws r = user_draws(a.key, u);
        double dj = std::abs(xu[a.topic] - a.x_topic);
        double theta;
        if constexpr (Gaussian) theta = std::exp(-a.scale * dj * dj);
        else theta = 1.0 - dj;
        if (!(r.feedback < theta)) continue;
        xu[a.topic] = update_opinion(xu[a.topic], a.z[u * d + a.topic], a.x_topic, a.w);
        ++likes;
    }
    return likes;
}

std::size_t sample_count(long n_iter, long stride) {
    return static_cast<std::size_t>(n_iter / stride + 1 + (n_iter % stride != 0 ? 1 : 0));
}

} // namespace

long sample_stride(const ModelConfig& config, long n_iter) {
    return config.run.sample_stride > 0 ? config.run.sample_stride : std::max(1L, n_iter / 1000);
}

UserState SimState::user(std::size_t u) const {
    auto o = opinion(u);
    auto z = prejudice(u);
    return {{o.begin(), o.end()}, {z.begin(), z.end()}};
}

std::vector<double> SimState::normalized_popularity() const {
    return normalize_popularity(popularity);
}

std::vector<double> SimState::mean_opinion() const {
    std::vector<double> m(dims, 0.0);
    for (std::size_t u = 0; u < n_users; ++u)
        for (int k = 0; k < dims; ++k) m[k] += opinions[u * dims + k];
    for (auto& v : m) v /= static_cast<double>(n_users);
    return m;
}

std::vector<double> Trajectory::tail_mean_pi(std::size_t tail) const {
    if (tail == 0 || tail > pi.size()) throw ValidationError("tail_samples larger than available samples");
    std::vector<double> out(pi.back().size(), 0.0);
    for (std::size_t s = pi.size() - tail; s < pi.size(); ++s)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += pi[s][i];
    for (auto& v : out) v /= static_cast<double>(tail);
    return out;
}

std::vector<double> Trajectory::tail_mean_opinion(std::size_t tail) const {
    if (tail == 0 || tail > mean_opinion.size())
        throw ValidationError("tail_samples larger than available samples");
    std::vector<double> out(mean_opinion.back().size(), 0.0);
    for (std::size_t s = mean_opinion.size() - tail; s < mean_opinion.size(); ++s)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += mean_opinion[s][i];
    for (auto& v : out) v /= static_cast<double>(tail);
    return out;
}

SimState initial_state(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    const auto& pop = config.population;
    const int d = config.space.dims;
    const double a = config.space.lower;
    const double w = config.space.width();
    SimState st;
    st.dims = d;
    st.n_users = pop.n_users;
    st.opinions.resize(pop.n_users * d);
    st.prejudices.resize(pop.n_users * d);
    for (const auto& s : config.influencers) st.popularity.push_back(s.initial_popularity);

    if (pop.init == InitKind::point) {
        for (std::size_t u = 0; u < pop.n_users; ++u)
            for (int k = 0; k < d; ++k) st.prejudices[u * d + k] = st.opinions[u * d + k] = pop.point[k];
        return st;
    }
    for (std::size_t u = 0; u < pop.n_users; ++u) {
        CounterRng rz(seed, Stream::init, u);
        for (int k = 0; k < d; ++k) st.prejudices[u * d + k] = a + w * draw_beta(rz, pop.shape_a(k), pop.shape_b(k));
        if (pop.independent_initial) {
            CounterRng rx(seed, Stream::prejudice, u);
            for (int k = 0; k < d; ++k)
                st.opinions[u * d + k] = a + w * draw_beta(rx, pop.shape_a(k), pop.shape_b(k));
        } else {
            for (int k = 0; k < d; ++k) st.opinions[u * d + k] = st.prejudices[u * d + k];
        }
    }
    return st;
}

StepRecord step_inplace(SimState& st, const ModelConfig& config, std::uint64_t seed) {
    CounterRng post(seed, Stream::post, static_cast<std::uint64_t>(st.step));
    const std::size_t i = pick_influencer(config.influencers, post.uniform());
    const InfluencerSpec& spec = config.influencers[i];
    int topic = sample_topic(spec, st.dims, post);
    if (config.schedule) {
        if (auto forced = config.schedule->topic_override(st.step, i)) topic = *forced;
    }

    double total = std::accumulate(st.popularity.begin(), st.popularity.end(), 0.0);
    double pi_i = total > 0.0 ? st.popularity[i] / total : 1.0 / static_cast<double>(st.popularity.size());

    LoopArgs args{st.opinions.data(),
                  st.prejudices.data(),
                  st.n_users,
                  st.dims,
                  spec.reference_dir,
                  topic,
                  spec.opinion[spec.reference_dir],
                  spec.opinion[topic],
                  0.0,
                  config.kernels.feedback_scale,
                  config.weights,
                  user_step_key(seed, static_cast<std::uint64_t>(st.step))};

    const bool gaussian = config.kernels.feedback == FeedbackFamily::gaussian;
    std::uint64_t likes = 0;
    if (config.kernels.rho == 0.0) {
        likes = gaussian ? user_loop<true, true>(args) : user_loop<true, false>(args);
    } else if (pi_i <= 0.0) {
        likes = gaussian ? user_loop_invisible<true>(args) : user_loop_invisible<false>(args);
    } else {
        args.omega_coef = config.kernels.rho / pi_i;
        likes = gaussian ? user_loop<false, true>(args) : user_loop<false, false>(args);
    }
    st.popularity[i] += popularity_increment(likes, st.n_users);
    ++st.step;
    return {i, topic, likes};
}

SimState step(SimState state, const ModelConfig& config, std::uint64_t seed) {
    step_inplace(state, config, seed);
    return state;
}

Trajectory run(const ModelConfig& config, std::uint64_t seed, long n_iter, const RunOptions& options) {
    if (n_iter < 0) throw ValidationError("n_iter: must be >= 0");
    SimState st = initial_state(config, seed);
    long stride = options.stride > 0 ? options.stride : sample_stride(config, n_iter);

    std::vector<long> extra = options.extra_samples;
    std::sort(extra.begin(), extra.end());
    auto wanted = [&](long n) {
        return n % stride == 0 || n == n_iter || std::binary_search(extra.begin(), extra.end(), n);
    };

    Trajectory tr;
    tr.steps.reserve(sample_count(n_iter, stride) + extra.size());
    auto record = [&] {
        tr.steps.push_back(st.step);
        tr.pi.push_back(st.normalized_popularity());
        tr.mean_opinion.push_back(st.mean_opinion());
    };
    record();
    while (st.step < n_iter) {
        step_inplace(st, config, seed);
        if (wanted(st.step)) record();
    }
    if (options.keep_final_state) tr.final_state = std::move(st);
    return tr;
}

MeanCi mean_ci95(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_ci95: empty sample");
    double n = static_cast<double>(xs.size());
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() == 1) return {mean, mean, mean};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    double half = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(n);
    return {mean, mean - half, mean + half};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<std::uint64_t> consecutive_seeds(std::uint64_t seed, int runs) {
    std::vector<std::uint64_t> out;
    for (int k = 0; k < runs; ++k) out.push_back(seed + static_cast<std::uint64_t>(k));
    return out;
}

EnsembleResult ensemble(const ModelConfig& config, std::span<const std::uint64_t> seeds, long n_iter,
                        std::size_t tail_samples, int threads) {
    if (seeds.empty()) throw ValidationError("ensemble: at least one seed is required");
    config.validate();
    long stride = sample_stride(config, n_iter);
    if (tail_samples < 1 || tail_samples > sample_count(n_iter, stride))
        throw ValidationError("tail_samples larger than available samples");

    EnsembleResult res;
    res.seeds.assign(seeds.begin(), seeds.end());
    res.run_pi.resize(seeds.size());
    res.run_opinion.resize(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t k) {
        RunOptions opt;
        opt.keep_final_state = false;
        Trajectory tr = run(config, seeds[k], n_iter, opt);
        res.run_pi[k] = tr.tail_mean_pi(tail_samples);
        res.run_opinion[k] = tr.tail_mean_opinion(tail_samples);
    });

    auto summarize = [](const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                        std::vector<double>& lo, std::vector<double>& hi) {
        std::size_t width = rows.front().size();
        for (std::size_t c = 0; c < width; ++c) {
            std::vector<double> col;
            for (const auto& r : rows) col.push_back(r[c]);
            MeanCi m = mean_ci95(col);
            mean.push_back(m.mean);
            lo.push_back(m.low);
            hi.push_back(m.high);
        }
    };
    summarize(res.run_pi, res.pi_mean, res.pi_ci_low, res.pi_ci_high);
    summarize(res.run_opinion, res.opinion_mean, res.opinion_ci_low, res.opinion_ci_high);
    return res;
}

Histogram opinion_histogram(const SimState& state, const OpinionSpace& space, int bins_per_axis) {
    if (bins_per_axis < 2) throw std::invalid_argument("opinion_histogram: bins_per_axis must be >= 2");
    Histogram h;
    h.dims = state.dims;
    h.bins = bins_per_axis;
    h.lower = space.lower;
    h.upper = space.upper;
    std::size_t cells = 1;
    for (int k = 0; k < state.dims; ++k) cells *= static_cast<std::size_t>(bins_per_axis);
    h.counts.assign(cells, 0);
    for (std::size_t u = 0; u < state.n_users; ++u) {
        std::size_t idx = 0;
        for (int k = 0; k < state.dims; ++k) {
            double t = (state.opinions[u * state.dims + k] - space.lower) / space.width();
            auto b = static_cast<long>(std::floor(t * bins_per_axis));
            b = std::clamp(b, 0L, static_cast<long>(bins_per_axis - 1));
            idx = idx * bins_per_axis + static_cast<std::size_t>(b);
        }
        ++h.counts[idx];
    }
    return h;
}

std::vector<std::uint64_t> marginal_histogram(const SimState& state, const OpinionSpace& space, int axis,
                                              int bins) {
    if (bins < 2) throw std::invalid_argument("marginal_histogram: bins must be >= 2");
    if (axis < 0 || axis >= state.dims) throw std::invalid_argument("marginal_histogram: axis out of range");
    std::vector<std::uint64_t> counts(bins, 0);
    for (std::size_t u = 0; u < state.n_users; ++u) {
        double t = (state.opinions[u * state.dims + axis] - space.lower) / space.width();
        auto b = std::clamp(static_cast<long>(std::floor(t * bins)), 0L, static_cast<long>(bins - 1));
        ++counts[b];
    }
    return counts;
}

} // namespace casym
