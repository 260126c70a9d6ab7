#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "casym/core.hpp"
#include "casym/rng.hpp"

using namespace casym;

TEST_CASE("visibility examples") {
    CHECK(visibility(0.0, 0.5, 1.0) == 1.0);
    CHECK(visibility(0.5, 0.25, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-14));
    CHECK(visibility(0.7, 0.0, 2.0) == 0.0);
    CHECK(visibility(0.0, 0.0, 2.0) == 1.0);
    CHECK(visibility(0.9, 0.01, 0.0) == 1.0);
}

TEST_CASE("visibility is monotone on a grid") {
    for (double rho : {0.001, 0.3, 1.0, 5.0}) {
        for (int a = 0; a <= 50; ++a) {
            double pi = a / 50.0;
            double prev = 2.0;
            for (int b = 0; b <= 50; ++b) {
                double v = visibility(b / 50.0, pi, rho);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                CHECK(v <= prev);
                prev = v;
            }
        }
        for (int b = 0; b <= 50; ++b) {
            double prev = -1.0;
            for (int a = 0; a <= 50; ++a) {
                double v = visibility(b / 50.0, a / 50.0, rho);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("feedback examples") {
    KernelSpec lin;
    lin.feedback = FeedbackFamily::linear;
    CHECK(feedback_prob(0.0, lin) == 1.0);
    CHECK(feedback_prob(1.0, lin) == 0.0);
    CHECK(feedback_prob(0.25, lin) == 0.75);
    CHECK_THROWS_AS((void)feedback_prob(1.5, lin), std::invalid_argument);

    KernelSpec g;
    g.feedback = FeedbackFamily::gaussian;
    g.feedback_scale = 8.25;
    CHECK(feedback_prob(0.5, g) == doctest::Approx(std::exp(-2.0625)).epsilon(1e-14));
    CHECK(feedback_prob(0.5, g) == doctest::Approx(0.12714).epsilon(1e-4));
    CHECK(feedback_prob(0.0, g) == 1.0);
}

TEST_CASE("kernel validation") {
    KernelSpec k;
    k.rho = -1.0;
    CHECK_THROWS(k.validate());
    k.rho = 0.0;
    k.feedback = FeedbackFamily::gaussian;
    k.feedback_scale = 0.0;
    CHECK_THROWS(k.validate());
}

TEST_CASE("update examples") {
    UpdateWeights w;  // 0.05, 0.93, 0.02
    CHECK(update_opinion(0.4, 0.4, 1.0, w) == doctest::Approx(0.412).epsilon(1e-14));
    CHECK(update_opinion(0.5, 0.5, 0.5, w) == 0.5);
    auto w2 = UpdateWeights::from_alpha_beta(0.3, 0.65);
    CHECK(update_opinion(0.5, 0.5, 0.5, w2) == 0.5);
    CHECK(std::abs(update_opinion_stubborn(0.4, 0.4, 1.0, w) - 0.412) < 1e-12);
}

TEST_CASE("derived weights") {
    UpdateWeights w;
    CHECK(w.stubbornness() == doctest::Approx(0.05 / 0.07));
    CHECK(w.m() == doctest::Approx(2.0 / 7.0));
    CHECK(w.q_factor() == doctest::Approx(5.0 / 7.0));
    auto s = UpdateWeights::from_stubbornness(0.25, 0.93);
    CHECK(s.beta == 0.93);
    CHECK(s.alpha == doctest::Approx(0.25 * 0.07));
    CHECK(s.gamma == doctest::Approx(0.75 * 0.07));
    CHECK(s.stubbornness() == doctest::Approx(0.25));
    UpdateWeights bad{0.5, 0.5, 0.5};
    CHECK_THROWS(bad.validate());
    UpdateWeights neg{-0.1, 1.0, 0.1};
    CHECK_THROWS(neg.validate());
}

TEST_CASE("topic sampling") {
    InfluencerSpec s;
    s.reference_dir = 1;
    s.consistency = 1.0;
    CounterRng rng(3, Stream::synthetic, 0);
    for (int k = 0; k < 1000; ++k) CHECK(sample_topic(s, 4, rng) == 1);

    s.consistency = 0.3;
    s.reference_dir = 0;
    for (int k = 0; k < 1000; ++k) CHECK(sample_topic(s, 1, rng) == 0);

    s.consistency = 0.8;
    s.reference_dir = 0;
    int hits = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) hits += sample_topic(s, 2, rng) == 0;
    CHECK(std::abs(hits / double(n) - 0.8) < 0.01);

    // non-reference topics are uniform
    s.consistency = 0.0;
    s.reference_dir = 2;
    int counts[4] = {0, 0, 0, 0};
    for (int k = 0; k < 30000; ++k) ++counts[sample_topic(s, 4, rng)];
    CHECK(counts[2] == 0);
    for (int t : {0, 1, 3}) CHECK(std::abs(counts[t] / 30000.0 - 1.0 / 3.0) < 0.015);
}

TEST_CASE("popularity increment") {
    CHECK(popularity_increment(0, 10000) == 0.0);
    CHECK(popularity_increment(10000, 10000) == 1.0);
    CHECK(popularity_increment(137, 1000) == doctest::Approx(0.137).epsilon(1e-15));
    CHECK_THROWS_AS((void)popularity_increment(11, 10), std::invalid_argument);
    CHECK_THROWS_AS((void)popularity_increment(0, 0), std::invalid_argument);
}

TEST_CASE("normalized popularity") {
    std::vector<double> p{100.0, 300.0};
    auto pi = normalize_popularity(p);
    CHECK(pi[0] == 0.25);
    CHECK(pi[1] == 0.75);
    std::vector<double> z{0.0, 0.0, 0.0};
    auto u = normalize_popularity(z);
    for (double v : u) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("opinion space") {
    OpinionSpace s;
    CHECK(s.reflect(0.2) == 0.8);
    OpinionSpace bad{0, 0.0, 1.0};
    CHECK_THROWS(bad.validate());
    OpinionSpace flat{1, 1.0, 1.0};
    CHECK_THROWS(flat.validate());
}

TEST_CASE("rng uniforms are open on both ends") {
    CHECK(unit_from_u32(0) > 0.0);
    CHECK(unit_from_u32(0xFFFFFFFFu) < 1.0);
    CHECK(unit_from_u64(0) > 0.0);
    CHECK(unit_from_u64(~0ULL) < 1.0);
    auto key = user_step_key(7, 11);
    auto a = user_draws(key, 5);
    auto b = user_draws(key, 5);
    CHECK(a.exposure == b.exposure);
    CHECK(a.feedback == b.feedback);
    CHECK(user_draws(key, 6).exposure != a.exposure);
}
