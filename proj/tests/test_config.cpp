#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "casym/config.hpp"
#include "casym/errors.hpp"
#include "casym/scenarios.hpp"

using namespace casym;
using nlohmann::json;

namespace {

std::filesystem::path config_dir() { return std::filesystem::path(CASYM_SOURCE_DIR) / "configs"; }

std::string error_of(const json& j) {
    try {
        (void)config_from_json(j);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("empty object gives the shared defaults") {
    ModelConfig c = config_from_json(json::object());
    CHECK(c.space.dims == 2);
    CHECK(c.space.lower == 0.0);
    CHECK(c.space.upper == 1.0);
    REQUIRE(c.influencers.size() == 2);
    CHECK(c.influencers[0].opinion == std::vector<double>{0.0, 0.0});
    CHECK(c.influencers[1].opinion == std::vector<double>{1.0, 1.0});
    CHECK(c.influencers[0].reference_dir == 0);
    CHECK(c.influencers[1].reference_dir == 1);
    CHECK(c.influencers[0].initial_popularity == 100.0);
    CHECK(c.influencers[1].initial_popularity == 100.0);
    CHECK(c.influencers[0].post_freq + c.influencers[1].post_freq == doctest::Approx(1.0));
    CHECK(c.population.n_users == 10000);
    CHECK(c.population.init == InitKind::beta);
    CHECK(c.population.shape_a(0) == 10.0);
    CHECK(c.population.shape_b(1) == 10.0);
    CHECK_FALSE(c.population.independent_initial);
    CHECK(c.run.n_iter == 100000);
    CHECK(c.weights.alpha == 0.05);
    CHECK(c.weights.beta == 0.93);
    CHECK(c.weights.gamma == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(c.kernels.feedback == FeedbackFamily::linear);

    ModelConfig f = load_config(config_dir() / "default.json");
    CHECK(config_to_json(f) == config_to_json(c));
}

TEST_CASE("post frequency simplex violation names the field") {
    json j = {{"influencers", {{{"post_freq", 0.6}}, {{"post_freq", 0.6}}}}};
    std::string msg = error_of(j);
    CHECK(msg.find("influencers[].post_freq") != std::string::npos);
}

TEST_CASE("schema violations carry a path") {
    CHECK(error_of({{"kernels", {{"rho", "x"}}}}).find("kernels.rho") != std::string::npos);
    CHECK(error_of({{"population", {{"n_users", 0}}}}).find("population.n_users") != std::string::npos);
    CHECK(error_of({{"weights", {{"alpha", 0.5}, {"beta", 0.3}, {"gamma", 0.1}}}}).find("weights") !=
          std::string::npos);
    CHECK(error_of({{"bogus", 1}}).find("bogus") != std::string::npos);
    CHECK(error_of({{"influencers", {{{"opinion", {1.5, 0.0}}}, {{"opinion", {0.0, 0.0}}}}}})
              .find("influencers[0].opinion") != std::string::npos);
    CHECK(error_of({{"influencers", {{{"reference_dir", 2}}, json::object()}}}).find("reference_dir") !=
          std::string::npos);
    CHECK(error_of({{"weights", {{"alpha", 0.5}, {"beta", 0.6}}}}).size() > 0);
    CHECK(error_of({{"run", {{"seed", -1}}}}).find("run.seed") != std::string::npos);
    CHECK(error_of({{"space", {{"upper", 2.0}}}}).find("kernels.feedback") != std::string::npos);
}

TEST_CASE("schedule validation") {
    json j = {{"run", {{"n_iter", 100}}},
              {"schedule", {{"phases", {{{"start", 10}, {"end", 200}, {"topic", {1, nullptr}}}}}}}};
    CHECK(error_of(j).find("schedule.phases[0]") != std::string::npos);
    j["schedule"]["phases"][0]["end"] = 50;
    ModelConfig c = config_from_json(j);
    REQUIRE(c.schedule);
    CHECK(c.schedule->topic_override(10, 0) == 1);
    CHECK_FALSE(c.schedule->topic_override(10, 1).has_value());
    CHECK_FALSE(c.schedule->topic_override(50, 0).has_value());
    CHECK_FALSE(c.schedule->topic_override(9, 0).has_value());

    json overlap = {{"run", {{"n_iter", 100}}},
                    {"schedule",
                     {{"phases",
                       {{{"start", 0}, {"end", 20}, {"topic", {0, 0}}}, {{"start", 10}, {"end", 30}, {"topic", {0, 0}}}}}}}};
    CHECK(error_of(overlap).find("non-overlapping") != std::string::npos);
}

TEST_CASE("round trip is the identity") {
    for (const ModelConfig& c :
         {default_config(), case_study_config(), two_influencer_line_config(0.3), echo_chamber_config(5.0),
          frequency_sweep_config()}) {
        json a = config_to_json(c);
        json b = config_to_json(config_from_json(a));
        CHECK(a == b);
        CHECK(config_from_json(json::parse(a.dump())).weights.gamma == c.weights.gamma);
    }
}

TEST_CASE("shipped config files match the scenario builders") {
    CHECK(config_to_json(load_config(config_dir() / "case_study.json")) == config_to_json(case_study_config()));
    CHECK(config_to_json(load_config(config_dir() / "echo_chamber.json")) == config_to_json(echo_chamber_config(5.0)));
    CHECK(config_to_json(load_config(config_dir() / "frequency_sweep.json")) ==
          config_to_json(frequency_sweep_config()));
    auto d = load_config(config_dir() / "appendixD.json");
    d.run.seed = 1;
    CHECK(config_to_json(d)["influencers"] == config_to_json(two_influencer_line_config(0.0))["influencers"]);
    for (const char* name : {"consistency_sweep.json", "stubbornness_sweep.json", "default.json"})
        CHECK_NOTHROW((void)load_config(config_dir() / name));
}

TEST_CASE("case study values") {
    ModelConfig c = load_config(config_dir() / "case_study.json");
    CHECK(c.influencers[0].opinion[0] == 0.76);
    CHECK(c.influencers[1].opinion[0] == 0.0);
    CHECK(c.influencers[0].post_freq == 0.108);
    CHECK(c.influencers[1].post_freq == 0.892);
    CHECK(c.influencers[0].initial_popularity == 20.0);
    CHECK(c.influencers[1].initial_popularity == 20.0);
    CHECK(c.weights.alpha == 0.3);
    CHECK(c.weights.beta == 0.65);
    CHECK(c.kernels.feedback == FeedbackFamily::gaussian);
    CHECK(c.kernels.feedback_scale == 8.25);
    CHECK(c.kernels.rho == 0.0);
    CHECK(c.run.n_iter == 15000);
    REQUIRE(c.case_study);
    CHECK(c.case_study->transient == 10000);
    CHECK(c.case_study->window == 550);
}

TEST_CASE("overrides are applied and re-validated") {
    ModelConfig base = two_influencer_line_config(0.0);
    ModelConfig c = with_overrides(base, {"kernels.rho=0.3", "run.seed=7", "influencers[1].consistency=0.5"});
    CHECK(c.kernels.rho == 0.3);
    CHECK(c.run.seed == 7);
    CHECK(c.influencers[1].consistency == 0.5);
    ModelConfig g = with_overrides(base, {"kernels.feedback=gaussian", "kernels.feedback_scale=2"});
    CHECK(g.kernels.feedback == FeedbackFamily::gaussian);
    CHECK_THROWS_AS((void)with_overrides(base, {"influencers.0.post_freq=0.9"}), ValidationError);
    CHECK_THROWS_AS((void)with_overrides(base, {"novalue"}), ValidationError);
    CHECK_THROWS_AS((void)with_overrides(base, {"kernels.rho.x=1"}), ValidationError);

    json doc = {{"a", {{"b", json::array()}}}};
    set_path(doc, "a.b[0].c", 3);
    CHECK(doc["a"]["b"][0]["c"] == 3);
}

TEST_CASE("unreadable files are validation errors") {
    CHECK_THROWS_AS((void)load_config("/nonexistent/x.json"), ValidationError);
    auto tmp = std::filesystem::temp_directory_path() / "casym_bad.json";
    std::ofstream(tmp) << "{ not json";
    CHECK_THROWS_AS((void)load_config(tmp), ValidationError);
    std::filesystem::remove(tmp);
}
