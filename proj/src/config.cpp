#include "casym/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <string>

#include "casym/errors.hpp"

namespace casym {

using nlohmann::json;

namespace {

constexpr double kSumTol = 1e-12;

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

void check_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError((path.empty() ? "config" : path) + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& path) {
    for (const auto& item : j.items()) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
        if (!ok) throw ValidationError(join_path(path, item.key()) + ": unknown field");
    }
}

double get_number(const json& j, const char* key, double def, const std::string& path) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) throw ValidationError(join_path(path, key) + ": expected a number");
    return v.get<double>();
}

long get_integer(const json& j, const char* key, long def, const std::string& path) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long>(d);
    }
    throw ValidationError(join_path(path, key) + ": expected an integer");
}

bool get_bool(const json& j, const char* key, bool def, const std::string& path) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ValidationError(join_path(path, key) + ": expected true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& def, const std::string& path) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) throw ValidationError(join_path(path, key) + ": expected a string");
    return v.get<std::string>();
}

// A number or an array of numbers.
std::vector<double> get_vector(const json& j, const char* key, std::vector<double> def, const std::string& path) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ValidationError(join_path(path, key) + ": expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ValidationError(join_path(path, key) + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<InfluencerSpec> default_influencers(int dims) {
    InfluencerSpec a;
    a.opinion.assign(dims, 0.0);
    a.reference_dir = 0;
    InfluencerSpec b;
    b.opinion.assign(dims, 1.0);
    b.reference_dir = dims > 1 ? 1 : 0;
    return {a, b};
}

int infer_dims(const json& j) {
    if (j.contains("space") && j["space"].is_object() && j["space"].contains("dims"))
        return static_cast<int>(get_integer(j["space"], "dims", 2, "space"));
    if (j.contains("influencers") && j["influencers"].is_array()) {
        for (const auto& inf : j["influencers"]) {
            if (inf.is_object() && inf.contains("opinion")) {
                const json& o = inf["opinion"];
                if (o.is_array()) return static_cast<int>(o.size());
                if (o.is_number()) return 1;
            }
        }
    }
    return 2;
}

FeedbackFamily parse_feedback(const std::string& s, const std::string& path) {
    if (s == "linear") return FeedbackFamily::linear;
    if (s == "gaussian") return FeedbackFamily::gaussian;
    throw ValidationError(path + ": expected \"linear\" or \"gaussian\"");
}

VarianceScaling parse_scaling(const std::string& s, const std::string& path) {
    if (s == "diffusion") return VarianceScaling::diffusion;
    if (s == "velocity") return VarianceScaling::velocity;
    throw ValidationError(path + ": expected \"diffusion\" or \"velocity\"");
}

// Splits "a.b[2].c" into {"a", "b", "2", "c"}.
std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : path) {
        if (ch == '.' || ch == '[' || ch == ']') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool is_index(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace

double PopulationSpec::shape_a(int axis) const {
    return beta_a.size() == 1 ? beta_a[0] : beta_a.at(axis);
}

double PopulationSpec::shape_b(int axis) const {
    return beta_b.size() == 1 ? beta_b[0] : beta_b.at(axis);
}

std::optional<int> PhaseSchedule::topic_override(long step, std::size_t influencer) const {
    for (const auto& ph : phases) {
        if (step >= ph.start && step < ph.end) {
            if (influencer < ph.topic.size()) return ph.topic[influencer];
            return std::nullopt;
        }
    }
    return std::nullopt;
}

ModelConfig default_config() {
    return config_from_json(json::object());
}

ModelConfig config_from_json(const json& j) {
    check_object(j, "");
    check_keys(j, {"space", "influencers", "population", "weights", "kernels", "run", "schedule", "case_study",
                   "sweep", "solver"},
               "");
    ModelConfig c;
    int dims = infer_dims(j);

    json space = j.value("space", json::object());
    check_object(space, "space");
    check_keys(space, {"dims", "lower", "upper"}, "space");
    c.space.dims = dims;
    c.space.lower = get_number(space, "lower", 0.0, "space");
    c.space.upper = get_number(space, "upper", 1.0, "space");
    c.space.validate();

    if (j.contains("influencers")) {
        const json& arr = j["influencers"];
        if (!arr.is_array()) throw ValidationError("influencers: expected an array");
        auto defaults = default_influencers(dims);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string p = "influencers[" + std::to_string(i) + "]";
            const json& e = arr[i];
            check_object(e, p);
            check_keys(e, {"opinion", "reference_dir", "consistency", "post_freq", "initial_popularity"}, p);
            InfluencerSpec s = i < defaults.size() ? defaults[i] : InfluencerSpec{};
            if (i >= defaults.size() && !e.contains("opinion"))
                throw ValidationError(p + ".opinion: required for influencers beyond the first two");
            s.opinion = get_vector(e, "opinion", s.opinion, p);
            s.reference_dir = static_cast<int>(get_integer(e, "reference_dir", s.reference_dir, p));
            s.consistency = get_number(e, "consistency", s.consistency, p);
            s.post_freq = get_number(e, "post_freq", 1.0 / static_cast<double>(arr.size()), p);
            s.initial_popularity = get_number(e, "initial_popularity", s.initial_popularity, p);
            c.influencers.push_back(std::move(s));
        }
    } else {
        c.influencers = default_influencers(dims);
    }

    json pop = j.value("population", json::object());
    check_object(pop, "population");
    check_keys(pop, {"n_users", "init", "beta_a", "beta_b", "point", "prejudice_mode"}, "population");
    long n_users = get_integer(pop, "n_users", 10000, "population");
    if (n_users < 1) throw ValidationError("population.n_users: must be >= 1");
    c.population.n_users = static_cast<std::size_t>(n_users);
    std::string init = get_string(pop, "init", pop.contains("point") ? "point" : "beta", "population");
    if (init == "beta") c.population.init = InitKind::beta;
    else if (init == "point") c.population.init = InitKind::point;
    else throw ValidationError("population.init: expected \"beta\" or \"point\"");
    c.population.beta_a = get_vector(pop, "beta_a", {10.0}, "population");
    c.population.beta_b = get_vector(pop, "beta_b", {10.0}, "population");
    c.population.point = get_vector(pop, "point", {}, "population");
    std::string mode = get_string(pop, "prejudice_mode", "equal", "population");
    if (mode == "equal") c.population.independent_initial = false;
    else if (mode == "independent") c.population.independent_initial = true;
    else throw ValidationError("population.prejudice_mode: expected \"equal\" or \"independent\"");

    json w = j.value("weights", json::object());
    check_object(w, "weights");
    check_keys(w, {"alpha", "beta", "gamma"}, "weights");
    double alpha = get_number(w, "alpha", 0.05, "weights");
    double beta = get_number(w, "beta", 0.93, "weights");
    c.weights = UpdateWeights::from_alpha_beta(alpha, beta);
    if (w.contains("gamma")) {
        double gamma = get_number(w, "gamma", 0.0, "weights");
        if (std::abs(alpha + beta + gamma - 1.0) > kSumTol)
            throw ValidationError("weights: alpha + beta + gamma must equal 1");
    }

    json k = j.value("kernels", json::object());
    check_object(k, "kernels");
    check_keys(k, {"visibility", "rho", "feedback", "feedback_scale"}, "kernels");
    if (get_string(k, "visibility", "gaussian", "kernels") != "gaussian")
        throw ValidationError("kernels.visibility: only \"gaussian\" is supported");
    c.kernels.rho = get_number(k, "rho", 1.0, "kernels");
    c.kernels.feedback = parse_feedback(get_string(k, "feedback", "linear", "kernels"), "kernels.feedback");
    c.kernels.feedback_scale = get_number(k, "feedback_scale", 1.0, "kernels");

    json r = j.value("run", json::object());
    check_object(r, "run");
    check_keys(r, {"n_iter", "seed", "sample_stride", "tail_samples", "runs", "threads", "post_rate"}, "run");
    c.run.n_iter = get_integer(r, "n_iter", 100000, "run");
    if (r.contains("seed")) {
        if (!r["seed"].is_number_unsigned() && !(r["seed"].is_number_integer() && r["seed"].get<long>() >= 0))
            throw ValidationError("run.seed: expected a non-negative integer");
        c.run.seed = r["seed"].get<std::uint64_t>();
    }
    c.run.sample_stride = get_integer(r, "sample_stride", 0, "run");
    long tail = get_integer(r, "tail_samples", 100, "run");
    if (tail < 1) throw ValidationError("run.tail_samples: must be >= 1");
    c.run.tail_samples = static_cast<std::size_t>(tail);
    c.run.runs = static_cast<int>(get_integer(r, "runs", 10, "run"));
    c.run.threads = static_cast<int>(get_integer(r, "threads", 0, "run"));
    c.run.post_rate = get_number(r, "post_rate", 1.0, "run");

    if (j.contains("schedule") && !j["schedule"].is_null()) {
        const json& s = j["schedule"];
        check_object(s, "schedule");
        check_keys(s, {"phases"}, "schedule");
        PhaseSchedule sched;
        if (s.contains("phases")) {
            if (!s["phases"].is_array()) throw ValidationError("schedule.phases: expected an array");
            for (std::size_t i = 0; i < s["phases"].size(); ++i) {
                std::string p = "schedule.phases[" + std::to_string(i) + "]";
                const json& ph = s["phases"][i];
                check_object(ph, p);
                check_keys(ph, {"start", "end", "topic"}, p);
                Phase phase;
                phase.start = get_integer(ph, "start", 0, p);
                phase.end = get_integer(ph, "end", 0, p);
                if (ph.contains("topic")) {
                    const json& t = ph["topic"];
                    if (!t.is_array()) throw ValidationError(p + ".topic: expected an array of integers or nulls");
                    for (const auto& e : t) {
                        if (e.is_null()) phase.topic.emplace_back(std::nullopt);
                        else if (e.is_number_integer()) phase.topic.emplace_back(e.get<int>());
                        else throw ValidationError(p + ".topic: expected integers or nulls");
                    }
                }
                sched.phases.push_back(std::move(phase));
            }
        }
        c.schedule = std::move(sched);
    }

    if (j.contains("case_study") && !j["case_study"].is_null()) {
        const json& s = j["case_study"];
        check_object(s, "case_study");
        check_keys(s, {"transient", "window", "steps_per_week", "crisis_offset_weeks", "weeks", "crisis_topic",
                       "focus"},
                   "case_study");
        CaseStudySpec cs;
        cs.transient = get_integer(s, "transient", cs.transient, "case_study");
        cs.window = get_integer(s, "window", cs.window, "case_study");
        cs.steps_per_week = get_integer(s, "steps_per_week", cs.steps_per_week, "case_study");
        cs.crisis_offset_weeks = get_integer(s, "crisis_offset_weeks", cs.crisis_offset_weeks, "case_study");
        cs.weeks = get_integer(s, "weeks", cs.weeks, "case_study");
        cs.crisis_topic = static_cast<int>(get_integer(s, "crisis_topic", cs.crisis_topic, "case_study"));
        long focus = get_integer(s, "focus", 0, "case_study");
        if (focus < 0) throw ValidationError("case_study.focus: must be >= 0");
        cs.focus = static_cast<std::size_t>(focus);
        c.case_study = cs;
    }

    if (j.contains("sweep") && !j["sweep"].is_null()) {
        const json& s = j["sweep"];
        check_object(s, "sweep");
        check_keys(s, {"param", "values", "runs", "tail_samples"}, "sweep");
        SweepSpec sw;
        sw.param = get_string(s, "param", "", "sweep");
        sw.values = get_vector(s, "values", {}, "sweep");
        sw.runs = static_cast<int>(get_integer(s, "runs", c.run.runs, "sweep"));
        long t = get_integer(s, "tail_samples", static_cast<long>(c.run.tail_samples), "sweep");
        if (t < 1) throw ValidationError("sweep.tail_samples: must be >= 1");
        sw.tail_samples = static_cast<std::size_t>(t);
        c.sweep = sw;
    }

    json sv = j.value("solver", json::object());
    check_object(sv, "solver");
    check_keys(sv, {"rho_values", "scan_grid", "tolerance", "prejudice_nodes", "density_nodes", "printed_map_form",
                    "variance", "max_outer"},
               "solver");
    c.solver.rho_values = get_vector(sv, "rho_values", c.solver.rho_values, "solver");
    c.solver.scan_grid = static_cast<int>(get_integer(sv, "scan_grid", c.solver.scan_grid, "solver"));
    c.solver.tolerance = get_number(sv, "tolerance", c.solver.tolerance, "solver");
    c.solver.prejudice_nodes =
        static_cast<int>(get_integer(sv, "prejudice_nodes", c.solver.prejudice_nodes, "solver"));
    c.solver.density_nodes = static_cast<int>(get_integer(sv, "density_nodes", c.solver.density_nodes, "solver"));
    c.solver.max_outer = static_cast<int>(get_integer(sv, "max_outer", c.solver.max_outer, "solver"));
    c.solver.printed_map_form = get_bool(sv, "printed_map_form", false, "solver");
    c.solver.variance = parse_scaling(get_string(sv, "variance", "diffusion", "solver"), "solver.variance");

    c.validate();
    return c;
}

void ModelConfig::validate() const {
    space.validate();
    const int d = space.dims;
    if (influencers.empty()) throw ValidationError("influencers: at least one influencer is required");
    double fsum = 0.0;
    double psum = 0.0;
    for (std::size_t i = 0; i < influencers.size(); ++i) {
        const auto& s = influencers[i];
        std::string p = "influencers[" + std::to_string(i) + "]";
        if (static_cast<int>(s.opinion.size()) != d)
            throw ValidationError(p + ".opinion: expected " + std::to_string(d) + " components");
        for (double x : s.opinion)
            if (!space.contains(x)) throw ValidationError(p + ".opinion: components must lie in [lower, upper]");
        if (s.reference_dir < 0 || s.reference_dir >= d)
            throw ValidationError(p + ".reference_dir: must be in [0, dims)");
        if (!(s.consistency >= 0.0 && s.consistency <= 1.0))
            throw ValidationError(p + ".consistency: must be in [0, 1]");
        if (!(s.post_freq >= 0.0 && s.post_freq <= 1.0))
            throw ValidationError(p + ".post_freq: must be in [0, 1]");
        if (!(s.initial_popularity >= 0.0) || !std::isfinite(s.initial_popularity))
            throw ValidationError(p + ".initial_popularity: must be a finite value >= 0");
        fsum += s.post_freq;
        psum += s.initial_popularity;
    }
    if (std::abs(fsum - 1.0) > kSumTol) throw ValidationError("influencers[].post_freq: must sum to 1");
    if (!(psum > 0.0)) throw ValidationError("influencers[].initial_popularity: at least one must be positive");

    weights.validate();
    kernels.validate();
    if (kernels.feedback == FeedbackFamily::linear && space.width() > 1.0)
        throw ValidationError("kernels.feedback: linear feedback requires upper - lower <= 1");

    const auto& pop = population;
    if (pop.n_users < 1) throw ValidationError("population.n_users: must be >= 1");
    if (pop.init == InitKind::beta) {
        for (const auto* v : {&pop.beta_a, &pop.beta_b}) {
            const char* name = v == &pop.beta_a ? "population.beta_a" : "population.beta_b";
            if (v->size() != 1 && static_cast<int>(v->size()) != d)
                throw ValidationError(std::string(name) + ": expected one value or one per axis");
            for (double a : *v)
                if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError(std::string(name) + ": must be > 0");
        }
    } else {
        if (static_cast<int>(pop.point.size()) != d)
            throw ValidationError("population.point: expected " + std::to_string(d) + " components");
        for (double x : pop.point)
            if (!space.contains(x)) throw ValidationError("population.point: components must lie in [lower, upper]");
    }

    if (run.n_iter < 0) throw ValidationError("run.n_iter: must be >= 0");
    if (run.sample_stride < 0) throw ValidationError("run.sample_stride: must be >= 0");
    if (run.tail_samples < 1) throw ValidationError("run.tail_samples: must be >= 1");
    if (run.runs < 1) throw ValidationError("run.runs: must be >= 1");
    if (run.threads < 0) throw ValidationError("run.threads: must be >= 0");
    if (!(run.post_rate > 0.0) || !std::isfinite(run.post_rate))
        throw ValidationError("run.post_rate: must be > 0");

    if (schedule) {
        long prev_end = 0;
        for (std::size_t k = 0; k < schedule->phases.size(); ++k) {
            const auto& ph = schedule->phases[k];
            std::string p = "schedule.phases[" + std::to_string(k) + "]";
            if (ph.start < 0 || ph.end < ph.start || ph.end > run.n_iter)
                throw ValidationError(p + ": phase must satisfy 0 <= start <= end <= run.n_iter");
            if (ph.start < prev_end) throw ValidationError(p + ": phases must be ordered and non-overlapping");
            prev_end = ph.end;
            if (ph.topic.size() != influencers.size())
                throw ValidationError(p + ".topic: expected one entry per influencer");
            for (const auto& t : ph.topic)
                if (t && (*t < 0 || *t >= d)) throw ValidationError(p + ".topic: direction must be in [0, dims)");
        }
    }

    if (case_study) {
        const auto& cs = *case_study;
        if (cs.transient < 0) throw ValidationError("case_study.transient: must be >= 0");
        if (cs.window < 0) throw ValidationError("case_study.window: must be >= 0");
        if (cs.steps_per_week < 1) throw ValidationError("case_study.steps_per_week: must be >= 1");
        if (cs.crisis_offset_weeks < 0) throw ValidationError("case_study.crisis_offset_weeks: must be >= 0");
        if (cs.weeks < 1) throw ValidationError("case_study.weeks: must be >= 1");
        if (cs.crisis_topic < 0 || cs.crisis_topic >= d)
            throw ValidationError("case_study.crisis_topic: must be in [0, dims)");
        if (cs.focus >= influencers.size()) throw ValidationError("case_study.focus: no such influencer");
        long crisis_end = cs.transient + cs.crisis_offset_weeks * cs.steps_per_week + cs.window;
        long obs_end = cs.transient + cs.weeks * cs.steps_per_week;
        if (crisis_end > run.n_iter || obs_end > run.n_iter)
            throw ValidationError("case_study: schedule extends beyond run.n_iter");
    }

    if (sweep) {
        if (sweep->param.empty()) throw ValidationError("sweep.param: required");
        if (sweep->values.empty()) throw ValidationError("sweep.values: at least one value is required");
        if (sweep->runs < 1) throw ValidationError("sweep.runs: must be >= 1");
    }

    if (solver.scan_grid < 100) throw ValidationError("solver.scan_grid: must be >= 100");
    if (!(solver.tolerance > 0.0)) throw ValidationError("solver.tolerance: must be > 0");
    if (solver.prejudice_nodes < 2) throw ValidationError("solver.prejudice_nodes: must be >= 2");
    if (solver.density_nodes < 3) throw ValidationError("solver.density_nodes: must be >= 3");
    if (solver.max_outer < 1) throw ValidationError("solver.max_outer: must be >= 1");
    for (double r : solver.rho_values)
        if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("solver.rho_values: entries must be >= 0");
}

std::string to_string(FeedbackFamily f) {
    return f == FeedbackFamily::linear ? "linear" : "gaussian";
}

json config_to_json(const ModelConfig& c) {
    json j;
    j["space"] = {{"dims", c.space.dims}, {"lower", c.space.lower}, {"upper", c.space.upper}};
    j["influencers"] = json::array();
    for (const auto& s : c.influencers) {
        j["influencers"].push_back({{"opinion", s.opinion},
                                    {"reference_dir", s.reference_dir},
                                    {"consistency", s.consistency},
                                    {"post_freq", s.post_freq},
                                    {"initial_popularity", s.initial_popularity}});
    }
    json pop = {{"n_users", c.population.n_users},
                {"init", c.population.init == InitKind::beta ? "beta" : "point"},
                {"beta_a", c.population.beta_a},
                {"beta_b", c.population.beta_b},
                {"prejudice_mode", c.population.independent_initial ? "independent" : "equal"}};
    if (c.population.init == InitKind::point) pop["point"] = c.population.point;
    j["population"] = pop;
    j["weights"] = {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}};
    j["kernels"] = {{"visibility", "gaussian"},
                    {"rho", c.kernels.rho},
                    {"feedback", to_string(c.kernels.feedback)},
                    {"feedback_scale", c.kernels.feedback_scale}};
    j["run"] = {{"n_iter", c.run.n_iter},         {"seed", c.run.seed},   {"sample_stride", c.run.sample_stride},
                {"tail_samples", c.run.tail_samples}, {"runs", c.run.runs}, {"threads", c.run.threads},
                {"post_rate", c.run.post_rate}};
    if (c.schedule) {
        json phases = json::array();
        for (const auto& ph : c.schedule->phases) {
            json t = json::array();
            for (const auto& o : ph.topic) t.push_back(o ? json(*o) : json(nullptr));
            phases.push_back({{"start", ph.start}, {"end", ph.end}, {"topic", t}});
        }
        j["schedule"] = {{"phases", phases}};
    }
    if (c.case_study) {
        const auto& cs = *c.case_study;
        j["case_study"] = {{"transient", cs.transient},
                           {"window", cs.window},
                           {"steps_per_week", cs.steps_per_week},
                           {"crisis_offset_weeks", cs.crisis_offset_weeks},
                           {"weeks", cs.weeks},
                           {"crisis_topic", cs.crisis_topic},
                           {"focus", cs.focus}};
    }
    if (c.sweep) {
        j["sweep"] = {{"param", c.sweep->param},
                      {"values", c.sweep->values},
                      {"runs", c.sweep->runs},
                      {"tail_samples", c.sweep->tail_samples}};
    }
    j["solver"] = {{"rho_values", c.solver.rho_values},
                   {"scan_grid", c.solver.scan_grid},
                   {"tolerance", c.solver.tolerance},
                   {"prejudice_nodes", c.solver.prejudice_nodes},
                   {"density_nodes", c.solver.density_nodes},
                   {"max_outer", c.solver.max_outer},
                   {"printed_map_form", c.solver.printed_map_form},
                   {"variance", c.solver.variance == VarianceScaling::diffusion ? "diffusion" : "velocity"}};
    return j;
}

ModelConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

void set_path(json& doc, const std::string& path, json value) {
    auto tokens = split_path(path);
    if (tokens.empty()) throw ValidationError("--set: empty key");
    json* cur = &doc;
    std::string walked;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::string& tok = tokens[t];
        walked = walked.empty() ? tok : walked + "." + tok;
        bool last = t + 1 == tokens.size();
        if (cur->is_array()) {
            if (!is_index(tok)) throw ValidationError(walked + ": expected a list index");
            std::size_t idx = std::stoul(tok);
            if (idx > cur->size()) throw ValidationError(walked + ": index out of range");
            if (idx == cur->size()) cur->push_back(json::object());
            cur = &(*cur)[idx];
        } else {
            if (cur->is_null()) *cur = json::object();
            if (!cur->is_object()) throw ValidationError(walked + ": cannot descend into a scalar");
            cur = &(*cur)[tok];
        }
        if (last) *cur = std::move(value);
    }
}

void apply_override(json& doc, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("--set: expected KEY=VALUE, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq);
    std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    set_path(doc, key, std::move(value));
}

ModelConfig with_overrides(const ModelConfig& base, const std::vector<std::string>& assignments) {
    if (assignments.empty()) return base;
    json doc = config_to_json(base);
    for (const auto& a : assignments) apply_override(doc, a);
    return config_from_json(doc);
}

} // namespace casym
