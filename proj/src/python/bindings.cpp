#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "casym/analysis.hpp"
#include "casym/cli.hpp"
#include "casym/config.hpp"
#include "casym/engine.hpp"
#include "casym/errors.hpp"
#include "casym/fluid.hpp"
#include "casym/fokker_planck.hpp"
#include "casym/scenarios.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json to_json(const py::handle& obj) {
    auto dumps = py::module_::import("json").attr("dumps");
    return json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

// A config argument is a dict (JSON document), a path, or None for the defaults.
casym::ModelConfig resolve(const py::object& cfg) {
    if (cfg.is_none()) return casym::default_config();
    if (py::isinstance<py::str>(cfg)) return casym::load_config(cfg.cast<std::string>());
    if (py::hasattr(cfg, "__fspath__")) return casym::load_config(py::str(cfg.attr("__fspath__")()).cast<std::string>());
    return casym::config_from_json(to_json(cfg));
}

py::dict trajectory_dict(const casym::Trajectory& t) {
    py::dict d;
    d["steps"] = t.steps;
    d["pi"] = t.pi;
    d["mean_opinion"] = t.mean_opinion;
    if (t.final_state) {
        d["final_opinions"] = t.final_state->opinions;
        d["final_popularity"] = t.final_state->popularity;
    }
    return d;
}

py::dict ensemble_dict(const casym::EnsembleResult& r) {
    py::dict d;
    d["seeds"] = r.seeds;
    d["run_pi"] = r.run_pi;
    d["run_opinion"] = r.run_opinion;
    d["pi_mean"] = r.pi_mean;
    d["pi_ci_low"] = r.pi_ci_low;
    d["pi_ci_high"] = r.pi_ci_high;
    d["opinion_mean"] = r.opinion_mean;
    d["opinion_ci_low"] = r.opinion_ci_low;
    d["opinion_ci_high"] = r.opinion_ci_high;
    return d;
}

py::dict solution_dict(const casym::FixedPointSolution& s) {
    py::dict d;
    d["z"] = s.z;
    d["xbar"] = s.xbar;
    d["pi"] = s.pi;
    d["residual"] = s.residual;
    d["iterations"] = s.iterations;
    d["converged"] = s.converged;
    return d;
}

py::dict case_study_dict(const casym::CaseStudyResult& r) {
    py::dict d;
    d["weeks"] = r.weeks;
    d["pi_mean"] = r.pi_mean;
    d["ci_low"] = r.ci_low;
    d["ci_high"] = r.ci_high;
    py::list runs;
    for (const auto& x : r.runs) {
        py::dict e;
        e["seed"] = x.seed;
        e["weekly_pi"] = x.weekly_pi;
        e["pi_window_start"] = x.pi_window_start;
        e["pi_window_end"] = x.pi_window_end;
        e["rise"] = x.rise();
        e["min_after_window"] = x.min_after_window;
        runs.append(e);
    }
    d["runs"] = runs;
    d["mean_rise"] = r.mean_rise();
    return d;
}

std::vector<casym::PostRecord> posts_from(const std::vector<std::string>& topics) {
    std::vector<casym::PostRecord> out;
    std::int64_t t = 0;
    for (const auto& s : topics) {
        casym::PostRecord p;
        p.influencer_id = "x";
        p.timestamp = t++;
        if (!s.empty()) {
            p.topic = s;
            p.multi_label = s.find('|') != std::string::npos;
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Communication-asymmetry opinion model";

    py::register_exception<casym::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<casym::ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<casym::DegenerateDiffusionError>(m, "DegenerateDiffusionError", PyExc_RuntimeError);
    py::register_exception<casym::UndefinedStatisticError>(m, "UndefinedStatisticError", PyExc_ArithmeticError);

    m.def("visibility", &casym::visibility, py::arg("dist_ref"), py::arg("pi"), py::arg("rho"));
    m.def(
        "feedback_prob",
        [](double dist, const std::string& family, double scale) {
            casym::KernelSpec k;
            k.feedback = family == "gaussian" ? casym::FeedbackFamily::gaussian : casym::FeedbackFamily::linear;
            k.feedback_scale = scale;
            return casym::feedback_prob(dist, k);
        },
        py::arg("dist"), py::arg("family") = "linear", py::arg("scale") = 1.0);
    m.def(
        "update_opinion",
        [](double x, double z, double x_inf, double alpha, double beta) {
            return casym::update_opinion(x, z, x_inf, casym::UpdateWeights::from_alpha_beta(alpha, beta));
        },
        py::arg("x"), py::arg("z"), py::arg("x_inf"), py::arg("alpha") = 0.05, py::arg("beta") = 0.93);

    m.def(
        "resolve_config", [](const py::object& cfg) { return from_json(casym::config_to_json(resolve(cfg))); },
        py::arg("config") = py::none(), "Fully resolved config with defaults filled in");
    m.def(
        "with_overrides",
        [](const py::object& cfg, const std::vector<std::string>& sets) {
            return from_json(casym::config_to_json(casym::with_overrides(resolve(cfg), sets)));
        },
        py::arg("config"), py::arg("sets"));
    m.def(
        "scenario",
        [](const std::string& name, double rho) {
            if (name == "two_influencer_line") return from_json(casym::config_to_json(casym::two_influencer_line_config(rho)));
            if (name == "echo_chamber") return from_json(casym::config_to_json(casym::echo_chamber_config(rho)));
            if (name == "frequency_sweep") return from_json(casym::config_to_json(casym::frequency_sweep_config()));
            if (name == "case_study") return from_json(casym::config_to_json(casym::case_study_config()));
            throw casym::ValidationError("unknown scenario '" + name + "'");
        },
        py::arg("name"), py::arg("rho") = 0.0);

    m.def(
        "simulate",
        [](const py::object& cfg, std::uint64_t seed, long n_iter, long stride) {
            auto c = resolve(cfg);
            casym::RunOptions opt;
            opt.stride = stride;
            casym::Trajectory t;
            {
                py::gil_scoped_release release;
                t = casym::run(c, seed, n_iter < 0 ? c.run.n_iter : n_iter, opt);
            }
            return trajectory_dict(t);
        },
        py::arg("config") = py::none(), py::arg("seed") = 1, py::arg("n_iter") = -1, py::arg("stride") = 0);

    m.def(
        "ensemble",
        [](const py::object& cfg, std::vector<std::uint64_t> seeds, long n_iter, std::size_t tail, int threads) {
            auto c = resolve(cfg);
            if (seeds.empty()) seeds = casym::consecutive_seeds(c.run.seed, c.run.runs);
            casym::EnsembleResult r;
            {
                py::gil_scoped_release release;
                r = casym::ensemble(c, seeds, n_iter < 0 ? c.run.n_iter : n_iter, tail == 0 ? c.run.tail_samples : tail,
                                    threads);
            }
            return ensemble_dict(r);
        },
        py::arg("config") = py::none(), py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("n_iter") = -1,
        py::arg("tail_samples") = 0, py::arg("threads") = 0);

    m.def(
        "joint_fixed_point",
        [](const py::object& cfg) {
            auto c = resolve(cfg);
            casym::JointOptions opt;
            opt.max_outer = c.solver.max_outer;
            return solution_dict(casym::joint_fixed_point(casym::FluidProblem::from_config(c), opt));
        },
        py::arg("config"));

    m.def(
        "fpa_scan",
        [](const py::object& cfg, std::vector<double> rhos) {
            auto c = resolve(cfg);
            if (rhos.empty()) rhos = c.solver.rho_values;
            py::list out;
            for (const auto& row : casym::fpa_scan(c, rhos)) {
                py::dict d;
                d["rho"] = row.rho;
                d["solution"] = solution_dict(row.solution);
                py::list fps;
                for (const auto& fp : row.scan.fixed_points) {
                    py::dict e;
                    e["value"] = fp.value;
                    e["derivative"] = fp.derivative;
                    e["stable"] = fp.stable;
                    e["endpoint"] = fp.endpoint;
                    fps.append(e);
                }
                d["fixed_points"] = fps;
                out.append(d);
            }
            return out;
        },
        py::arg("config"), py::arg("rho_values") = std::vector<double>{});

    m.def(
        "two_influencer_map",
        [](double pi1, const py::object& cfg, bool printed_form) {
            auto p = casym::FluidProblem::from_config(resolve(cfg));
            return casym::two_influencer_map(pi1, casym::TwoInfluencerScenario::from_problem(p, printed_form));
        },
        py::arg("pi1"), py::arg("config"), py::arg("printed_form") = false);

    m.def("closed_form_rho0", &casym::closed_form_rho0, py::arg("f0"), py::arg("f1"), py::arg("m"), py::arg("q"));

    m.def(
        "stationary_density",
        [](const py::object& cfg, std::vector<double> pi, int nodes) {
            auto c = resolve(cfg);
            auto p = casym::FluidProblem::from_config(c);
            if (pi.empty()) pi = casym::joint_fixed_point(p).pi;
            casym::FpSettings s;
            s.variance = c.solver.variance;
            auto grid = casym::uniform_grid(c.space.lower, c.space.upper, nodes > 0 ? nodes : c.solver.density_nodes);
            auto d = casym::stationary_density(pi, grid, p, s);
            py::dict out;
            out["x"] = d.x;
            out["z"] = d.z;
            out["density"] = d.density;
            out["pi"] = pi;
            return out;
        },
        py::arg("config"), py::arg("pi") = std::vector<double>{}, py::arg("nodes") = 0);

    m.def(
        "case_study",
        [](const py::object& cfg, std::vector<std::uint64_t> seeds, int threads) {
            auto c = resolve(cfg);
            if (seeds.empty()) seeds = casym::consecutive_seeds(c.run.seed, c.run.runs);
            casym::CaseStudyResult r;
            {
                py::gil_scoped_release release;
                r = casym::run_case_study(c, seeds, threads);
            }
            return case_study_dict(r);
        },
        py::arg("config"), py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("threads") = 0);

    m.def(
        "consistency",
        [](const std::vector<std::string>& topics) {
            auto e = casym::consistency_estimate(posts_from(topics));
            return py::make_tuple(e.reference_topic, e.consistency, e.tie);
        },
        py::arg("topics"), "Reference topic, consistency and tie flag from a list of labels ('' = unlabeled)");
    m.def("normalized_autocovariance",
          [](const std::vector<double>& seq, std::size_t max_lag) {
              return casym::normalized_autocovariance(seq, max_lag);
          },
          py::arg("seq"), py::arg("max_lag"));
    m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return casym::pearson(x, y); },
          py::arg("x"), py::arg("y"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> full{"casym"};
            full.insert(full.end(), args.begin(), args.end());
            std::vector<const char*> argv;
            for (const auto& a : full) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = casym::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (status, stdout, stderr)");
}
