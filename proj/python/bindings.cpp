#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "egan/cartpole.hpp"
#include "egan/enhancer.hpp"
#include "egan/errors.hpp"
#include "egan/experience.hpp"
#include "egan/gan.hpp"
#include "egan/harness.hpp"
#include "egan/pg_agent.hpp"
#include "egan/pipeline.hpp"

namespace py = pybind11;
using namespace egan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

nn::Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
    nn::Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Array to_array(const nn::Matrix& m) {
    Array a({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), a.mutable_data());
    return a;
}

using StateTuple = std::tuple<double, double, double, double>;

env::CartPoleState to_state(const StateTuple& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t), std::get<3>(t)};
}

// Config values arrive as Python objects; booleans need the config-file spelling.
std::string setting_text(const py::handle& v) {
    if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
    return py::str(v).cast<std::string>();
}

StateTuple from_state(const env::CartPoleState& s) { return {s.x, s.x_dot, s.theta, s.theta_dot}; }

py::dict transition_dict(const env::Transition& t) {
    py::dict d;
    d["state"] = from_state(t.state);
    d["action"] = t.action;
    d["next"] = from_state(t.next);
    d["reward"] = t.reward;
    d["done"] = t.done;
    return d;
}

}  // namespace

PYBIND11_MODULE(_egan, m) {
    m.doc() = "EGAN pre-training for policy gradient on CartPole";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    // environment
    m.def("step", [](const StateTuple& s, int action) {
        if (action != 0 && action != 1) throw UsageError("action must be 0 or 1");
        const env::EnvParams p;
        const auto next = env::dynamics(p, to_state(s), action);
        return py::make_tuple(from_state(next), 1.0, env::out_of_bounds(p, next));
    }, py::arg("state"), py::arg("action"),
       "One CartPole transition: (next_state, reward, terminated by bounds).");

    m.def("random_episode", [](std::uint64_t seed) {
        env::CartPole e;
        Rng rng(seed);
        py::list out;
        for (const auto& t : env::run_episode(e, env::random_policy(), rng).transitions) {
            out.append(transition_dict(t));
        }
        return out;
    }, py::arg("seed"));

    // experience
    py::class_<experience::ReplayBuffer>(m, "ReplayBuffer")
        .def("__len__", &experience::ReplayBuffer::size)
        .def_property_readonly("real_samples", &experience::ReplayBuffer::real_samples)
        .def("__getitem__", [](const experience::ReplayBuffer& b, std::size_t i) {
            if (i >= b.size()) throw py::index_error();
            return transition_dict(b[i]);
        })
        .def("encoded", [](const experience::ReplayBuffer& b) { return to_array(b.encoded(b.stats())); },
             "n x 10 array of normalized (s, a, s', r) rows")
        .def("save_csv", [](const experience::ReplayBuffer& b, const std::filesystem::path& p) {
            experience::save_csv(b, p);
            experience::save_stats(b.stats(), experience::stats_sidecar_path(p));
        });

    m.def("collect_random", [](int episodes, std::uint64_t seed) {
        env::CartPole e;
        Rng rng(seed);
        return experience::collect_random(e, episodes, rng);
    }, py::arg("episodes") = 500, py::arg("seed") = 0);
    m.def("load_csv", &experience::load_csv, py::arg("path"));

    // policy gradient
    m.def("discounted_returns", [](std::vector<double> r, double gamma) {
        return pg::discounted_returns(r, gamma);
    }, py::arg("rewards"), py::arg("gamma") = 0.99);
    m.def("zscore", [](std::vector<double> v) { return pg::zscore(v); }, py::arg("values"));

    // gan / enhancer
    m.def("gan_value", [](std::vector<double> real, std::vector<double> fake) {
        return gan::gan_value(real, fake);
    }, py::arg("d_real"), py::arg("d_fake"));
    m.def("kl_regularizer", [](const Array& p, const Array& q) {
        return enhancer::kl_regularizer(to_matrix(p), to_matrix(q));
    }, py::arg("p_batch"), py::arg("q_batch"));
    m.def("fit_gaussian", [](const Array& a) {
        const auto g = enhancer::fit_gaussian(to_matrix(a));
        return py::make_tuple(g.mean, g.var);
    }, py::arg("batch"), "Per-column mean and floored variance.");

    // experiments
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def(py::init([](const py::kwargs& kw) {
            ExperimentConfig c;
            for (auto item : kw) {
                apply_setting(c, py::str(item.first).cast<std::string>(), setting_text(item.second));
            }
            return c;
        }))
        .def("set", [](ExperimentConfig& c, const std::string& key, const py::object& value) {
            apply_setting(c, key, setting_text(value));
        })
        .def_property("mode", [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); },
                      [](ExperimentConfig& c, const std::string& v) { c.mode = parse_mode(v); })
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("pretrain_episodes", &ExperimentConfig::pretrain_episodes)
        .def_readwrite("training_episodes", &ExperimentConfig::training_episodes)
        .def_readwrite("synthetic_batches", &ExperimentConfig::synthetic_batches)
        .def_readwrite("gan_steps", &ExperimentConfig::gan_steps)
        .def_readwrite("enhancer_steps", &ExperimentConfig::enhancer_steps)
        .def_readwrite("match_sample_budget", &ExperimentConfig::match_sample_budget)
        .def("online_episodes", &ExperimentConfig::online_episodes)
        .def("validate", &ExperimentConfig::validate)
        .def("serialize", &serialize_config)
        .def("__repr__", [](const ExperimentConfig& c) {
            return "<ExperimentConfig mode=" + std::string(to_string(c.mode)) + " seed=" + std::to_string(c.seed) + ">";
        });
    m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); }, py::arg("path"));

    py::class_<LearningCurve>(m, "LearningCurve")
        .def_property_readonly("mode", [](const LearningCurve& c) { return std::string(to_string(c.mode)); })
        .def_readonly("seed", &LearningCurve::seed)
        .def_readonly("offset", &LearningCurve::offset)
        .def_property_readonly("episodes", [](const LearningCurve& c) {
            std::vector<int> v;
            for (const auto& p : c.points) v.push_back(p.episode);
            return v;
        })
        .def_property_readonly("rewards", &LearningCurve::rewards)
        .def_property_readonly("cumulative_samples", [](const LearningCurve& c) {
            std::vector<std::size_t> v;
            for (const auto& p : c.points) v.push_back(p.cumulative_samples);
            return v;
        })
        .def("__len__", [](const LearningCurve& c) { return c.points.size(); })
        .def("write_csv", &write_curve_csv);

    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("read_curve_csv", &read_curve_csv, py::arg("path"));
    m.def("rolling_average", [](std::vector<double> v, std::size_t window) {
        return rolling_average(v, window);
    }, py::arg("rewards"), py::arg("window") = kRollingWindow);
    m.def("samples_to_threshold", [](const LearningCurve& c, double threshold) {
        return samples_to_threshold(c, threshold);
    }, py::arg("curve"), py::arg("threshold"), "None when the threshold is never reached.");
    m.def("aggregate_runs", [](const std::vector<LearningCurve>& curves) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& b : aggregate_runs(curves)) out.emplace_back(b.bin, b.mean, b.std);
        return out;
    }, py::arg("curves"), "(samples_bin, mean, std) rows");

    m.def("pretrain", [](const ExperimentConfig& c) {
        const auto r = [&] {
            py::gil_scoped_release unlocked;
            return pretrain_pipeline(c);
        }();
        py::dict d;
        d["real_samples"] = r.real_samples;
        std::vector<double> d_loss, g_loss;
        for (const auto& rec : r.gan_history) {
            d_loss.push_back(rec.d_loss);
            g_loss.push_back(rec.g_loss);
        }
        d["d_loss"] = d_loss;
        d["g_loss"] = g_loss;
        d["enhancer_loss"] = r.enhancer_history;
        d["kl_history"] = r.kl_history;
        Rng rng = derive_rng(c.seed, kSyntheticStream);
        d["sample"] = to_array(gan::generate_encoded(r.gan, 256, rng));
        return d;
    }, py::arg("config"), "Collect, train the GAN (and enhancer + refinement for egan) and summarize.");
}
