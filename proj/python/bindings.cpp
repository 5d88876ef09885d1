#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "deepcausal/experiment.hpp"

namespace py = pybind11;
using namespace deepcausal;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python side parses it.
py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

json from_python(const py::object& o) {
  if (py::isinstance<py::str>(o)) return json::parse(o.cast<std::string>());
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict dataset_dict(const ObservationalDataset& ds) {
  py::dict d;
  d["x"] = ds.x;
  d["w"] = ds.w;
  d["y_obs"] = ds.y_obs;
  if (ds.truth) {
    d["y0"] = ds.truth->y0;
    d["y1"] = ds.truth->y1;
    d["ite_true"] = ds.truth->ite_true;
    d["group"] = ds.truth->group;
    if (ds.truth->pair_index) d["pair_index"] = *ds.truth->pair_index;
  }
  return d;
}

py::dict estimate_dict(const EffectEstimate& e) {
  py::dict d;
  d["ite"] = e.ite;
  d["ate"] = e.ate;
  d["matched"] = e.matched;
  d["n_unmatched"] = e.n_unmatched;
  return d;
}

py::list matches_list(const std::vector<MatchResult>& ms) {
  py::list out;
  for (const auto& m : ms) {
    py::dict d;
    d["query_index"] = m.query_index;
    d["neighbors"] = m.neighbor_indices;
    d["distances"] = m.distances;
    out.append(d);
  }
  return out;
}

ExperimentConfig config_for(const std::string& kind, const py::object& config, std::optional<std::uint64_t> seed) {
  ExperimentConfig c = config.is_none() ? ExperimentConfig::defaults(experiment_kind_from_string(kind))
                                        : parse_config(from_python(config));
  if (to_string(c.kind) != kind) {
    throw ValidationError("config is for experiment '" + to_string(c.kind) + "', not '" + kind + "'");
  }
  if (seed) c.seed = *seed;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matching-based treatment effect estimation on learned embeddings";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "gen_swiss_roll",
      [](std::size_t n, double noise_sigma, std::uint64_t seed, bool duplicate_twins, double p_treat) {
        SwissRollConfig cfg;
        cfg.n = n;
        cfg.noise_sigma = noise_sigma;
        cfg.seed = seed;
        cfg.duplicate_twins = duplicate_twins;
        cfg.p_treat = p_treat;
        return dataset_dict(gen_swiss_roll(cfg));
      },
      py::arg("n") = 1500, py::arg("noise_sigma") = 0.05, py::arg("seed") = 0, py::arg("duplicate_twins") = false,
      py::arg("p_treat") = 0.5);

  m.def(
      "gen_propensity_pairs",
      [](std::size_t n, double jitter_sigma, std::uint64_t seed) {
        return dataset_dict(gen_propensity_pairs(n, jitter_sigma, seed));
      },
      py::arg("n") = 1000, py::arg("jitter_sigma") = 0.02, py::arg("seed") = 0);

  py::class_<Embedder>(m, "Embedder")
      .def_property_readonly("kind", [](const Embedder& e) { return to_string(e.kind()); })
      .def_property_readonly("input_dim", &Embedder::input_dim)
      .def_property_readonly("output_dim", &Embedder::output_dim)
      .def("transform", &Embedder::transform, py::arg("x"))
      .def("save", [](const Embedder& e, const std::string& path) { save_embedder(e, path); }, py::arg("path"))
      .def_static("load", [](const std::string& path) { return load_embedder(path); }, py::arg("path"));

  m.def("fit_identity", &fit_identity, py::arg("x"));
  m.def(
      "fit_pca", [](const Matrix& x, std::size_t m, bool standardize) { return fit_pca(x, m, {standardize}); },
      py::arg("x"), py::arg("m") = 2, py::arg("standardize") = false);
  m.def(
      "fit_lle", [](const Matrix& x, std::size_t m, std::size_t k, double reg) { return fit_lle(x, m, {k, reg}); },
      py::arg("x"), py::arg("m") = 2, py::arg("k_neighbors") = 10, py::arg("reg") = 1e-3);
  m.def(
      "fit_autoencoder",
      [](const Matrix& x, std::size_t m, std::vector<std::size_t> hidden, const std::string& activation,
         std::optional<std::string> bottleneck_activation, std::size_t epochs, std::size_t batch_size,
         std::uint64_t seed) {
        AutoencoderOptions o;
        o.hidden = std::move(hidden);
        o.hidden_activation = activation_from_string(activation);
        if (bottleneck_activation) o.bottleneck_activation = activation_from_string(*bottleneck_activation);
        o.train.epochs = epochs;
        o.train.batch_size = batch_size;
        o.train.seed = derive_seed(seed, 1);
        o.init_seed = seed;
        return fit_autoencoder(x, m, o);
      },
      py::arg("x"), py::arg("m") = 2, py::arg("hidden") = std::vector<std::size_t>{},
      py::arg("activation") = "tanh", py::arg("bottleneck_activation") = py::none(), py::arg("epochs") = 300,
      py::arg("batch_size") = 32, py::arg("seed") = 0);

  m.def("kmeans",
        [](const Matrix& x, std::size_t k, std::uint64_t seed) {
          const auto r = kmeans(x, k, seed);
          py::dict d;
          d["centroids"] = r.centroids;
          d["labels"] = r.labels;
          d["inertia"] = r.inertia;
          d["iterations"] = r.iterations;
          return d;
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "nearest_opposite",
      [](const Matrix& z, const std::vector<int>& w, std::size_t i, std::size_t k) {
        const auto r = nearest_opposite(z, w, i, k);
        return py::make_tuple(r.neighbor_indices, r.distances);
      },
      py::arg("z"), py::arg("w"), py::arg("i"), py::arg("k") = 1);
  m.def(
      "estimate_effects",
      [](const Matrix& z, const std::vector<int>& w, const Vector& y, std::size_t k, std::optional<double> caliper) {
        return estimate_dict(estimate_effects(z, w, y, {k, caliper}));
      },
      py::arg("z"), py::arg("w"), py::arg("y_obs"), py::arg("k") = 1, py::arg("caliper") = py::none());
  m.def(
      "propensity_match",
      [](const Vector& scores, const std::vector<int>& w, const std::string& direction) {
        MatchDirection dir = MatchDirection::treated_to_control;
        if (direction == "control_to_treated") {
          dir = MatchDirection::control_to_treated;
        } else if (direction != "treated_to_control") {
          throw ValidationError("direction must be treated_to_control or control_to_treated");
        }
        return matches_list(propensity_match(scores, w, dir));
      },
      py::arg("scores"), py::arg("w"), py::arg("direction") = "treated_to_control");

  m.def("propensity_net_param_count", [](std::size_t d) { return build_propensity_net(d).param_count(); },
        py::arg("input_dim") = 2);

  py::class_<PropensityModel>(m, "PropensityModel")
      .def_property_readonly("kind", [](const PropensityModel& p) { return to_string(p.kind()); })
      .def_property_readonly("input_dim", &PropensityModel::input_dim)
      .def_property_readonly("holdout_rows", &PropensityModel::holdout_rows)
      .def("predict", &PropensityModel::predict, py::arg("x"))
      .def("log_odds", &PropensityModel::log_odds, py::arg("x"))
      .def("save", [](const PropensityModel& p, const std::string& path) { save_propensity_model(p, path); },
           py::arg("path"))
      .def_static("load", [](const std::string& path) { return load_propensity_model(path); }, py::arg("path"));

  m.def(
      "fit_propensity",
      [](const std::string& kind, const Matrix& x, const std::vector<int>& w, double holdout_fraction,
         std::uint64_t seed, std::size_t epochs) {
        PropensityFitConfig cfg;
        cfg.holdout_fraction = holdout_fraction;
        cfg.split_seed = seed;
        cfg.net.init_seed = derive_seed(seed, 1);
        cfg.net.train.seed = derive_seed(seed, 2);
        cfg.net.train.epochs = epochs;
        return fit_propensity(propensity_kind_from_string(kind), x, w, cfg);
      },
      py::arg("kind"), py::arg("x"), py::arg("w"), py::arg("holdout_fraction") = 0.2, py::arg("seed") = 0,
      py::arg("epochs") = 200);
  m.def(
      "holdout_accuracy",
      [](const PropensityModel& p, const Matrix& x, const std::vector<int>& w) { return holdout_accuracy(p, x, w); },
      py::arg("model"), py::arg("x"), py::arg("w"));

  m.def("silhouette", [](const Matrix& z, const std::vector<int>& labels) { return silhouette(z, labels); },
        py::arg("z"), py::arg("labels"));

  m.def(
      "gradient_check",
      [](const py::object& spec, std::uint64_t seed, std::size_t batch_rows) {
        const auto r = gradient_check(spec_from_json(from_python(spec)), seed, batch_rows);
        return py::make_tuple(r.max_relative_error, r.n_params);
      },
      py::arg("spec"), py::arg("seed") = 0, py::arg("batch_rows") = 4);

  m.def(
      "default_config",
      [](const std::string& kind) { return to_python(resolved_config(ExperimentConfig::defaults(experiment_kind_from_string(kind)))); },
      py::arg("kind"));

  m.def(
      "run_experiment",
      [](const std::string& kind, const py::object& config, std::optional<std::uint64_t> seed) {
        const auto c = config_for(kind, config, seed);
        json j;
        {
          py::gil_scoped_release release;
          switch (c.kind) {
            case ExperimentKind::swissroll:
              j = reports_json(run_swissroll(c));
              break;
            case ExperimentKind::propensity:
              j = reports_json(run_propensity(c));
              break;
            case ExperimentKind::gradcheck:
              j = reports_json(run_gradcheck(c));
              break;
          }
        }
        return to_python(j);
      },
      py::arg("kind"), py::arg("config") = py::none(), py::arg("seed") = py::none());

  m.attr("CONFIG_VERSION") = kConfigVersion;
}
