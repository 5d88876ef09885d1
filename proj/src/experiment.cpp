#include "deepcausal/experiment.hpp"

#include <charconv>
#include <fstream>
#include <set>

namespace deepcausal {

using nlohmann::json;

namespace {

// Runs one pipeline stage, prefixing any failure with the stage name.
template <typename F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError("stage '" + name + "': " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError("stage '" + name + "': " + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw ValidationError("failed writing " + path.string());
}

Vector take_vec(const Vector& v, const IndexVector& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(rows[r])];
  return out;
}

// Twin mode keeps each base unit and its clone on opposite sides of the
// split: test base units are matched against a pool holding their clones.
Split swissroll_split(const SwissRollExperiment& s, std::size_t rows, std::uint64_t seed) {
  if (!s.data.duplicate_twins) return train_test_split(rows, s.test_fraction, seed);
  const auto n = rows / 2;
  auto base = train_test_split(n, s.test_fraction, seed);
  Split out;
  out.test = base.test;
  out.train = base.train;
  for (std::size_t i = 0; i < n; ++i) out.train.push_back(i + n);
  return out;
}

Embedder fit_method(const std::string& method, const Matrix& x, const SwissRollExperiment& s, std::uint64_t seed) {
  if (method == "raw_knn") return fit_identity(x);
  if (method == "pca") return fit_pca(x, s.embedding_dim, s.pca);
  if (method == "lle") return fit_lle(x, s.embedding_dim, s.lle);
  AutoencoderOptions ae = s.autoencoder;
  ae.init_seed = derive_seed(seed, stream::model_init);
  ae.train.seed = derive_seed(seed, stream::model_train);
  return fit_autoencoder(x, s.embedding_dim, ae);
}

std::optional<double> group_silhouette(const Matrix& z, const std::vector<int>& groups) {
  if (std::set<int>(groups.begin(), groups.end()).size() < 2) return std::nullopt;
  return silhouette(z, groups);
}

}  // namespace

bool GradcheckResult::all_passed() const {
  for (const auto& e : entries) {
    if (!e.passed) return false;
  }
  return !entries.empty();
}

SwissRollResult run_swissroll(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::swissroll) throw ValidationError("run_swissroll needs a swissroll config");
  const auto& s = cfg.swissroll;
  SwissRollResult res;
  res.data = stage("generate", [&] {
    auto d = s.data;
    d.seed = derive_seed(cfg.seed, stream::data);
    return gen_swiss_roll(d);
  });
  res.split = stage("split", [&] { return swissroll_split(s, res.data.size(), derive_seed(cfg.seed, stream::split)); });

  const auto& truth = *res.data.truth;
  const Matrix x_train = take_rows(res.data.x, res.split.train);
  const auto w_train = take(res.data.w, res.split.train);
  const auto w_test = take(res.data.w, res.split.test);
  const Vector y_train = take_vec(res.data.y_obs, res.split.train);
  const Vector y_test = take_vec(res.data.y_obs, res.split.test);
  GroundTruth test_truth;
  test_truth.ite_true = take_vec(truth.ite_true, res.split.test);

  MatchOptions mo;
  mo.k = s.k_match;
  mo.caliper = s.caliper;
  for (const auto& method : s.methods) {
    const auto embedder = stage("fit " + method, [&] { return fit_method(method, x_train, s, cfg.seed); });
    const Matrix z = stage("transform " + method, [&] { return embedder.transform(res.data.x); });
    auto report = stage("match " + method, [&] {
      const auto est = estimate_effects_against_pool(take_rows(z, res.split.test), w_test, y_test,
                                                     take_rows(z, res.split.train), w_train, y_train, mo);
      return ite_error(est, test_truth, {}, method, cfg.seed);
    });
    report.silhouette = stage("silhouette " + method, [&] { return group_silhouette(z, truth.group); });
    res.reports.push_back(std::move(report));
    res.embeddings.push_back({method, z});
  }
  if (s.kmeans_clusters > 0) {
    res.kmeans = stage("kmeans", [&] {
      return kmeans(res.data.x, s.kmeans_clusters, derive_seed(cfg.seed, stream::kmeans));
    });
  }
  return res;
}

PropensityResult run_propensity(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::propensity) throw ValidationError("run_propensity needs a propensity config");
  const auto& p = cfg.propensity;
  PropensityResult res;
  res.data = stage("generate", [&] {
    return gen_propensity_pairs(p.n_pairs, p.jitter_sigma, derive_seed(cfg.seed, stream::data));
  });
  res.features = res.data.x;
  if (p.include_outcome) {
    res.features.conservativeResize(Eigen::NoChange, res.features.cols() + 1);
    res.features.col(res.features.cols() - 1) = res.data.y_obs;
  }
  PropensityFitConfig fit = p.fit;
  fit.split_seed = derive_seed(cfg.seed, stream::split);
  fit.net.init_seed = derive_seed(cfg.seed, stream::model_init);
  fit.net.train.seed = derive_seed(cfg.seed, stream::model_train);

  for (const auto& method : p.methods) {
    const auto kind = propensity_kind_from_string(method);
    const auto model = stage("fit " + method, [&] { return fit_propensity(kind, res.features, res.data.w, fit); });
    PropensityMethodResult mr;
    mr.method = method;
    if (kind == PropensityKind::logistic) mr.logistic = model.logistic().fit;
    mr.scores = stage("score " + method, [&] { return model.predict(res.features); });
    mr.matches = stage("match " + method, [&] { return propensity_match(mr.scores, res.data.w, p.direction); });
    auto report = stage("evaluate " + method, [&] {
      std::vector<int> predicted, actual;
      for (auto i : model.holdout_rows()) {
        predicted.push_back(mr.scores[static_cast<Eigen::Index>(i)] >= 0.5 ? 1 : 0);
        actual.push_back(res.data.w[i]);
      }
      return misassignment_report(mr.matches, res.data.truth->pair_index, res.data.w, predicted, actual, method,
                                  cfg.seed);
    });
    res.reports.push_back(std::move(report));
    res.methods.push_back(std::move(mr));
  }
  return res;
}

NetworkSpec random_network_spec(std::uint64_t seed) {
  Rng rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng() % (hi - lo + 1)); };
  constexpr Activation hidden[] = {Activation::identity, Activation::relu, Activation::sigmoid, Activation::tanh};
  NetworkSpec spec;
  const auto depth = pick(1, 3);
  std::size_t fan_in = pick(1, 5);
  const bool classify = pick(0, 2) == 0;
  spec.loss = classify ? Loss::categorical_cross_entropy : Loss::mse;
  for (std::size_t k = 0; k < depth; ++k) {
    const bool last = k + 1 == depth;
    LayerSpec l;
    l.fan_in = fan_in;
    if (last) {
      l.fan_out = classify ? pick(2, 5) : pick(1, 5);
      l.activation = classify ? Activation::softmax : hidden[pick(0, 3)];
    } else {
      l.fan_out = pick(1, 5);
      l.activation = hidden[pick(0, 3)];
      if (pick(0, 1) == 1) l.dropout_rate = 0.1 * static_cast<double>(pick(1, 5));
    }
    spec.layers.push_back(l);
    fan_in = l.fan_out;
  }
  spec.validate();
  return spec;
}

GradcheckResult run_gradcheck(const ExperimentConfig& cfg) {
  if (cfg.kind != ExperimentKind::gradcheck) throw ValidationError("run_gradcheck needs a gradcheck config");
  const auto& g = cfg.gradcheck;
  std::vector<NetworkSpec> grid = g.specs;
  const auto spec_seed = derive_seed(cfg.seed, stream::specs);
  for (std::size_t i = 0; i < g.random_specs; ++i) grid.push_back(random_network_spec(derive_seed(spec_seed, i)));
  if (grid.empty()) throw ValidationError("gradcheck grid is empty");

  GradcheckResult res;
  res.tolerance = g.tolerance;
  const auto check_seed = derive_seed(cfg.seed, stream::model_init);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    GradcheckEntry e;
    e.spec = grid[i];
    e.result = stage("gradcheck spec " + std::to_string(i), [&] {
      return gradient_check(grid[i], derive_seed(check_seed, i), g.batch_rows, g.corrupt_gradient_scale);
    });
    e.passed = e.result.max_relative_error < g.tolerance;
    res.entries.push_back(std::move(e));
  }
  return res;
}

json reports_json(const SwissRollResult& r) {
  json reports = json::array();
  for (const auto& rep : r.reports) reports.push_back(to_json(rep));
  json j = {{"experiment", "swissroll"},
            {"reports", reports},
            {"n_train", r.split.train.size()},
            {"n_test", r.split.test.size()}};
  if (r.kmeans) j["kmeans"] = {{"inertia", r.kmeans->inertia}, {"iterations", r.kmeans->iterations}};
  return j;
}

json reports_json(const PropensityResult& r) {
  json reports = json::array();
  for (const auto& rep : r.reports) reports.push_back(to_json(rep));
  json j = {{"experiment", "propensity"}, {"reports", reports}, {"n_units", r.data.size()}};
  for (const auto& m : r.methods) {
    if (m.method != "logistic") continue;
    j["logistic_fit"] = {{"converged", m.logistic.converged},
                         {"gradient_norm", m.logistic.gradient_norm},
                         {"iterations", m.logistic.iterations}};
  }
  return j;
}

json reports_json(const GradcheckResult& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"spec", spec_to_json(e.spec)},
                       {"max_relative_error", e.result.max_relative_error},
                       {"n_params", e.result.n_params},
                       {"passed", e.passed}});
  }
  return {{"experiment", "gradcheck"},
          {"tolerance", r.tolerance},
          {"entries", entries},
          {"all_passed", r.all_passed()}};
}

void prepare_output_dir(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw ValidationError("output path " + dir.string() + " is not a directory");
    if (!fs::is_empty(dir, ec) && !force) {
      throw ValidationError("output directory " + dir.string() + " is not empty (use --force to overwrite)");
    }
    return;
  }
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_outputs(const SwissRollResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  write_json_file(resolved_config(cfg), dir / "resolved_config.json");
  write_json_file(reports_json(r), dir / "reports.json");
  write_text(dir / "comparison.csv", effect_comparison_csv(r.reports));

  std::vector<char> is_test(r.data.size(), 0);
  for (auto i : r.split.test) is_test[i] = 1;
  const auto& group = r.data.truth->group;
  for (const auto& e : r.embeddings) {
    std::string out = "unit";
    for (Eigen::Index c = 0; c < e.coords.cols(); ++c) out += ",z" + std::to_string(c + 1);
    out += ",group,w,split\n";
    for (Eigen::Index i = 0; i < e.coords.rows(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      out += std::to_string(u);
      for (Eigen::Index c = 0; c < e.coords.cols(); ++c) out += "," + fmt(e.coords(i, c));
      out += "," + std::to_string(group[u]) + "," + std::to_string(r.data.w[u]) + "," +
             (is_test[u] ? "test" : "train") + "\n";
    }
    write_text(dir / ("embedding_" + e.method + ".csv"), out);
  }
  if (r.kmeans) {
    std::string out = "unit";
    for (Eigen::Index c = 0; c < r.data.x.cols(); ++c) out += ",x" + std::to_string(c + 1);
    out += ",group,cluster\n";
    for (Eigen::Index i = 0; i < r.data.x.rows(); ++i) {
      const auto u = static_cast<std::size_t>(i);
      out += std::to_string(u);
      for (Eigen::Index c = 0; c < r.data.x.cols(); ++c) out += "," + fmt(r.data.x(i, c));
      out += "," + std::to_string(group[u]) + "," + std::to_string(r.kmeans->labels[u]) + "\n";
    }
    write_text(dir / "kmeans.csv", out);
  }
}

void write_outputs(const PropensityResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  write_json_file(resolved_config(cfg), dir / "resolved_config.json");
  write_json_file(reports_json(r), dir / "reports.json");
  write_text(dir / "comparison.csv", propensity_comparison_csv(r.reports));

  const auto& pair = *r.data.truth->pair_index;
  std::string out = "method,unit,w,score";
  for (Eigen::Index c = 0; c < r.data.x.cols(); ++c) out += ",x" + std::to_string(c + 1);
  out += ",y_obs,matched_index,matched_score,pair_index\n";
  for (const auto& m : r.methods) {
    for (const auto& match : m.matches) {
      const auto i = static_cast<Eigen::Index>(match.query_index);
      const auto j = match.neighbor_indices.front();
      out += m.method + "," + std::to_string(match.query_index) + "," + std::to_string(r.data.w[match.query_index]) +
             "," + fmt(m.scores[i]);
      for (Eigen::Index c = 0; c < r.data.x.cols(); ++c) out += "," + fmt(r.data.x(i, c));
      out += "," + fmt(r.data.y_obs[i]) + "," + std::to_string(j) + "," +
             fmt(m.scores[static_cast<Eigen::Index>(j)]) + "," + std::to_string(pair[match.query_index]) + "\n";
    }
  }
  write_text(dir / "matched_pairs.csv", out);
}

void write_outputs(const GradcheckResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  write_json_file(resolved_config(cfg), dir / "resolved_config.json");
  const auto j = reports_json(r);
  write_json_file(j, dir / "gradcheck.json");
  write_json_file(j, dir / "reports.json");
}

}  // namespace deepcausal
