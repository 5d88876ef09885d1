#include <set>

#include "deepcausal/experiment.hpp"

namespace deepcausal {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::swissroll: return "swissroll";
    case ExperimentKind::propensity: return "propensity";
    case ExperimentKind::gradcheck: return "gradcheck";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "swissroll") return ExperimentKind::swissroll;
  if (s == "propensity") return ExperimentKind::propensity;
  if (s == "gradcheck") return ExperimentKind::gradcheck;
  throw ValidationError("unknown experiment '" + s + "' (expected swissroll, propensity or gradcheck)");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  auto& ae = c.swissroll.autoencoder;
  ae.hidden = {32, 32};
  ae.hidden_activation = Activation::relu;
  ae.bottleneck_activation = Activation::tanh;
  ae.train.epochs = 1500;
  ae.train.batch_size = 32;
  ae.restarts = 4;
  return c;
}

namespace {

bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Reads one JSON object, remembering which keys were consumed so that the
// leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void get(const char* key, std::uint64_t& out) {
    if (const auto* v = take(key)) {
      if (!is_count(*v)) throw ValidationError(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, double& out) {
    if (const auto* v = take(key)) {
      if (!v->is_number()) throw ValidationError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const auto* v = take(key)) {
      if (!v->is_boolean()) throw ValidationError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const auto* v = take(key)) {
      if (!v->is_string()) throw ValidationError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::optional<double>& out) {
    if (const auto* v = take(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ValidationError(where(key) + " must be a number or null");
      }
    }
  }
  void get(const char* key, std::vector<std::string>& out) {
    if (const auto* v = take(key)) {
      if (!v->is_array()) throw ValidationError(where(key) + " must be a list of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) throw ValidationError(where(key) + " must be a list of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void get(const char* key, std::vector<std::size_t>& out) {
    if (const auto* v = take(key)) {
      if (!v->is_array()) throw ValidationError(where(key) + " must be a list of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!is_count(e)) throw ValidationError(where(key) + " must be a list of non-negative integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }
  void get(const char* key, std::array<double, 3>& out) {
    if (const auto* v = take(key)) {
      if (!v->is_array() || v->size() != 3) throw ValidationError(where(key) + " must be a list of 3 numbers");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!(*v)[i].is_number()) throw ValidationError(where(key) + " must be a list of 3 numbers");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  const json* raw(const char* key) { return take(key); }

  std::optional<Reader> child(const char* key) {
    if (const auto* v = take(key)) return Reader(*v, where(key));
    return std::nullopt;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ValidationError("unknown config key '" + where(item.key().c_str()) + "'");
    }
  }

  std::string where(const char* key = nullptr) const {
    if (!key) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json* take(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_train(Reader r, TrainConfig& t) {
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("shuffle", t.shuffle);
  if (auto o = r.child("optimizer")) {
    std::string name = "adadelta";
    o->get("name", name);
    if (name == "adadelta") {
      AdadeltaConfig a;
      if (auto* cur = std::get_if<AdadeltaConfig>(&t.optimizer)) a = *cur;
      o->get("rho", a.rho);
      o->get("eps", a.eps);
      t.optimizer = a;
    } else if (name == "sgd") {
      SgdConfig s;
      if (auto* cur = std::get_if<SgdConfig>(&t.optimizer)) s = *cur;
      o->get("learning_rate", s.learning_rate);
      t.optimizer = s;
    } else {
      throw ValidationError(o->where("name") + ": unknown optimizer '" + name + "' (expected adadelta or sgd)");
    }
    o->finish();
  }
  r.finish();
  t.validate();
}

json train_json(const TrainConfig& t) {
  json opt;
  if (const auto* a = std::get_if<AdadeltaConfig>(&t.optimizer)) {
    opt = {{"name", "adadelta"}, {"rho", a->rho}, {"eps", a->eps}};
  } else {
    opt = {{"name", "sgd"}, {"learning_rate", std::get<SgdConfig>(t.optimizer).learning_rate}};
  }
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"shuffle", t.shuffle}, {"optimizer", opt}};
}

void check_methods(const std::vector<std::string>& methods, const std::set<std::string>& known, const char* what) {
  if (methods.empty()) throw ValidationError(std::string(what) + ".methods must not be empty");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (!known.count(m)) throw ValidationError(std::string(what) + ".methods: unknown method '" + m + "'");
    if (!seen.insert(m).second) throw ValidationError(std::string(what) + ".methods: '" + m + "' listed twice");
  }
}

void read_swissroll(Reader r, SwissRollExperiment& s) {
  if (auto d = r.child("data")) {
    d->get("n", s.data.n);
    d->get("noise_sigma", s.data.noise_sigma);
    d->get("coeff_control", s.data.coeff_control);
    d->get("coeff_treated", s.data.coeff_treated);
    d->get("outcome_noise_sigma", s.data.outcome_noise_sigma);
    d->get("p_treat", s.data.p_treat);
    d->get("duplicate_twins", s.data.duplicate_twins);
    d->finish();
  }
  r.get("test_fraction", s.test_fraction);
  r.get("methods", s.methods);
  r.get("embedding_dim", s.embedding_dim);
  r.get("k_match", s.k_match);
  r.get("caliper", s.caliper);
  r.get("kmeans_clusters", s.kmeans_clusters);
  if (auto p = r.child("pca")) {
    p->get("standardize", s.pca.standardize);
    p->finish();
  }
  if (auto l = r.child("lle")) {
    l->get("k_neighbors", s.lle.k_neighbors);
    l->get("reg", s.lle.reg);
    l->finish();
  }
  if (auto a = r.child("autoencoder")) {
    a->get("hidden", s.autoencoder.hidden);
    std::string act = to_string(s.autoencoder.hidden_activation);
    a->get("activation", act);
    s.autoencoder.hidden_activation = activation_from_string(act);
    std::string code = to_string(s.autoencoder.bottleneck_activation.value_or(s.autoencoder.hidden_activation));
    a->get("bottleneck_activation", code);
    s.autoencoder.bottleneck_activation = activation_from_string(code);
    a->get("restarts", s.autoencoder.restarts);
    if (auto t = a->child("train")) read_train(*t, s.autoencoder.train);
    a->finish();
  }
  r.finish();

  s.data.validate();
  check_methods(s.methods, {"raw_knn", "pca", "lle", "autoencoder"}, "swissroll");
  if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0)) {
    throw ValidationError("swissroll.test_fraction must lie in (0, 1)");
  }
  if (s.embedding_dim < 1) throw ValidationError("swissroll.embedding_dim must be >= 1");
  if (s.k_match < 1) throw ValidationError("swissroll.k_match must be >= 1");
  if (s.autoencoder.restarts < 1) throw ValidationError("swissroll.autoencoder.restarts must be >= 1");
  if (s.caliper && !(*s.caliper >= 0.0)) throw ValidationError("swissroll.caliper must be >= 0");
}

json swissroll_json(const SwissRollExperiment& s) {
  const auto& d = s.data;
  const auto& ae = s.autoencoder;
  return {{"data",
           {{"n", d.n},
            {"noise_sigma", d.noise_sigma},
            {"coeff_control", d.coeff_control},
            {"coeff_treated", d.coeff_treated},
            {"outcome_noise_sigma", d.outcome_noise_sigma},
            {"p_treat", d.p_treat},
            {"duplicate_twins", d.duplicate_twins}}},
          {"test_fraction", s.test_fraction},
          {"methods", s.methods},
          {"embedding_dim", s.embedding_dim},
          {"k_match", s.k_match},
          {"caliper", s.caliper ? json(*s.caliper) : json(nullptr)},
          {"kmeans_clusters", s.kmeans_clusters},
          {"pca", {{"standardize", s.pca.standardize}}},
          {"lle", {{"k_neighbors", s.lle.k_neighbors}, {"reg", s.lle.reg}}},
          {"autoencoder",
           {{"hidden", ae.hidden},
            {"activation", to_string(ae.hidden_activation)},
            {"bottleneck_activation", to_string(ae.bottleneck_activation.value_or(ae.hidden_activation))},
            {"restarts", ae.restarts},
            {"train", train_json(ae.train)}}}};
}

void read_propensity(Reader r, PropensityExperiment& p) {
  r.get("n_pairs", p.n_pairs);
  r.get("jitter_sigma", p.jitter_sigma);
  r.get("include_outcome", p.include_outcome);
  r.get("methods", p.methods);
  std::string dir = p.direction == MatchDirection::treated_to_control ? "treated_to_control" : "control_to_treated";
  r.get("direction", dir);
  if (dir == "treated_to_control") {
    p.direction = MatchDirection::treated_to_control;
  } else if (dir == "control_to_treated") {
    p.direction = MatchDirection::control_to_treated;
  } else {
    throw ValidationError("propensity.direction must be treated_to_control or control_to_treated");
  }
  r.get("holdout_fraction", p.fit.holdout_fraction);
  if (auto l = r.child("logistic")) {
    l->get("l2", p.fit.logistic.l2);
    l->get("grad_tol", p.fit.logistic.grad_tol);
    l->get("max_iter", p.fit.logistic.max_iter);
    l->finish();
  }
  if (auto n = r.child("propensity_net")) {
    if (auto t = n->child("train")) read_train(*t, p.fit.net.train);
    n->finish();
  }
  r.finish();

  if (p.n_pairs < 1) throw ValidationError("propensity.n_pairs must be >= 1");
  if (!(p.jitter_sigma > 0.0)) throw ValidationError("propensity.jitter_sigma must be > 0");
  if (!(p.fit.holdout_fraction > 0.0 && p.fit.holdout_fraction < 1.0)) {
    throw ValidationError("propensity.holdout_fraction must lie in (0, 1)");
  }
  if (!(p.fit.logistic.grad_tol > 0.0)) throw ValidationError("propensity.logistic.grad_tol must be > 0");
  if (p.fit.logistic.l2 < 0.0) throw ValidationError("propensity.logistic.l2 must be >= 0");
  check_methods(p.methods, {"logistic", "propensity_net"}, "propensity");
}

json propensity_json(const PropensityExperiment& p) {
  return {{"n_pairs", p.n_pairs},
          {"jitter_sigma", p.jitter_sigma},
          {"include_outcome", p.include_outcome},
          {"methods", p.methods},
          {"direction", p.direction == MatchDirection::treated_to_control ? "treated_to_control" : "control_to_treated"},
          {"holdout_fraction", p.fit.holdout_fraction},
          {"logistic",
           {{"l2", p.fit.logistic.l2}, {"grad_tol", p.fit.logistic.grad_tol}, {"max_iter", p.fit.logistic.max_iter}}},
          {"propensity_net", {{"train", train_json(p.fit.net.train)}}}};
}

void read_gradcheck(Reader r, GradcheckExperiment& g) {
  if (const auto* specs = r.raw("specs")) {
    if (!specs->is_array()) throw ValidationError("gradcheck.specs must be a list of network specs");
    g.specs.clear();
    for (const auto& s : *specs) {
      try {
        g.specs.push_back(spec_from_json(s));
      } catch (const json::exception& e) {
        throw ValidationError(std::string("gradcheck.specs: malformed spec: ") + e.what());
      }
    }
  }
  r.get("random_specs", g.random_specs);
  r.get("batch_rows", g.batch_rows);
  r.get("tolerance", g.tolerance);
  r.get("corrupt_gradient_scale", g.corrupt_gradient_scale);
  r.finish();

  if (g.specs.empty() && g.random_specs == 0) throw ValidationError("gradcheck grid is empty");
  if (g.batch_rows < 1) throw ValidationError("gradcheck.batch_rows must be >= 1");
  if (!(g.tolerance > 0.0)) throw ValidationError("gradcheck.tolerance must be > 0");
}

json gradcheck_json(const GradcheckExperiment& g) {
  json specs = json::array();
  for (const auto& s : g.specs) specs.push_back(spec_to_json(s));
  return {{"specs", specs},
          {"random_specs", g.random_specs},
          {"batch_rows", g.batch_rows},
          {"tolerance", g.tolerance},
          {"corrupt_gradient_scale", g.corrupt_gradient_scale}};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Reader r(j, "");
  if (!r.has("version")) throw ValidationError("config is missing \"version\"");
  std::uint64_t version = 0;
  r.get("version", version);
  if (version != kConfigVersion) {
    throw ValidationError("unsupported config version " + std::to_string(version) + " (expected " +
                          std::to_string(kConfigVersion) + ")");
  }
  if (!r.has("experiment")) throw ValidationError("config is missing \"experiment\"");
  std::string kind;
  r.get("experiment", kind);
  auto c = ExperimentConfig::defaults(experiment_kind_from_string(kind));
  r.get("seed", c.seed);
  switch (c.kind) {
    case ExperimentKind::swissroll:
      if (auto s = r.child("swissroll")) read_swissroll(*s, c.swissroll);
      break;
    case ExperimentKind::propensity:
      if (auto s = r.child("propensity")) read_propensity(*s, c.propensity);
      break;
    case ExperimentKind::gradcheck:
      if (auto s = r.child("gradcheck")) read_gradcheck(*s, c.gradcheck);
      break;
  }
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json resolved_config(const ExperimentConfig& c) {
  json j = {{"version", kConfigVersion}, {"experiment", to_string(c.kind)}, {"seed", c.seed}};
  switch (c.kind) {
    case ExperimentKind::swissroll: j["swissroll"] = swissroll_json(c.swissroll); break;
    case ExperimentKind::propensity: j["propensity"] = propensity_json(c.propensity); break;
    case ExperimentKind::gradcheck: j["gradcheck"] = gradcheck_json(c.gradcheck); break;
  }
  return j;
}

}  // namespace deepcausal
