#include "deepcausal/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deepcausal {

namespace {

constexpr double kScoreClamp = 1e-12;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_classes(std::span<const int> w, const IndexVector& rows, const char* what) {
  std::size_t treated = 0;
  for (auto i : rows) {
    if (w[i] != 0 && w[i] != 1) throw ValidationError("treatment of unit " + std::to_string(i) + " is not binary");
    treated += static_cast<std::size_t>(w[i]);
  }
  if (treated == 0 || treated == rows.size()) {
    throw ValidationError(std::string(what) + " contains a single treatment class; both arms are required");
  }
}

IndexVector all_rows(std::size_t n) {
  IndexVector r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

}  // namespace

std::string to_string(PropensityKind k) { return k == PropensityKind::logistic ? "logistic" : "propensity_net"; }

PropensityKind propensity_kind_from_string(const std::string& s) {
  if (s == "logistic") return PropensityKind::logistic;
  if (s == "propensity_net") return PropensityKind::propensity_net;
  throw ValidationError("unknown propensity model '" + s + "'");
}

NetworkSpec build_propensity_net(std::size_t input_dim) {
  if (input_dim < 1) throw ValidationError("PropensityNet needs input_dim >= 1");
  NetworkSpec spec;
  spec.loss = Loss::categorical_cross_entropy;
  std::size_t fan_in = input_dim;
  for (int k = 0; k < 4; ++k) {
    spec.layers.push_back({fan_in, 10, Activation::relu, 0.3});
    fan_in = 10;
  }
  spec.layers.push_back({10, 2, Activation::softmax, 0.0});
  return spec;
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticFit fit_logistic(const Matrix& x, std::span<const int> w, const LogisticOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (w.size() != n) throw ValidationError("fit_logistic: x and w differ in length");
  if (!x.allFinite()) throw ValidationError("fit_logistic: covariates must be finite");
  check_classes(w, all_rows(n), "logistic regression input");
  if (opts.l2 < 0.0) throw ValidationError("l2 penalty must be >= 0");

  const auto st = Standardizer::fit(x);
  const Matrix z = st.apply(x);
  const auto d = z.cols();
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = w[i];

  // theta = (beta, intercept)
  Vector theta = Vector::Zero(d + 1);
  auto objective = [&](const Vector& th) {
    const Vector eta = (z * th.head(d)).array() + th[d];
    double f = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) f += softplus(eta[i]) - y[i] * eta[i];
    return f / static_cast<double>(n) + 0.5 * opts.l2 * th.head(d).squaredNorm();
  };
  auto gradient = [&](const Vector& th) {
    const Vector eta = (z * th.head(d)).array() + th[d];
    Vector resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = sigmoid(eta[i]) - y[i];
    Vector g(d + 1);
    g.head(d) = z.transpose() * resid / static_cast<double>(n) + opts.l2 * th.head(d);
    g[d] = resid.mean();
    return g;
  };

  LogisticFit fit;
  double f = objective(theta);
  double step = 1.0;
  Vector g = gradient(theta);
  while (true) {
    fit.gradient_norm = g.cwiseAbs().maxCoeff();
    if (fit.gradient_norm < opts.grad_tol) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= opts.max_iter) break;
    ++fit.iterations;
    const double g2 = g.squaredNorm();
    step *= 2.0;
    Vector trial = theta - step * g;
    double ft = objective(trial);
    while (ft > f - 0.5 * step * g2 && step > 1e-20) {
      step *= 0.5;
      trial = theta - step * g;
      ft = objective(trial);
    }
    if (!(ft <= f)) break;  // no further descent possible
    theta = std::move(trial);
    f = ft;
    g = gradient(theta);
  }
  if (!theta.allFinite()) throw NumericalError("logistic regression diverged");

  fit.coef = theta.head(d).cwiseQuotient(st.scale);
  fit.intercept = theta[d] - fit.coef.dot(st.mean);
  return fit;
}

// ---------------------------------------------------------------------------

PropensityModel::PropensityModel(PropensityKind kind, std::size_t input_dim, State state, IndexVector train_rows,
                                 IndexVector holdout_rows)
    : kind_(kind),
      input_dim_(input_dim),
      state_(std::move(state)),
      train_rows_(std::move(train_rows)),
      holdout_rows_(std::move(holdout_rows)) {}

const LogisticState& PropensityModel::logistic() const {
  if (kind_ != PropensityKind::logistic) throw ValidationError("model is not a logistic regression");
  return std::get<LogisticState>(state_);
}

const PropensityNetState& PropensityModel::net() const {
  if (kind_ != PropensityKind::propensity_net) throw ValidationError("model is not a PropensityNet");
  return std::get<PropensityNetState>(state_);
}

Vector PropensityModel::predict(const Matrix& x) const {
  if (!fitted()) throw ValidationError("propensity model is not fitted");
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw ValidationError("propensity model expects " + std::to_string(input_dim_) + " columns, got " +
                          std::to_string(x.cols()));
  }
  if (kind_ == PropensityKind::logistic) {
    const auto& f = std::get<LogisticState>(state_).fit;
    const Vector eta = (x * f.coef).array() + f.intercept;
    return eta.unaryExpr([](double v) { return sigmoid(v); });
  }
  const auto& s = std::get<PropensityNetState>(state_);
  return s.network.predict(s.standardizer.apply(x)).col(1);
}

Vector PropensityModel::log_odds(const Matrix& x) const {
  return predict(x).unaryExpr([](double p) {
    const double q = std::clamp(p, kScoreClamp, 1.0 - kScoreClamp);
    return std::log(q / (1.0 - q));
  });
}

PropensityModel fit_propensity(PropensityKind kind, const Matrix& x, std::span<const int> w,
                               const PropensityFitConfig& cfg) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (w.size() != n) throw ValidationError("fit_propensity: x and w differ in length");
  check_classes(w, all_rows(n), "propensity input");
  auto split = train_test_split(n, cfg.holdout_fraction, cfg.split_seed);
  check_classes(w, split.train, "the training split");
  const Matrix xt = take_rows(x, split.train);
  const auto wt = take(std::vector<int>(w.begin(), w.end()), split.train);
  const auto d = static_cast<std::size_t>(x.cols());

  if (kind == PropensityKind::logistic) {
    LogisticState s{fit_logistic(xt, wt, cfg.logistic)};
    return PropensityModel(kind, d, std::move(s), std::move(split.train), std::move(split.test));
  }

  PropensityNetState s;
  s.standardizer = Standardizer::fit(xt);
  s.network = Network::init(build_propensity_net(d), cfg.net.init_seed);
  Matrix target = Matrix::Zero(xt.rows(), 2);
  for (std::size_t i = 0; i < wt.size(); ++i) target(static_cast<Eigen::Index>(i), wt[i]) = 1.0;
  s.loss_history = s.network.train(s.standardizer.apply(xt), target, cfg.net.train);
  return PropensityModel(kind, d, std::move(s), std::move(split.train), std::move(split.test));
}

double classification_accuracy(const Vector& scores, std::span<const int> w, const IndexVector& rows) {
  if (rows.empty()) throw ValidationError("accuracy needs at least one row");
  std::size_t hits = 0;
  for (auto i : rows) {
    const int predicted = scores[static_cast<Eigen::Index>(i)] >= 0.5 ? 1 : 0;
    hits += static_cast<std::size_t>(predicted == w[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double holdout_accuracy(const PropensityModel& model, const Matrix& x, std::span<const int> w) {
  return classification_accuracy(model.predict(x), w, model.holdout_rows());
}

std::vector<double> kfold_accuracy(PropensityKind kind, const Matrix& x, std::span<const int> w, std::size_t folds,
                                   const PropensityFitConfig& cfg) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (folds < 2 || folds > n) throw ValidationError("k-fold needs 2 <= folds <= n");
  IndexVector perm = all_rows(n);
  Rng rng(cfg.split_seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> acc;
  const std::vector<int> wv(w.begin(), w.end());
  for (std::size_t f = 0; f < folds; ++f) {
    IndexVector train, test;
    for (std::size_t r = 0; r < n; ++r) (r % folds == f ? test : train).push_back(perm[r]);
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    PropensityFitConfig inner = cfg;
    inner.holdout_fraction = 0.0;
    const auto model = fit_propensity(kind, take_rows(x, train), take(wv, train), inner);
    const Vector scores = model.predict(take_rows(x, test));
    IndexVector local(test.size());
    std::iota(local.begin(), local.end(), std::size_t{0});
    acc.push_back(classification_accuracy(scores, take(wv, test), local));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Balance diagnostics

std::optional<double> standardized_mean_difference(const Vector& values, std::span<const int> w,
                                                   const IndexVector& rows) {
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (auto i : rows) {
    sum[w[i]] += values[static_cast<Eigen::Index>(i)];
    ++cnt[w[i]];
  }
  if (cnt[0] == 0 || cnt[1] == 0) return std::nullopt;
  const double mean[2] = {sum[0] / static_cast<double>(cnt[0]), sum[1] / static_cast<double>(cnt[1])};
  double ss[2] = {0.0, 0.0};
  for (auto i : rows) {
    const double dv = values[static_cast<Eigen::Index>(i)] - mean[w[i]];
    ss[w[i]] += dv * dv;
  }
  auto var = [&](int a) { return cnt[a] > 1 ? ss[a] / static_cast<double>(cnt[a] - 1) : 0.0; };
  const double pooled = std::sqrt(0.5 * (var(0) + var(1)));
  if (!(pooled > 0.0)) return std::nullopt;
  return (mean[1] - mean[0]) / pooled;
}

BalanceReport balance_report(const Matrix& x, std::span<const int> w, const Vector& scores, std::size_t n_strata) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n_strata < 1) throw ValidationError("balance_report needs n_strata >= 1");
  if (w.size() != n || static_cast<std::size_t>(scores.size()) != n) {
    throw ValidationError("balance_report: inputs differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] != 0 && w[i] != 1) throw ValidationError("treatment of unit " + std::to_string(i) + " is not binary");
  }
  const auto rows = all_rows(n);
  BalanceReport rep;
  for (Eigen::Index c = 0; c < x.cols(); ++c) rep.smd.push_back(standardized_mean_difference(x.col(c), w, rows));
  rep.score_smd = standardized_mean_difference(scores, w, rows);

  IndexVector order = rows;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return scores[static_cast<Eigen::Index>(l)] < scores[static_cast<Eigen::Index>(r)];
  });
  const auto strata = std::min(n_strata, n);
  for (std::size_t s = 0; s < strata; ++s) {
    const auto lo = s * n / strata;
    const auto hi = (s + 1) * n / strata;
    IndexVector members(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(hi));
    BalanceStratum st;
    st.score_min = scores[static_cast<Eigen::Index>(members.front())];
    st.score_max = scores[static_cast<Eigen::Index>(members.back())];
    for (auto i : members) (w[i] == 1 ? st.n_treated : st.n_control)++;
    st.missing_arm = st.n_treated == 0 || st.n_control == 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) st.smd.push_back(standardized_mean_difference(x.col(c), w, members));
    rep.strata.push_back(std::move(st));
  }
  return rep;
}

// ---------------------------------------------------------------------------

nlohmann::json propensity_to_json(const PropensityModel& m) {
  if (!m.fitted()) throw ValidationError("cannot serialize an unfitted propensity model");
  nlohmann::json j = {{"format", "deepcausal-model"},
                      {"version", kModelFormatVersion},
                      {"kind", "propensity"},
                      {"method", to_string(m.kind())},
                      {"input_dim", m.input_dim()},
                      {"train_rows", m.train_rows()},
                      {"holdout_rows", m.holdout_rows()}};
  if (m.kind() == PropensityKind::logistic) {
    const auto& f = m.logistic().fit;
    j["coef"] = std::vector<double>(f.coef.data(), f.coef.data() + f.coef.size());
    j["intercept"] = f.intercept;
    j["converged"] = f.converged;
    j["gradient_norm"] = f.gradient_norm;
    j["iterations"] = f.iterations;
  } else {
    const auto& s = m.net();
    j["mean"] = std::vector<double>(s.standardizer.mean.data(), s.standardizer.mean.data() + s.standardizer.mean.size());
    j["scale"] =
        std::vector<double>(s.standardizer.scale.data(), s.standardizer.scale.data() + s.standardizer.scale.size());
    j["network"] = network_to_json(s.network);
    j["loss_history"] = s.loss_history;
  }
  return j;
}

PropensityModel propensity_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "deepcausal-model") {
      throw ValidationError("not a deepcausal model file");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
    }
    if (j.at("kind").get<std::string>() != "propensity") {
      throw ValidationError("model file does not hold a propensity model");
    }
    const auto kind = propensity_kind_from_string(j.at("method").get<std::string>());
    const auto d = j.at("input_dim").get<std::size_t>();
    auto train = j.at("train_rows").get<IndexVector>();
    auto holdout = j.at("holdout_rows").get<IndexVector>();
    auto to_vec = [](const nlohmann::json& a) {
      const auto v = a.get<std::vector<double>>();
      return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    if (kind == PropensityKind::logistic) {
      LogisticFit f;
      f.coef = to_vec(j.at("coef"));
      f.intercept = j.at("intercept").get<double>();
      f.converged = j.at("converged").get<bool>();
      f.gradient_norm = j.at("gradient_norm").get<double>();
      f.iterations = j.at("iterations").get<std::size_t>();
      if (static_cast<std::size_t>(f.coef.size()) != d) throw ValidationError("coefficient count != input_dim");
      return PropensityModel(kind, d, LogisticState{std::move(f)}, std::move(train), std::move(holdout));
    }
    PropensityNetState s;
    s.standardizer = {to_vec(j.at("mean")), to_vec(j.at("scale"))};
    s.network = network_from_json(j.at("network"));
    s.loss_history = j.at("loss_history").get<std::vector<double>>();
    if (s.network.spec().input_dim() != d) throw ValidationError("network input size != input_dim");
    return PropensityModel(kind, d, std::move(s), std::move(train), std::move(holdout));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt propensity model file: ") + e.what());
  }
}

void save_propensity_model(const PropensityModel& m, const std::filesystem::path& path) {
  write_json_file(propensity_to_json(m), path);
}

PropensityModel load_propensity_model(const std::filesystem::path& path) {
  return propensity_from_json(read_json_file(path));
}

}  // namespace deepcausal
