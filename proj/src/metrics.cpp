#include "deepcausal/metrics.hpp"

#include <charconv>
#include <cmath>
#include <algorithm>
#include <limits>
#include <map>

namespace deepcausal {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Index of every row within its own arm.
IndexVector arm_local_indices(std::span<const int> w, std::size_t counts[2]) {
  IndexVector local(w.size());
  counts[0] = counts[1] = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0 && w[i] != 1) throw ValidationError("treatment of unit " + std::to_string(i) + " is not binary");
    local[i] = counts[w[i]]++;
  }
  return local;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

EffectReport ite_error(const EffectEstimate& est, const std::optional<GroundTruth>& truth,
                       const std::vector<bool>& test_mask, std::string method, std::uint64_t seed) {
  if (!truth) throw ValidationError("ite_error needs ground truth");
  const auto n = est.ite.size();
  if (truth->ite_true.size() != n) throw ValidationError("ite_error: estimate and truth differ in length");
  if (!test_mask.empty() && test_mask.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("ite_error: test mask length differs from the estimate");
  }
  double abs_sum = 0.0, est_sum = 0.0, true_sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!test_mask.empty() && !test_mask[u]) continue;
    if (!est.matched.empty() && !est.matched[u]) continue;
    abs_sum += std::abs(est.ite[i] - truth->ite_true[i]);
    est_sum += est.ite[i];
    true_sum += truth->ite_true[i];
    ++count;
  }
  if (count == 0) throw ValidationError("ite_error: no test units to evaluate");
  const double c = static_cast<double>(count);
  EffectReport r;
  r.method = std::move(method);
  r.mean_abs_ite_error = abs_sum / c;
  r.ate_error = std::abs(est_sum / c - true_sum / c);
  r.n_test = count;
  r.seed = seed;
  return r;
}

PropensityReport misassignment_report(const std::vector<MatchResult>& matches,
                                      const std::optional<IndexVector>& pair_index, std::span<const int> w,
                                      std::span<const int> predicted_w, std::span<const int> true_w,
                                      std::string method, std::uint64_t seed) {
  if (!pair_index) throw ValidationError("misassignment_report needs pair_index ground truth");
  if (pair_index->size() != w.size()) throw ValidationError("pair_index length differs from the treatment vector");
  if (matches.empty()) throw ValidationError("misassignment_report: no matches");
  if (predicted_w.size() != true_w.size() || true_w.empty()) {
    throw ValidationError("misassignment_report: accuracy labels are empty or differ in length");
  }
  std::size_t counts[2];
  const auto local = arm_local_indices(w, counts);

  std::size_t wrong = 0;
  double err_sum = 0.0;
  for (const auto& m : matches) {
    if (m.query_index >= w.size() || m.neighbor_indices.empty()) {
      throw ValidationError("misassignment_report: malformed match for unit " + std::to_string(m.query_index));
    }
    const auto got = m.neighbor_indices.front();
    const auto want = (*pair_index)[m.query_index];
    if (got >= w.size() || want >= w.size() || w[got] != w[want]) {
      throw ValidationError("misassignment_report: match and twin of unit " + std::to_string(m.query_index) +
                            " are not in the same arm");
    }
    const double arm_size = static_cast<double>(counts[w[got]]);
    const double delta = std::abs(static_cast<double>(local[got]) - static_cast<double>(local[want]));
    err_sum += delta / arm_size;
    wrong += static_cast<std::size_t>(got != want);
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < true_w.size(); ++i) hits += static_cast<std::size_t>(predicted_w[i] == true_w[i]);

  const double nm = static_cast<double>(matches.size());
  PropensityReport r;
  r.method = std::move(method);
  r.misassignment_rate_pct = 100.0 * static_cast<double>(wrong) / nm;
  r.mean_abs_misassignment_error_pct = 100.0 * err_sum / nm;
  r.accuracy_pct = 100.0 * static_cast<double>(hits) / static_cast<double>(true_w.size());
  r.seed = seed;
  return r;
}

double silhouette(const Matrix& z, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (labels.size() != n) throw ValidationError("silhouette: labels and points differ in length");
  std::map<int, std::size_t> ids;
  for (int l : labels) ids.emplace(l, ids.size());
  if (ids.size() < 2) throw ValidationError("silhouette needs at least two distinct labels");
  const auto k = ids.size();
  std::vector<std::size_t> cluster(n), size(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = ids[labels[i]];
    ++size[cluster[i]];
  }
  // Row-major copy keeps the pairwise loop contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> p = z;
  const auto d = p.cols();
  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    const double* a = p.data() + i * static_cast<std::size_t>(d);
    for (std::size_t j = 0; j < n; ++j) {
      const double* b = p.data() + j * static_cast<std::size_t>(d);
      double s = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
      sums[cluster[j]] += std::sqrt(s);
    }
    const auto own = cluster[i];
    if (size[own] < 2) continue;
    const double ai = sums[own] / static_cast<double>(size[own] - 1);
    double bi = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own) bi = std::min(bi, sums[c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(ai, bi);
    if (denom > 0.0) total += (bi - ai) / denom;
  }
  return total / static_cast<double>(n);
}

nlohmann::json to_json(const EffectReport& r) {
  nlohmann::json j = {{"method", r.method},
                      {"mean_abs_ite_error", r.mean_abs_ite_error},
                      {"ate_error", r.ate_error},
                      {"n_test", r.n_test},
                      {"seed", r.seed}};
  j["silhouette"] = r.silhouette ? nlohmann::json(*r.silhouette) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const PropensityReport& r) {
  return {{"method", r.method},
          {"mean_abs_misassignment_error_pct", r.mean_abs_misassignment_error_pct},
          {"misassignment_rate_pct", r.misassignment_rate_pct},
          {"accuracy_pct", r.accuracy_pct},
          {"seed", r.seed}};
}

EffectReport effect_report_from_json(const nlohmann::json& j) {
  try {
    EffectReport r;
    r.method = j.at("method").get<std::string>();
    r.mean_abs_ite_error = j.at("mean_abs_ite_error").get<double>();
    r.ate_error = j.at("ate_error").get<double>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("silhouette") && !j["silhouette"].is_null()) r.silhouette = j["silhouette"].get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed effect report: ") + e.what());
  }
}

PropensityReport propensity_report_from_json(const nlohmann::json& j) {
  try {
    PropensityReport r;
    r.method = j.at("method").get<std::string>();
    r.mean_abs_misassignment_error_pct = j.at("mean_abs_misassignment_error_pct").get<double>();
    r.misassignment_rate_pct = j.at("misassignment_rate_pct").get<double>();
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed propensity report: ") + e.what());
  }
}

std::string effect_comparison_csv(const std::vector<EffectReport>& reports) {
  std::string out = "method,mean_abs_ite_error,ate_error,n_test,silhouette\n";
  for (const auto& r : reports) {
    out += csv_field(r.method) + "," + fmt(r.mean_abs_ite_error) + "," + fmt(r.ate_error) + "," +
           std::to_string(r.n_test) + "," + (r.silhouette ? fmt(*r.silhouette) : std::string()) + "\n";
  }
  return out;
}

std::string propensity_comparison_csv(const std::vector<PropensityReport>& reports) {
  std::string out = std::string("method,") + kMisassignmentErrorColumn + "," + kMisassignmentRateColumn + "," +
                    kAccuracyColumn + "\n";
  for (const auto& r : reports) {
    out += csv_field(r.method) + "," + fmt(r.mean_abs_misassignment_error_pct) + "," +
           fmt(r.misassignment_rate_pct) + "," + fmt(r.accuracy_pct) + "\n";
  }
  return out;
}

}  // namespace deepcausal
