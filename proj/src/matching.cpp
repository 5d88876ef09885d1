#include "deepcausal/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace deepcausal {

namespace {

const char* arm_name(int arm) { return arm == 1 ? "treated" : "control"; }

void check_arms(std::span<const int> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0 && w[i] != 1) throw ValidationError("treatment of unit " + std::to_string(i) + " is not binary");
  }
}

MatchResult search(const Eigen::RowVectorXd& query, int query_arm, const Matrix& pool, std::span<const int> pool_w,
                   std::size_t k, std::size_t query_index, std::size_t skip) {
  if (static_cast<std::size_t>(pool.rows()) != pool_w.size()) {
    throw ValidationError("matching: coordinates and treatment vector differ in length");
  }
  if (query.size() != pool.cols()) throw ValidationError("matching: query dimension differs from pool dimension");
  if (k < 1) throw ValidationError("matching needs k >= 1");
  const int target = 1 - query_arm;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t j = 0; j < pool_w.size(); ++j) {
    if (pool_w[j] != target || j == skip) continue;
    cand.emplace_back((pool.row(static_cast<Eigen::Index>(j)) - query).squaredNorm(), j);
  }
  if (cand.empty()) {
    throw ValidationError(std::string("no ") + arm_name(target) + " units to match against (the " +
                          arm_name(target) + " arm is empty)");
  }
  if (k > cand.size()) {
    throw ValidationError("k = " + std::to_string(k) + " exceeds the " + arm_name(target) + " arm size " +
                          std::to_string(cand.size()));
  }
  // Pair ordering gives the lower-index tie rule.
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  MatchResult r;
  r.query_index = query_index;
  for (std::size_t j = 0; j < k; ++j) {
    r.neighbor_indices.push_back(cand[j].second);
    r.distances.push_back(std::sqrt(cand[j].first));
  }
  return r;
}

double mean_outcome(const Vector& y, const IndexVector& idx) {
  double s = 0.0;
  for (auto j : idx) s += y[static_cast<Eigen::Index>(j)];
  return s / static_cast<double>(idx.size());
}

void finish(EffectEstimate& est) {
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < est.ite.size(); ++i) {
    if (!est.matched[static_cast<std::size_t>(i)]) continue;
    sum += est.ite[i];
    ++count;
  }
  if (count == 0) throw ValidationError("the caliper left every unit unmatched");
  est.n_unmatched = static_cast<std::size_t>(est.ite.size()) - count;
  est.ate = sum / static_cast<double>(count);
}

}  // namespace

MatchResult nearest_in_pool(const Eigen::RowVectorXd& query, int query_arm, const Matrix& pool_z,
                            std::span<const int> pool_w, std::size_t k, std::size_t query_index) {
  if (query_arm != 0 && query_arm != 1) throw ValidationError("query treatment must be 0 or 1");
  check_arms(pool_w);
  return search(query, query_arm, pool_z, pool_w, k, query_index, std::numeric_limits<std::size_t>::max());
}

MatchResult nearest_opposite(const Matrix& z, std::span<const int> w, std::size_t i, std::size_t k) {
  if (i >= w.size()) throw ValidationError("query index out of range");
  check_arms(w);
  return search(z.row(static_cast<Eigen::Index>(i)), w[i], z, w, k, i, i);
}

EffectEstimate estimate_effects(const Matrix& z, std::span<const int> w, const Vector& y_obs,
                                const MatchOptions& opts) {
  return estimate_effects_against_pool(z, w, y_obs, z, w, y_obs, opts);
}

EffectEstimate estimate_effects_against_pool(const Matrix& query_z, std::span<const int> query_w,
                                             const Vector& query_y, const Matrix& pool_z,
                                             std::span<const int> pool_w, const Vector& pool_y,
                                             const MatchOptions& opts) {
  const auto n = query_w.size();
  if (static_cast<std::size_t>(query_z.rows()) != n || static_cast<std::size_t>(query_y.size()) != n) {
    throw ValidationError("estimate_effects: query inputs differ in length");
  }
  if (static_cast<std::size_t>(pool_y.size()) != pool_w.size()) {
    throw ValidationError("estimate_effects: pool inputs differ in length");
  }
  check_arms(query_w);
  check_arms(pool_w);
  // An in-sample call passes the same matrix twice; a unit never matches itself
  // because it sits in its own arm.
  EffectEstimate est;
  est.k = opts.k;
  est.ite.resize(static_cast<Eigen::Index>(n));
  est.matched.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto m = search(query_z.row(ii), query_w[i], pool_z, pool_w, opts.k, i,
                          std::numeric_limits<std::size_t>::max());
    if (opts.caliper && m.distances.front() > *opts.caliper) {
      est.matched[i] = false;
      est.ite[ii] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double other = mean_outcome(pool_y, m.neighbor_indices);
    est.ite[ii] = query_w[i] == 1 ? query_y[ii] - other : other - query_y[ii];
  }
  finish(est);
  return est;
}

std::vector<MatchResult> propensity_match(const Vector& scores, std::span<const int> w, MatchDirection direction) {
  if (static_cast<std::size_t>(scores.size()) != w.size()) {
    throw ValidationError("propensity_match: scores and treatment vector differ in length");
  }
  if (!scores.allFinite()) throw ValidationError("propensity_match: scores must be finite");
  check_arms(w);
  const int source = direction == MatchDirection::treated_to_control ? 1 : 0;
  const int target = 1 - source;
  IndexVector pool;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == target) pool.push_back(j);
  }
  if (pool.empty()) {
    throw ValidationError(std::string("no ") + arm_name(target) + " units to match against (the " +
                          arm_name(target) + " arm is empty)");
  }
  std::vector<MatchResult> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != source) continue;
    std::size_t best = pool.front();
    double best_d = std::abs(scores[static_cast<Eigen::Index>(i)] - scores[static_cast<Eigen::Index>(best)]);
    for (auto j : pool) {
      const double d = std::abs(scores[static_cast<Eigen::Index>(i)] - scores[static_cast<Eigen::Index>(j)]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    out.push_back({i, {best}, {best_d}});
  }
  if (out.empty()) throw ValidationError(std::string("the ") + arm_name(source) + " arm is empty");
  return out;
}

}  // namespace deepcausal
