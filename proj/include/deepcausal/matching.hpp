#pragma once

#include <optional>
#include <span>

#include "deepcausal/common.hpp"

namespace deepcausal {

// Matched opposite-arm neighbors of one unit, nearest first.
struct MatchResult {
  std::size_t query_index = 0;
  IndexVector neighbor_indices;
  std::vector<double> distances;
};

struct MatchOptions {
  std::size_t k = 1;
  // Units whose nearest match is farther than this are left unmatched.
  std::optional<double> caliper;
};

// ite[i] = y_i - mean(matched controls) for treated i,
//          mean(matched treated) - y_i for control i.
// Unmatched units (caliper) carry NaN and are excluded from ate.
struct EffectEstimate {
  Vector ite;
  double ate = 0.0;
  std::size_t k = 1;
  std::vector<bool> matched;
  std::size_t n_unmatched = 0;
};

// Exact Euclidean k-NN of row i among rows of the opposite arm.
// Ties go to the lower index.
MatchResult nearest_opposite(const Matrix& z, std::span<const int> w, std::size_t i, std::size_t k);

// Same search for an external query point against a pool of units.
MatchResult nearest_in_pool(const Eigen::RowVectorXd& query, int query_arm, const Matrix& pool_z,
                            std::span<const int> pool_w, std::size_t k, std::size_t query_index = 0);

// In-sample estimate: every unit is matched among the other arm of the same set.
EffectEstimate estimate_effects(const Matrix& z, std::span<const int> w, const Vector& y_obs,
                                const MatchOptions& opts = {});

// Query units matched against a separate pool (e.g. test units against the
// training set).
EffectEstimate estimate_effects_against_pool(const Matrix& query_z, std::span<const int> query_w,
                                             const Vector& query_y, const Matrix& pool_z,
                                             std::span<const int> pool_w, const Vector& pool_y,
                                             const MatchOptions& opts = {});

enum class MatchDirection { treated_to_control, control_to_treated };

// Nearest opposite-arm unit on a scalar score, with replacement.
// One result per unit of the source arm, in index order.
std::vector<MatchResult> propensity_match(const Vector& scores, std::span<const int> w,
                                          MatchDirection direction = MatchDirection::treated_to_control);

}  // namespace deepcausal
