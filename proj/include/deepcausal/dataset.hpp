#pragma once

#include <array>
#include <filesystem>
#include <optional>

#include "deepcausal/common.hpp"

namespace deepcausal {

// Simulation-only quantities. Never visible to the estimators.
struct GroundTruth {
  Vector y0;
  Vector y1;
  Vector ite_true;  // y1 - y0
  std::vector<int> group;
  // Row of each unit's opposite-arm twin, when the generator defines one.
  std::optional<IndexVector> pair_index;

  bool operator==(const GroundTruth&) const = default;
};

// The observed triple (y_obs, w, x) plus optional ground truth.
struct ObservationalDataset {
  Matrix x;             // n x d
  std::vector<int> w;   // 0 = control, 1 = treated
  Vector y_obs;
  std::optional<GroundTruth> truth;

  std::size_t size() const { return w.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }

  // Throws ValidationError if lengths disagree, w is not binary, any value
  // is non-finite, or the ground truth is internally inconsistent.
  void validate() const;

  // Row subset, ground truth included. pair_index is dropped because the
  // indices it holds refer to the full dataset.
  ObservationalDataset subset(const IndexVector& rows) const;

  bool operator==(const ObservationalDataset& o) const;
};

struct SwissRollConfig {
  std::size_t n = 1500;
  double noise_sigma = 0.05;
  std::array<double, 3> coeff_control{1.0, 1.0, 1.0};
  std::array<double, 3> coeff_treated{2.0, 1.0, 1.0};
  double outcome_noise_sigma = 0.0;
  double p_treat = 0.5;
  std::uint64_t seed = 0;
  // Append a clone of every unit with the opposite treatment and identical
  // covariates. Output has 2n rows; row i and row i+n are twins.
  bool duplicate_twins = false;

  void validate() const;
};

inline constexpr int kSwissRollGroups = 6;

// Points on a swiss roll: t = (3 pi / 2)(1 + 2u), h = 11 v,
// x = (t cos t, h, t sin t) + N(0, noise^2). Outcomes are linear in the
// noiseless coordinates, one coefficient vector per arm.
ObservationalDataset gen_swiss_roll(const SwissRollConfig& cfg);

// Noiseless roll coordinate for given uniform draws; exposed for tests.
Eigen::Vector3d swiss_roll_point(double u, double v);

// n treated units with (x1, x2, y) ~ U[0,1)^3, followed by n controls that
// are jittered copies (Gaussian, sd jitter_sigma on covariates and outcome).
// Control n+i is the twin of treated i.
ObservationalDataset gen_propensity_pairs(std::size_t n, double jitter_sigma,
                                          std::uint64_t seed);

// CSV with header x1..xd,w,y_obs[,y0,y1,ite_true,group[,pair_index]].
void save_csv(const ObservationalDataset& ds, const std::filesystem::path& path);
ObservationalDataset load_csv(const std::filesystem::path& path);

// Text-level entry points; the path versions wrap these.
std::string to_csv(const ObservationalDataset& ds);
ObservationalDataset parse_csv(const std::string& text);

}  // namespace deepcausal
