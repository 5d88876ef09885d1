#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <variant>

#include <nlohmann/json.hpp>

#include "deepcausal/common.hpp"
#include "deepcausal/embedding.hpp"
#include "deepcausal/neuralnet.hpp"

namespace deepcausal {

enum class PropensityKind { logistic, propensity_net };
std::string to_string(PropensityKind k);
PropensityKind propensity_kind_from_string(const std::string& s);

// Five dense layers (10, 10, 10, 10, 2), relu hidden units with 30% dropout,
// softmax output, categorical cross-entropy. 10d + 362 parameters.
NetworkSpec build_propensity_net(std::size_t input_dim);

struct LogisticOptions {
  double l2 = 0.0;
  double grad_tol = 1e-8;
  std::size_t max_iter = 10000;
};

struct LogisticFit {
  Vector coef;
  double intercept = 0.0;
  bool converged = false;
  double gradient_norm = 0.0;  // infinity norm, standardized parameterization
  std::size_t iterations = 0;
};

// Maximum likelihood by full-batch gradient descent with Armijo backtracking,
// run on z-scored columns and mapped back to the input scale.
LogisticFit fit_logistic(const Matrix& x, std::span<const int> w, const LogisticOptions& opts = {});

struct PropensityNetOptions {
  TrainConfig train{200, 32, AdadeltaConfig{}, 0, true};
  std::uint64_t init_seed = 0;
};

struct PropensityFitConfig {
  double holdout_fraction = 0.2;
  std::uint64_t split_seed = 0;
  LogisticOptions logistic{};
  PropensityNetOptions net{};
};

struct LogisticState {
  LogisticFit fit;
};

struct PropensityNetState {
  Standardizer standardizer;
  Network network;
  std::vector<double> loss_history;
};

class PropensityModel {
 public:
  using State = std::variant<LogisticState, PropensityNetState>;

  PropensityModel() = default;
  PropensityModel(PropensityKind kind, std::size_t input_dim, State state, IndexVector train_rows,
                  IndexVector holdout_rows);

  PropensityKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  bool fitted() const { return input_dim_ != 0; }

  // P(w = 1 | x), deterministic (dropout off).
  Vector predict(const Matrix& x) const;
  // ln(p / (1 - p)) with p clamped to [1e-12, 1 - 1e-12].
  Vector log_odds(const Matrix& x) const;

  const IndexVector& train_rows() const { return train_rows_; }
  const IndexVector& holdout_rows() const { return holdout_rows_; }
  const LogisticState& logistic() const;
  const PropensityNetState& net() const;

 private:
  PropensityKind kind_ = PropensityKind::logistic;
  std::size_t input_dim_ = 0;
  State state_;
  IndexVector train_rows_;
  IndexVector holdout_rows_;
};

// Fits on a seeded train split; the held-out rows are recorded on the model.
PropensityModel fit_propensity(PropensityKind kind, const Matrix& x, std::span<const int> w,
                               const PropensityFitConfig& cfg = {});

// Share of rows whose thresholded score (>= 0.5 means treated) equals w.
double classification_accuracy(const Vector& scores, std::span<const int> w, const IndexVector& rows);
double holdout_accuracy(const PropensityModel& model, const Matrix& x, std::span<const int> w);

// K-fold held-out accuracy, one entry per fold.
std::vector<double> kfold_accuracy(PropensityKind kind, const Matrix& x, std::span<const int> w, std::size_t folds,
                                   const PropensityFitConfig& cfg = {});

struct BalanceStratum {
  double score_min = 0.0;
  double score_max = 0.0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  bool missing_arm = false;
  // Empty optional: pooled SD is zero or an arm is missing.
  std::vector<std::optional<double>> smd;
};

struct BalanceReport {
  std::vector<std::optional<double>> smd;
  std::optional<double> score_smd;
  std::vector<BalanceStratum> strata;
};

// (mean_treated - mean_control) / sqrt((var_treated + var_control) / 2).
std::optional<double> standardized_mean_difference(const Vector& values, std::span<const int> w,
                                                   const IndexVector& rows);

// Overall and per-stratum SMDs; strata are equal-count score quantile bins.
BalanceReport balance_report(const Matrix& x, std::span<const int> w, const Vector& scores, std::size_t n_strata = 5);

nlohmann::json propensity_to_json(const PropensityModel& m);
PropensityModel propensity_from_json(const nlohmann::json& j);
void save_propensity_model(const PropensityModel& m, const std::filesystem::path& path);
PropensityModel load_propensity_model(const std::filesystem::path& path);

}  // namespace deepcausal
