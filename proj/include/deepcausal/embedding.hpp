#pragma once

#include <filesystem>
#include <optional>
#include <variant>

#include <nlohmann/json.hpp>

#include "deepcausal/common.hpp"
#include "deepcausal/neuralnet.hpp"

namespace deepcausal {

// Per-column z-score. Columns with zero spread keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  static Standardizer none(std::size_t dim);
  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
};

enum class EmbedderKind { identity, pca, lle, autoencoder };
std::string to_string(EmbedderKind k);
EmbedderKind embedder_kind_from_string(const std::string& s);

struct PcaOptions {
  bool standardize = false;
};

struct LleOptions {
  std::size_t k_neighbors = 10;
  double reg = 1e-3;
};

struct AutoencoderOptions {
  // Extra encoder widths between input and bottleneck, outermost first. The
  // decoder mirrors them. Empty gives the plain d -> m -> d network.
  std::vector<std::size_t> hidden;
  Activation hidden_activation = Activation::tanh;
  // Activation of the m-wide code layer; unset means hidden_activation.
  std::optional<Activation> bottleneck_activation;
  // 100 epochs underfit even planar data with a tanh code.
  TrainConfig train{300, 32, AdadeltaConfig{}, 0, true};
  std::uint64_t init_seed = 0;
  // Independent trainings; the one with the lowest final reconstruction
  // error on the training rows is kept.
  std::size_t restarts = 1;
};

struct PcaState {
  Standardizer standardizer;
  Matrix components;         // d x m, orthonormal columns
  Vector explained_variance;  // m, descending
};

struct LleNeighborhood {
  IndexVector neighbors;
  Vector weights;  // sums to 1
};

struct LleState {
  LleOptions options;
  Matrix train_x;
  Matrix embedding;  // n x m, unit-norm columns
  std::vector<LleNeighborhood> neighborhoods;
  Vector eigenvalues;  // the m retained eigenvalues
};

struct AutoencoderState {
  Standardizer standardizer;
  Network network;
  std::size_t bottleneck_layer = 0;
  std::vector<double> loss_history;
};

// A fitted map from d input columns to m output columns. Immutable after fit.
class Embedder {
 public:
  using State = std::variant<std::monostate, PcaState, LleState, AutoencoderState>;

  Embedder() = default;
  Embedder(EmbedderKind kind, std::size_t input_dim, std::size_t output_dim, State state);

  EmbedderKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  bool fitted() const { return input_dim_ != 0; }

  Matrix transform(const Matrix& x) const;

  const PcaState& pca() const;
  const LleState& lle() const;
  const AutoencoderState& autoencoder() const;

 private:
  EmbedderKind kind_ = EmbedderKind::identity;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  State state_;
};

Embedder fit_identity(const Matrix& x);
Embedder fit_pca(const Matrix& x, std::size_t m, const PcaOptions& opts = {});
Embedder fit_lle(const Matrix& x, std::size_t m, const LleOptions& opts = {});
Embedder fit_autoencoder(const Matrix& x, std::size_t m, const AutoencoderOptions& opts = {});

// The d -> ... -> m -> ... -> d network used by fit_autoencoder.
NetworkSpec autoencoder_spec(std::size_t d, std::size_t m, const AutoencoderOptions& opts);

// PCA scores mapped back to input space.
Matrix pca_inverse_transform(const Embedder& e, const Matrix& scores);
// Mean over rows of the squared reconstruction error, in input units.
double pca_reconstruction_error(const Embedder& e, const Matrix& x);
// Full autoencoder pass, returned in input units.
Matrix autoencoder_reconstruct(const Embedder& e, const Matrix& x);
// Mean over rows of the squared reconstruction error in standardized units.
double autoencoder_reconstruction_mse(const Embedder& e, const Matrix& x);

// LLE building blocks.
// k nearest rows of `x` to `query`, nearest first, ties by lower index.
// `exclude` (if < rows) is skipped.
IndexVector nearest_rows(const Matrix& x, const Eigen::RowVectorXd& query, std::size_t k,
                         std::size_t exclude = static_cast<std::size_t>(-1));
// Regularized reconstruction weights of `query` from the given rows.
Vector lle_weights(const Matrix& x, const IndexVector& neighbors, const Eigen::RowVectorXd& query, double reg);
// Dense n x n weight matrix of a fitted LLE.
Matrix lle_weight_matrix(const LleState& s);

struct KMeansResult {
  Matrix centroids;  // k x d
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after each Lloyd iteration
  std::size_t iterations = 0;
};

// k-means++ seeding then Lloyd iterations until assignments stop changing or
// max_iter. An emptied cluster is re-seeded at the point farthest from its
// centroid.
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iter = 300);

nlohmann::json embedder_to_json(const Embedder& e);
Embedder embedder_from_json(const nlohmann::json& j);
void save_embedder(const Embedder& e, const std::filesystem::path& path);
Embedder load_embedder(const std::filesystem::path& path);

}  // namespace deepcausal
