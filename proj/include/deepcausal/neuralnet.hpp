#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "deepcausal/common.hpp"

namespace deepcausal {

enum class Activation { identity, relu, sigmoid, tanh, softmax };
enum class Loss { mse, categorical_cross_entropy };

std::string to_string(Activation a);
std::string to_string(Loss l);
Activation activation_from_string(const std::string& s);
Loss loss_from_string(const std::string& s);

struct LayerSpec {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  Activation activation = Activation::identity;
  // Applied to this layer's output in training mode. Must be 0 on the last layer.
  double dropout_rate = 0.0;

  std::size_t param_count() const { return fan_in * fan_out + fan_out; }
  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  Loss loss = Loss::mse;

  // Throws ValidationError on broken chaining, misplaced softmax, a loss that
  // does not fit the output activation, or dropout outside [0, 1).
  void validate() const;
  std::size_t param_count() const;
  std::size_t input_dim() const { return layers.front().fan_in; }
  std::size_t output_dim() const { return layers.back().fan_out; }
  bool operator==(const NetworkSpec&) const = default;
};

// Per-layer parameter gradients, shapes mirror Network::weights/biases.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::vector<double> flatten() const;
};

// Everything backward() needs from a forward pass.
struct ForwardCache {
  // inputs[k] is what layer k consumed; inputs[0] is the batch.
  std::vector<Matrix> inputs;
  // outputs[k] is layer k's activation before dropout.
  std::vector<Matrix> outputs;
  // Inverted-dropout multipliers (0 or 1/(1-rate)); empty matrix = no dropout.
  std::vector<Matrix> masks;

  const Matrix& final_output() const { return outputs.back(); }
};

// Running averages for one parameter tensor, flattened.
struct AdadeltaSlot {
  Eigen::ArrayXd eg2;
  Eigen::ArrayXd ed2;
};

struct AdadeltaState {
  double rho = 0.95;
  double eps = 1e-6;
  // Weights of every layer first, then biases.
  std::vector<AdadeltaSlot> slots;
};

// eg2 <- rho eg2 + (1-rho) g^2; delta = -sqrt(ed2+eps)/sqrt(eg2+eps) g;
// ed2 <- rho ed2 + (1-rho) delta^2; params += delta.
void adadelta_step(AdadeltaSlot& slot, double rho, double eps, std::span<double> params,
                   std::span<const double> grads);

struct SgdConfig {
  double learning_rate = 0.01;
};
struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
};
using OptimizerConfig = std::variant<SgdConfig, AdadeltaConfig>;

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  OptimizerConfig optimizer = AdadeltaConfig{};
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

class Network {
 public:
  Network() = default;

  // Glorot-uniform weights, zero biases.
  static Network init(const NetworkSpec& spec, std::uint64_t seed);
  // Takes explicit parameters; validates shapes and finiteness.
  static Network from_parameters(NetworkSpec spec, std::vector<Matrix> weights,
                                 std::vector<Vector> biases);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }
  std::size_t param_count() const { return spec_.param_count(); }

  // Rows of `batch` are samples. In train mode each non-final layer with a
  // positive rate gets a fresh inverted-dropout mask drawn from `seed`.
  ForwardCache forward(const Matrix& batch, bool train_mode, std::uint64_t seed = 0) const;
  // Same pass with caller-supplied masks (one per layer, empty for none).
  ForwardCache forward_with_masks(const Matrix& batch, std::span<const Matrix> masks) const;
  // Eval-mode output only.
  Matrix predict(const Matrix& batch) const;
  // Eval-mode activations of layer `layer` (0-based) without running the rest.
  Matrix activations_at(const Matrix& batch, std::size_t layer) const;

  double loss(const Matrix& output, const Matrix& target) const;
  Gradients backward(const ForwardCache& cache, const Matrix& target) const;

  // Flat view in the order: W0 (column-major), b0, W1, b1, ...
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  // Mini-batch training. Returns the mean batch loss of each epoch.
  std::vector<double> train(const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg);

  const std::optional<AdadeltaState>& optimizer_state() const { return optimizer_state_; }

 private:
  void check_input(const Matrix& batch) const;
  void apply_update(const Gradients& grads, const OptimizerConfig& opt);

  NetworkSpec spec_;
  std::vector<Matrix> weights_;  // fan_out x fan_in
  std::vector<Vector> biases_;
  std::optional<AdadeltaState> optimizer_state_;
};

Matrix apply_activation(Activation a, const Matrix& z);

// Central finite differences of the loss with respect to every parameter.
std::vector<double> numerical_gradient(const Network& net, const Matrix& batch, const Matrix& target,
                                       std::span<const Matrix> masks, double step = 1e-5);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t n_params = 0;
};

// Compares backward() against numerical_gradient() on a random batch.
// Relative error per parameter is |a - f| / max(|a|, |f|, 1e-6).
// `analytic_scale` != 1 corrupts the analytic side (negative control).
GradCheckResult gradient_check(const NetworkSpec& spec, std::uint64_t seed, std::size_t batch_rows = 4,
                               double analytic_scale = 1.0);

// Versioned JSON model format (spec + parameters, no optimizer state).
inline constexpr int kModelFormatVersion = 1;
nlohmann::json network_to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

// Shared helpers for the model file format.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace deepcausal
