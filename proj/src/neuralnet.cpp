#include "deepcausal/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace deepcausal {

namespace {

constexpr double kProbClamp = 1e-12;

const std::pair<Activation, const char*> kActivationNames[] = {
    {Activation::identity, "identity"}, {Activation::relu, "relu"},       {Activation::sigmoid, "sigmoid"},
    {Activation::tanh, "tanh"},         {Activation::softmax, "softmax"},
};

}  // namespace

std::string to_string(Activation a) {
  for (const auto& [act, name] : kActivationNames) {
    if (act == a) return name;
  }
  return "unknown";
}

std::string to_string(Loss l) { return l == Loss::mse ? "mse" : "categorical_cross_entropy"; }

Activation activation_from_string(const std::string& s) {
  for (const auto& [act, name] : kActivationNames) {
    if (s == name) return act;
  }
  throw ValidationError("unknown activation '" + s + "'");
}

Loss loss_from_string(const std::string& s) {
  if (s == "mse") return Loss::mse;
  if (s == "categorical_cross_entropy") return Loss::categorical_cross_entropy;
  throw ValidationError("unknown loss '" + s + "'");
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ValidationError("network needs at least one layer");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const auto where = "layer " + std::to_string(k);
    if (l.fan_in == 0 || l.fan_out == 0) throw ValidationError(where + " has a zero dimension");
    if (k + 1 < layers.size() && l.fan_out != layers[k + 1].fan_in) {
      throw ValidationError(where + " fan_out " + std::to_string(l.fan_out) + " does not match layer " +
                            std::to_string(k + 1) + " fan_in " + std::to_string(layers[k + 1].fan_in));
    }
    if (l.activation == Activation::softmax && k + 1 != layers.size()) {
      throw ValidationError("softmax is only allowed on the final layer");
    }
    if (!(l.dropout_rate >= 0.0 && l.dropout_rate < 1.0)) {
      throw ValidationError(where + " dropout rate must lie in [0, 1)");
    }
  }
  if (layers.back().dropout_rate != 0.0) throw ValidationError("the final layer cannot use dropout");
  const bool softmax_out = layers.back().activation == Activation::softmax;
  if (loss == Loss::categorical_cross_entropy && !softmax_out) {
    throw ValidationError("categorical cross-entropy requires a softmax output layer");
  }
  if (loss == Loss::mse && softmax_out) throw ValidationError("mse loss cannot be used with a softmax output");
}

std::size_t NetworkSpec::param_count() const {
  return std::accumulate(layers.begin(), layers.end(), std::size_t{0},
                         [](std::size_t acc, const LayerSpec& l) { return acc + l.param_count(); });
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.insert(out.end(), weights[k].data(), weights[k].data() + weights[k].size());
    out.insert(out.end(), biases[k].data(), biases[k].data() + biases[k].size());
  }
  return out;
}

void adadelta_step(AdadeltaSlot& slot, double rho, double eps, std::span<double> params,
                   std::span<const double> grads) {
  if (params.size() != grads.size()) throw ValidationError("adadelta: parameter/gradient size mismatch");
  const auto n = static_cast<Eigen::Index>(params.size());
  if (slot.eg2.size() != n) slot.eg2 = Eigen::ArrayXd::Zero(n);
  if (slot.ed2.size() != n) slot.ed2 = Eigen::ArrayXd::Zero(n);
  Eigen::Map<Eigen::ArrayXd> p(params.data(), n);
  Eigen::Map<const Eigen::ArrayXd> g(grads.data(), n);
  slot.eg2 = rho * slot.eg2 + (1.0 - rho) * g.square();
  const Eigen::ArrayXd delta = -((slot.ed2 + eps).sqrt() / (slot.eg2 + eps).sqrt()) * g;
  slot.ed2 = rho * slot.ed2 + (1.0 - rho) * delta.square();
  p += delta;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (const auto* sgd = std::get_if<SgdConfig>(&optimizer)) {
    if (!(sgd->learning_rate > 0.0) || !std::isfinite(sgd->learning_rate)) {
      throw ValidationError("sgd learning rate must be positive");
    }
  } else {
    const auto& ad = std::get<AdadeltaConfig>(optimizer);
    if (!(ad.rho > 0.0 && ad.rho < 1.0)) throw ValidationError("adadelta rho must lie in (0, 1)");
    if (!(ad.eps > 0.0)) throw ValidationError("adadelta eps must be positive");
  }
}

// ---------------------------------------------------------------------------

Matrix apply_activation(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::identity:
      return z;
    case Activation::relu:
      return z.cwiseMax(0.0);
    case Activation::sigmoid:
      return z.unaryExpr([](double v) {
        // Split on sign so exp never overflows.
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
    case Activation::tanh:
      return z.array().tanh().matrix();
    case Activation::softmax: {
      Matrix out(z.rows(), z.cols());
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        out.row(r) = (z.row(r).array() - m).exp().matrix();
        out.row(r) /= out.row(r).sum();
      }
      return out;
    }
  }
  throw ValidationError("unknown activation");
}

namespace {

// d(activation)/dz expressed through the activation value.
Matrix activation_derivative(Activation a, const Matrix& out) {
  switch (a) {
    case Activation::identity:
      return Matrix::Ones(out.rows(), out.cols());
    case Activation::relu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
    case Activation::tanh:
      return (1.0 - out.array().square()).matrix();
    case Activation::softmax:
      break;
  }
  throw ValidationError("softmax derivative is only defined jointly with cross-entropy");
}

}  // namespace

Network Network::init(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  Network net;
  net.spec_ = spec;
  Rng rng(seed);
  for (const auto& l : spec.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.fan_in + l.fan_out));
    Matrix w(static_cast<Eigen::Index>(l.fan_out), static_cast<Eigen::Index>(l.fan_in));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
    }
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Vector::Zero(static_cast<Eigen::Index>(l.fan_out)));
  }
  return net;
}

Network Network::from_parameters(NetworkSpec spec, std::vector<Matrix> weights, std::vector<Vector> biases) {
  spec.validate();
  if (weights.size() != spec.layers.size() || biases.size() != spec.layers.size()) {
    throw ValidationError("parameter list length does not match the layer count");
  }
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    const auto& l = spec.layers[k];
    if (static_cast<std::size_t>(weights[k].rows()) != l.fan_out ||
        static_cast<std::size_t>(weights[k].cols()) != l.fan_in ||
        static_cast<std::size_t>(biases[k].size()) != l.fan_out) {
      throw ValidationError("parameter shapes of layer " + std::to_string(k) + " do not match its spec");
    }
    if (!weights[k].allFinite() || !biases[k].allFinite()) {
      throw ValidationError("parameters of layer " + std::to_string(k) + " are not finite");
    }
  }
  Network net;
  net.spec_ = std::move(spec);
  net.weights_ = std::move(weights);
  net.biases_ = std::move(biases);
  return net;
}

void Network::check_input(const Matrix& batch) const {
  if (weights_.empty()) throw ValidationError("network is not initialized");
  if (static_cast<std::size_t>(batch.cols()) != spec_.input_dim()) {
    throw ValidationError("batch has " + std::to_string(batch.cols()) + " columns, network expects " +
                          std::to_string(spec_.input_dim()));
  }
}

ForwardCache Network::forward_with_masks(const Matrix& batch, std::span<const Matrix> masks) const {
  check_input(batch);
  const auto depth = spec_.layers.size();
  if (!masks.empty() && masks.size() != depth) throw ValidationError("need one dropout mask per layer");
  ForwardCache cache;
  cache.inputs.reserve(depth);
  cache.outputs.reserve(depth);
  Matrix a = batch;
  for (std::size_t k = 0; k < depth; ++k) {
    Matrix z = a * weights_[k].transpose();
    z.rowwise() += biases_[k].transpose();
    Matrix out = apply_activation(spec_.layers[k].activation, z);
    cache.inputs.push_back(std::move(a));
    Matrix mask = masks.empty() ? Matrix() : masks[k];
    if (mask.size() != 0) {
      if (mask.rows() != out.rows() || mask.cols() != out.cols()) {
        throw ValidationError("dropout mask of layer " + std::to_string(k) + " has the wrong shape");
      }
      a = out.cwiseProduct(mask);
    } else {
      a = out;
    }
    cache.outputs.push_back(std::move(out));
    cache.masks.push_back(std::move(mask));
  }
  return cache;
}

ForwardCache Network::forward(const Matrix& batch, bool train_mode, std::uint64_t seed) const {
  check_input(batch);
  std::vector<Matrix> masks(spec_.layers.size());
  if (train_mode) {
    Rng rng(seed);
    for (std::size_t k = 0; k + 1 < spec_.layers.size(); ++k) {
      const double rate = spec_.layers[k].dropout_rate;
      if (rate <= 0.0) continue;
      const double keep_scale = 1.0 / (1.0 - rate);
      Matrix m(batch.rows(), static_cast<Eigen::Index>(spec_.layers[k].fan_out));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
      }
      masks[k] = std::move(m);
    }
  }
  return forward_with_masks(batch, masks);
}

Matrix Network::predict(const Matrix& batch) const { return activations_at(batch, spec_.layers.size() - 1); }

Matrix Network::activations_at(const Matrix& batch, std::size_t layer) const {
  check_input(batch);
  if (layer >= spec_.layers.size()) throw ValidationError("layer index out of range");
  Matrix a = batch;
  for (std::size_t k = 0; k <= layer; ++k) {
    Matrix z = a * weights_[k].transpose();
    z.rowwise() += biases_[k].transpose();
    a = apply_activation(spec_.layers[k].activation, z);
  }
  return a;
}

double Network::loss(const Matrix& output, const Matrix& target) const {
  if (output.rows() != target.rows() || output.cols() != target.cols()) {
    throw ValidationError("loss: output and target shapes differ");
  }
  const auto batch = static_cast<double>(output.rows());
  if (spec_.loss == Loss::mse) return (output - target).squaredNorm() / batch;
  const Eigen::ArrayXXd p = output.array().max(kProbClamp).min(1.0);
  return -(target.array() * p.log()).sum() / batch;
}

Gradients Network::backward(const ForwardCache& cache, const Matrix& target) const {
  const auto depth = spec_.layers.size();
  if (cache.outputs.size() != depth) throw ValidationError("forward cache does not match the network");
  const Matrix& out = cache.outputs.back();
  if (out.rows() != target.rows() || out.cols() != target.cols()) {
    throw ValidationError("backward: target shape does not match the output");
  }
  const double batch = static_cast<double>(out.rows());

  Matrix delta;
  if (spec_.loss == Loss::categorical_cross_entropy) {
    // softmax + cross-entropy collapse to (p - t).
    delta = (out - target) / batch;
  } else {
    delta = (2.0 / batch) * (out - target).cwiseProduct(activation_derivative(spec_.layers.back().activation, out));
  }

  Gradients g;
  g.weights.resize(depth);
  g.biases.resize(depth);
  for (std::size_t k = depth; k-- > 0;) {
    g.weights[k] = delta.transpose() * cache.inputs[k];
    g.biases[k] = delta.colwise().sum().transpose();
    if (k == 0) break;
    Matrix upstream = delta * weights_[k];
    if (cache.masks[k - 1].size() != 0) upstream = upstream.cwiseProduct(cache.masks[k - 1]);
    delta = upstream.cwiseProduct(activation_derivative(spec_.layers[k - 1].activation, cache.outputs[k - 1]));
  }
  return g;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    out.insert(out.end(), weights_[k].data(), weights_[k].data() + weights_[k].size());
    out.insert(out.end(), biases_[k].data(), biases_[k].data() + biases_[k].size());
  }
  return out;
}

void Network::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != param_count()) throw ValidationError("flat parameter vector has the wrong length");
  std::size_t pos = 0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), weights_[k].size(), weights_[k].data());
    pos += static_cast<std::size_t>(weights_[k].size());
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), biases_[k].size(), biases_[k].data());
    pos += static_cast<std::size_t>(biases_[k].size());
  }
}

void Network::apply_update(const Gradients& grads, const OptimizerConfig& opt) {
  if (const auto* sgd = std::get_if<SgdConfig>(&opt)) {
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      weights_[k] -= sgd->learning_rate * grads.weights[k];
      biases_[k] -= sgd->learning_rate * grads.biases[k];
    }
    return;
  }
  const auto& ad = std::get<AdadeltaConfig>(opt);
  const auto depth = weights_.size();
  if (!optimizer_state_ || optimizer_state_->rho != ad.rho || optimizer_state_->eps != ad.eps ||
      optimizer_state_->slots.size() != 2 * depth) {
    optimizer_state_ = AdadeltaState{ad.rho, ad.eps, std::vector<AdadeltaSlot>(2 * depth)};
  }
  auto& st = *optimizer_state_;
  for (std::size_t k = 0; k < depth; ++k) {
    adadelta_step(st.slots[k], st.rho, st.eps, {weights_[k].data(), static_cast<std::size_t>(weights_[k].size())},
                  {grads.weights[k].data(), static_cast<std::size_t>(grads.weights[k].size())});
    adadelta_step(st.slots[depth + k], st.rho, st.eps,
                  {biases_[k].data(), static_cast<std::size_t>(biases_[k].size())},
                  {grads.biases[k].data(), static_cast<std::size_t>(grads.biases[k].size())});
  }
}

std::vector<double> Network::train(const Matrix& inputs, const Matrix& targets, const TrainConfig& cfg) {
  cfg.validate();
  check_input(inputs);
  if (inputs.rows() != targets.rows()) throw ValidationError("inputs and targets are not row-aligned");
  if (inputs.rows() == 0) throw ValidationError("cannot train on an empty batch");
  if (static_cast<std::size_t>(targets.cols()) != spec_.output_dim()) {
    throw ValidationError("targets have " + std::to_string(targets.cols()) + " columns, network outputs " +
                          std::to_string(spec_.output_dim()));
  }

  const auto n = static_cast<std::size_t>(inputs.rows());
  IndexVector order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  std::vector<double> history;
  history.reserve(cfg.epochs);

  Matrix xb, yb;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, n - start);
      xb.resize(static_cast<Eigen::Index>(len), inputs.cols());
      yb.resize(static_cast<Eigen::Index>(len), targets.cols());
      for (std::size_t r = 0; r < len; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(order[start + r]));
        yb.row(static_cast<Eigen::Index>(r)) = targets.row(static_cast<Eigen::Index>(order[start + r]));
      }
      const auto cache = forward(xb, true, rng());
      const double l = loss(cache.final_output(), yb);
      if (!std::isfinite(l)) {
        throw NumericalError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      apply_update(backward(cache, yb), cfg.optimizer);
      total += l;
      ++batches;
    }
    history.push_back(total / static_cast<double>(batches));
  }
  return history;
}

// ---------------------------------------------------------------------------

std::vector<double> numerical_gradient(const Network& net, const Matrix& batch, const Matrix& target,
                                       std::span<const Matrix> masks, double step) {
  Network probe = net;
  auto params = net.flat_parameters();
  std::vector<double> grad(params.size());
  auto eval = [&]() {
    probe.set_flat_parameters(params);
    return probe.loss(probe.forward_with_masks(batch, masks).final_output(), target);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + step;
    const double up = eval();
    params[i] = orig - step;
    const double down = eval();
    params[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

GradCheckResult gradient_check(const NetworkSpec& spec, std::uint64_t seed, std::size_t batch_rows,
                               double analytic_scale) {
  NetworkSpec checked = spec;
  for (auto& l : checked.layers) l.dropout_rate = 0.0;
  Network net = Network::init(checked, seed);
  Rng rng(derive_seed(seed, 1));

  // Biases start at zero after init; randomize them so they are exercised.
  auto params = net.flat_parameters();
  for (auto& p : params) {
    if (p == 0.0) p = 2.0 * uniform01(rng) - 1.0;
  }
  net.set_flat_parameters(params);

  const auto in = static_cast<Eigen::Index>(checked.input_dim());
  const auto out = static_cast<Eigen::Index>(checked.output_dim());
  const auto rows = static_cast<Eigen::Index>(batch_rows);
  Matrix batch(rows, in);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < in; ++c) batch(r, c) = normal(rng, 1.0);
  }
  Matrix target = Matrix::Zero(rows, out);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (checked.loss == Loss::categorical_cross_entropy) {
      target(r, static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(out))) = 1.0;
    } else {
      for (Eigen::Index c = 0; c < out; ++c) target(r, c) = normal(rng, 1.0);
    }
  }

  const auto analytic = net.backward(net.forward(batch, false), target).flatten();
  const auto numeric = numerical_gradient(net, batch, target, {});
  GradCheckResult res;
  res.n_params = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i] * analytic_scale;
    const double f = numeric[i];
    const double denom = std::max({std::abs(a), std::abs(f), 1e-6});
    res.max_relative_error = std::max(res.max_relative_error, std::abs(a - f) / denom);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Model files

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ValidationError("matrix payload size does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[pos++].get<double>();
  }
  return m;
}

nlohmann::json spec_to_json(const NetworkSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    layers.push_back({{"fan_in", l.fan_in},
                      {"fan_out", l.fan_out},
                      {"activation", to_string(l.activation)},
                      {"dropout_rate", l.dropout_rate}});
  }
  return {{"layers", std::move(layers)}, {"loss", to_string(spec.loss)}};
}

NetworkSpec spec_from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  for (const auto& l : j.at("layers")) {
    spec.layers.push_back({l.at("fan_in").get<std::size_t>(), l.at("fan_out").get<std::size_t>(),
                           activation_from_string(l.at("activation").get<std::string>()),
                           l.at("dropout_rate").get<double>()});
  }
  spec.loss = loss_from_string(j.at("loss").get<std::string>());
  spec.validate();
  return spec;
}

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t k = 0; k < net.weights().size(); ++k) {
    weights.push_back(matrix_to_json(net.weights()[k]));
    biases.push_back(std::vector<double>(net.biases()[k].data(), net.biases()[k].data() + net.biases()[k].size()));
  }
  return {{"format", "deepcausal-model"},
          {"version", kModelFormatVersion},
          {"kind", "network"},
          {"spec", spec_to_json(net.spec())},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

namespace {

void check_header(const nlohmann::json& j, const std::string& kind) {
  if (!j.is_object() || j.value("format", "") != "deepcausal-model") {
    throw ValidationError("not a deepcausal model file");
  }
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw ValidationError("unsupported model format version " + std::to_string(version) + " (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  }
  if (j.at("kind").get<std::string>() != kind) {
    throw ValidationError("model file holds a '" + j.at("kind").get<std::string>() + "', expected '" + kind + "'");
  }
}

}  // namespace

Network network_from_json(const nlohmann::json& j) {
  try {
    check_header(j, "network");
    auto spec = spec_from_json(j.at("spec"));
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    for (const auto& w : j.at("weights")) weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) {
      const auto v = b.get<std::vector<double>>();
      biases.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return Network::from_parameters(std::move(spec), std::move(weights), std::move(biases));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt model file: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw ValidationError("failed writing " + path.string());
}

void save_model(const Network& net, const std::filesystem::path& path) {
  write_json_file(network_to_json(net), path);
}

Network load_model(const std::filesystem::path& path) { return network_from_json(read_json_file(path)); }

}  // namespace deepcausal
