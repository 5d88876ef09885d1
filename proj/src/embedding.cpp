#include "deepcausal/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deepcausal/linalg.hpp"

namespace deepcausal {

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw ValidationError("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean[c]).square().mean();
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Standardizer Standardizer::none(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Vector::Zero(d), Vector::Ones(d)};
}

Matrix Standardizer::apply(const Matrix& x) const {
  return ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

Matrix Standardizer::invert(const Matrix& z) const {
  return ((z.array().rowwise() * scale.transpose().array()).matrix()).rowwise() + mean.transpose();
}

std::string to_string(EmbedderKind k) {
  switch (k) {
    case EmbedderKind::identity: return "identity";
    case EmbedderKind::pca: return "pca";
    case EmbedderKind::lle: return "lle";
    case EmbedderKind::autoencoder: return "autoencoder";
  }
  return "unknown";
}

EmbedderKind embedder_kind_from_string(const std::string& s) {
  for (auto k : {EmbedderKind::identity, EmbedderKind::pca, EmbedderKind::lle, EmbedderKind::autoencoder}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown embedder kind '" + s + "'");
}

Embedder::Embedder(EmbedderKind kind, std::size_t input_dim, std::size_t output_dim, State state)
    : kind_(kind), input_dim_(input_dim), output_dim_(output_dim), state_(std::move(state)) {}

const PcaState& Embedder::pca() const {
  if (kind_ != EmbedderKind::pca) throw ValidationError("embedder is not a PCA");
  return std::get<PcaState>(state_);
}

const LleState& Embedder::lle() const {
  if (kind_ != EmbedderKind::lle) throw ValidationError("embedder is not an LLE");
  return std::get<LleState>(state_);
}

const AutoencoderState& Embedder::autoencoder() const {
  if (kind_ != EmbedderKind::autoencoder) throw ValidationError("embedder is not an autoencoder");
  return std::get<AutoencoderState>(state_);
}

namespace {

void check_fit_input(const Matrix& x, const char* who) {
  if (x.rows() < 2) throw ValidationError(std::string(who) + " needs at least 2 rows");
  if (x.cols() < 1) throw ValidationError(std::string(who) + " needs at least 1 column");
  if (!x.allFinite()) throw ValidationError(std::string(who) + ": input has non-finite values");
}

}  // namespace

Matrix Embedder::transform(const Matrix& x) const {
  if (!fitted()) throw ValidationError("embedder is not fitted");
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw ValidationError("transform input has " + std::to_string(x.cols()) + " columns, embedder was fit on " +
                          std::to_string(input_dim_));
  }
  switch (kind_) {
    case EmbedderKind::identity:
      return x;
    case EmbedderKind::pca: {
      const auto& s = std::get<PcaState>(state_);
      return s.standardizer.apply(x) * s.components;
    }
    case EmbedderKind::autoencoder: {
      const auto& s = std::get<AutoencoderState>(state_);
      return s.network.activations_at(s.standardizer.apply(x), s.bottleneck_layer);
    }
    case EmbedderKind::lle: {
      const auto& s = std::get<LleState>(state_);
      Matrix out(x.rows(), static_cast<Eigen::Index>(output_dim_));
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Eigen::RowVectorXd q = x.row(r);
        const auto nbrs = nearest_rows(s.train_x, q, s.options.k_neighbors);
        // A query that coincides with a training point takes that point's
        // fitted coordinates.
        if ((s.train_x.row(static_cast<Eigen::Index>(nbrs.front())) - q).squaredNorm() == 0.0) {
          out.row(r) = s.embedding.row(static_cast<Eigen::Index>(nbrs.front()));
          continue;
        }
        const Vector w = lle_weights(s.train_x, nbrs, q, s.options.reg);
        Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(out.cols());
        for (std::size_t j = 0; j < nbrs.size(); ++j) {
          y += w[static_cast<Eigen::Index>(j)] * s.embedding.row(static_cast<Eigen::Index>(nbrs[j]));
        }
        out.row(r) = y;
      }
      return out;
    }
  }
  throw ValidationError("unknown embedder kind");
}

Embedder fit_identity(const Matrix& x) {
  if (x.cols() < 1) throw ValidationError("identity embedder needs at least 1 column");
  const auto d = static_cast<std::size_t>(x.cols());
  return Embedder(EmbedderKind::identity, d, d, std::monostate{});
}

// ---------------------------------------------------------------------------
// PCA

Embedder fit_pca(const Matrix& x, std::size_t m, const PcaOptions& opts) {
  check_fit_input(x, "fit_pca");
  const auto d = static_cast<std::size_t>(x.cols());
  if (m < 1 || m > d) throw ValidationError("PCA target dimension must lie in [1, " + std::to_string(d) + "]");

  PcaState s;
  s.standardizer = opts.standardize ? Standardizer::fit(x) : Standardizer::none(d);
  if (!opts.standardize) s.standardizer.mean = x.colwise().mean().transpose();
  const Matrix centered = s.standardizer.apply(x);
  const Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  const auto eig = jacobi_eigen(cov);

  const auto mm = static_cast<Eigen::Index>(m);
  s.components.resize(static_cast<Eigen::Index>(d), mm);
  s.explained_variance.resize(mm);
  for (Eigen::Index j = 0; j < mm; ++j) {
    const auto src = static_cast<Eigen::Index>(d) - 1 - j;
    s.components.col(j) = eig.vectors.col(src);
    s.explained_variance[j] = eig.values[src];
  }
  return Embedder(EmbedderKind::pca, d, m, std::move(s));
}

Matrix pca_inverse_transform(const Embedder& e, const Matrix& scores) {
  const auto& s = e.pca();
  return s.standardizer.invert(scores * s.components.transpose());
}

double pca_reconstruction_error(const Embedder& e, const Matrix& x) {
  const Matrix back = pca_inverse_transform(e, e.transform(x));
  return (back - x).rowwise().squaredNorm().mean();
}

// ---------------------------------------------------------------------------
// LLE

IndexVector nearest_rows(const Matrix& x, const Eigen::RowVectorXd& query, std::size_t k, std::size_t exclude) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == exclude) continue;
    d.emplace_back((x.row(static_cast<Eigen::Index>(i)) - query).squaredNorm(), i);
  }
  if (k > d.size()) throw ValidationError("asked for more neighbors than candidate rows");
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  IndexVector out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = d[j].second;
  return out;
}

Vector lle_weights(const Matrix& x, const IndexVector& neighbors, const Eigen::RowVectorXd& query, double reg) {
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  Matrix z(k, x.cols());
  for (Eigen::Index j = 0; j < k; ++j) z.row(j) = x.row(static_cast<Eigen::Index>(neighbors[static_cast<std::size_t>(j)])) - query;
  Matrix gram = z * z.transpose();
  const double trace = gram.trace();
  gram.diagonal().array() += trace > 0.0 ? reg * trace : reg;
  Vector w = gram.ldlt().solve(Vector::Ones(k));
  w /= w.sum();
  return w;
}

Matrix lle_weight_matrix(const LleState& s) {
  const auto n = s.train_x.rows();
  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nb = s.neighborhoods[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < nb.neighbors.size(); ++j) {
      w(i, static_cast<Eigen::Index>(nb.neighbors[j])) += nb.weights[static_cast<Eigen::Index>(j)];
    }
  }
  return w;
}

inline constexpr std::size_t kMaxLlePoints = 2000;

Embedder fit_lle(const Matrix& x, std::size_t m, const LleOptions& opts) {
  check_fit_input(x, "fit_lle");
  const auto n = static_cast<std::size_t>(x.rows());
  if (!(opts.reg > 0.0)) throw ValidationError("LLE regularization must be positive");
  if (m < 1) throw ValidationError("LLE target dimension must be >= 1");
  if (opts.k_neighbors < m + 1) throw ValidationError("LLE needs k_neighbors >= m + 1");
  if (opts.k_neighbors >= n) throw ValidationError("LLE needs k_neighbors < number of points");
  if (m + 1 >= n) throw ValidationError("LLE needs more points than m + 1");
  if (n > kMaxLlePoints) {
    throw ValidationError("LLE uses a dense eigen-solver and accepts at most " + std::to_string(kMaxLlePoints) +
                          " points");
  }

  LleState s;
  s.options = opts;
  s.train_x = x;
  s.neighborhoods.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::RowVectorXd xi = x.row(static_cast<Eigen::Index>(i));
    auto& nb = s.neighborhoods[i];
    nb.neighbors = nearest_rows(x, xi, opts.k_neighbors, i);
    nb.weights = lle_weights(x, nb.neighbors, xi, opts.reg);
  }

  // Eigenvectors of (I - W)^T (I - W), via one-sided rotations on I - W.
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix b = Matrix::Identity(nn, nn) - lle_weight_matrix(s);
  const auto eig = gram_eigen_jacobi(std::move(b));

  const auto mm = static_cast<Eigen::Index>(m);
  s.embedding = eig.vectors.middleCols(1, mm);
  s.eigenvalues = eig.values.segment(1, mm);
  return Embedder(EmbedderKind::lle, static_cast<std::size_t>(x.cols()), m, std::move(s));
}

// ---------------------------------------------------------------------------
// Autoencoder

NetworkSpec autoencoder_spec(std::size_t d, std::size_t m, const AutoencoderOptions& opts) {
  std::vector<std::size_t> widths{d};
  widths.insert(widths.end(), opts.hidden.begin(), opts.hidden.end());
  widths.push_back(m);
  widths.insert(widths.end(), opts.hidden.rbegin(), opts.hidden.rend());
  widths.push_back(d);
  NetworkSpec spec;
  spec.loss = Loss::mse;
  const auto code = opts.bottleneck_activation.value_or(opts.hidden_activation);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    Activation a = opts.hidden_activation;
    if (k == opts.hidden.size()) a = code;
    if (k + 2 == widths.size()) a = Activation::identity;
    spec.layers.push_back({widths[k], widths[k + 1], a, 0.0});
  }
  return spec;
}

Embedder fit_autoencoder(const Matrix& x, std::size_t m, const AutoencoderOptions& opts) {
  check_fit_input(x, "fit_autoencoder");
  const auto d = static_cast<std::size_t>(x.cols());
  if (m < 1 || m >= d) throw ValidationError("autoencoder bottleneck must satisfy 1 <= m < input dimension");
  if (opts.hidden_activation == Activation::softmax || opts.bottleneck_activation == Activation::softmax) {
    throw ValidationError("softmax cannot be a hidden activation");
  }

  if (opts.restarts < 1) throw ValidationError("autoencoder restarts must be >= 1");

  AutoencoderState s;
  s.standardizer = Standardizer::fit(x);
  s.bottleneck_layer = opts.hidden.size();
  const Matrix z = s.standardizer.apply(x);
  const auto spec = autoencoder_spec(d, m, opts);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    // Restart 0 uses the given seeds, so restarts = 1 is a plain fit.
    TrainConfig train = opts.train;
    std::uint64_t init_seed = opts.init_seed;
    if (r > 0) {
      train.seed = derive_seed(opts.train.seed, r);
      init_seed = derive_seed(opts.init_seed, r);
    }
    auto net = Network::init(spec, init_seed);
    auto history = net.train(z, z, train);
    const double err = (net.predict(z) - z).rowwise().squaredNorm().mean();
    if (err < best) {
      best = err;
      s.network = std::move(net);
      s.loss_history = std::move(history);
    }
  }
  return Embedder(EmbedderKind::autoencoder, d, m, std::move(s));
}

Matrix autoencoder_reconstruct(const Embedder& e, const Matrix& x) {
  const auto& s = e.autoencoder();
  return s.standardizer.invert(s.network.predict(s.standardizer.apply(x)));
}

double autoencoder_reconstruction_mse(const Embedder& e, const Matrix& x) {
  const auto& s = e.autoencoder();
  const Matrix z = s.standardizer.apply(x);
  return (s.network.predict(z) - z).rowwise().squaredNorm().mean();
}

// ---------------------------------------------------------------------------
// k-means

namespace {

// Returns true if any label changed.
bool assign_labels(const Matrix& x, const Matrix& centroids, std::vector<int>& labels, Vector& dist2) {
  bool changed = false;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    dist2[i] = best_d;
    if (labels[static_cast<std::size_t>(i)] != best) {
      labels[static_cast<std::size_t>(i)] = best;
      changed = true;
    }
  }
  return changed;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  if (x.rows() < 1) throw ValidationError("kmeans needs at least one point");
  if (!x.allFinite()) throw ValidationError("kmeans: input has non-finite values");
  const auto n = static_cast<std::size_t>(x.rows());
  if (k < 1 || k > n) throw ValidationError("kmeans needs 1 <= k <= number of points");
  const auto kk = static_cast<Eigen::Index>(k);
  Rng rng(seed);

  // k-means++ seeding.
  Matrix centroids(kk, x.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng() % n);
  centroids.row(0) = x.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  Vector d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < kk; ++c) {
    const double total = d2.sum();
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[static_cast<Eigen::Index>(i)];
        if (acc > target && d2[static_cast<Eigen::Index>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    if (pick == n) {
      // All remaining mass is zero: take the first unused point.
      pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    chosen[pick] = true;
    centroids.row(c) = x.row(static_cast<Eigen::Index>(pick));
    d2 = d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult res;
  res.labels.assign(n, -1);
  Vector dist2(x.rows());
  assign_labels(x, centroids, res.labels, dist2);
  res.inertia_history.push_back(dist2.sum());

  for (std::size_t it = 0; it < max_iter; ++it) {
    Matrix sums = Matrix::Zero(kk, x.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(res.labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[static_cast<std::size_t>(res.labels[i])];
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double d = (x.row(i) - centroids.row(res.labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids.row(c) = x.row(far);
      res.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
    }
    const bool changed = assign_labels(x, centroids, res.labels, dist2);
    res.inertia_history.push_back(dist2.sum());
    res.iterations = it + 1;
    if (!changed) break;
  }
  res.centroids = std::move(centroids);
  res.inertia = dist2.sum();
  return res;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

nlohmann::json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json standardizer_to_json(const Standardizer& s) {
  return {{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("mean")), vector_from_json(j.at("scale"))};
}

}  // namespace

nlohmann::json embedder_to_json(const Embedder& e) {
  if (!e.fitted()) throw ValidationError("cannot serialize an unfitted embedder");
  nlohmann::json j = {{"format", "deepcausal-model"},
                      {"version", kModelFormatVersion},
                      {"kind", "embedder"},
                      {"method", to_string(e.kind())},
                      {"input_dim", e.input_dim()},
                      {"output_dim", e.output_dim()}};
  switch (e.kind()) {
    case EmbedderKind::identity:
      break;
    case EmbedderKind::pca: {
      const auto& s = e.pca();
      j["standardizer"] = standardizer_to_json(s.standardizer);
      j["components"] = matrix_to_json(s.components);
      j["explained_variance"] = vector_to_json(s.explained_variance);
      break;
    }
    case EmbedderKind::lle: {
      const auto& s = e.lle();
      j["k_neighbors"] = s.options.k_neighbors;
      j["reg"] = s.options.reg;
      j["train_x"] = matrix_to_json(s.train_x);
      j["embedding"] = matrix_to_json(s.embedding);
      j["eigenvalues"] = vector_to_json(s.eigenvalues);
      nlohmann::json nbs = nlohmann::json::array();
      for (const auto& nb : s.neighborhoods) {
        nbs.push_back({{"neighbors", nb.neighbors}, {"weights", vector_to_json(nb.weights)}});
      }
      j["neighborhoods"] = std::move(nbs);
      break;
    }
    case EmbedderKind::autoencoder: {
      const auto& s = e.autoencoder();
      j["standardizer"] = standardizer_to_json(s.standardizer);
      j["network"] = network_to_json(s.network);
      j["bottleneck_layer"] = s.bottleneck_layer;
      j["loss_history"] = s.loss_history;
      break;
    }
  }
  return j;
}

Embedder embedder_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != "deepcausal-model") {
      throw ValidationError("not a deepcausal model file");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
    }
    if (j.at("kind").get<std::string>() != "embedder") throw ValidationError("model file does not hold an embedder");
    const auto kind = embedder_kind_from_string(j.at("method").get<std::string>());
    const auto d = j.at("input_dim").get<std::size_t>();
    const auto m = j.at("output_dim").get<std::size_t>();
    switch (kind) {
      case EmbedderKind::identity:
        return Embedder(kind, d, m, std::monostate{});
      case EmbedderKind::pca: {
        PcaState s{standardizer_from_json(j.at("standardizer")), matrix_from_json(j.at("components")),
                   vector_from_json(j.at("explained_variance"))};
        return Embedder(kind, d, m, std::move(s));
      }
      case EmbedderKind::lle: {
        LleState s;
        s.options = {j.at("k_neighbors").get<std::size_t>(), j.at("reg").get<double>()};
        s.train_x = matrix_from_json(j.at("train_x"));
        s.embedding = matrix_from_json(j.at("embedding"));
        s.eigenvalues = vector_from_json(j.at("eigenvalues"));
        for (const auto& nb : j.at("neighborhoods")) {
          s.neighborhoods.push_back({nb.at("neighbors").get<IndexVector>(), vector_from_json(nb.at("weights"))});
        }
        return Embedder(kind, d, m, std::move(s));
      }
      case EmbedderKind::autoencoder: {
        AutoencoderState s;
        s.standardizer = standardizer_from_json(j.at("standardizer"));
        s.network = network_from_json(j.at("network"));
        s.bottleneck_layer = j.at("bottleneck_layer").get<std::size_t>();
        s.loss_history = j.at("loss_history").get<std::vector<double>>();
        return Embedder(kind, d, m, std::move(s));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupt embedder file: ") + e.what());
  }
  throw ValidationError("unknown embedder kind");
}

void save_embedder(const Embedder& e, const std::filesystem::path& path) {
  write_json_file(embedder_to_json(e), path);
}

Embedder load_embedder(const std::filesystem::path& path) { return embedder_from_json(read_json_file(path)); }

}  // namespace deepcausal
