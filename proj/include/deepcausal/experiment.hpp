#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "deepcausal/dataset.hpp"
#include "deepcausal/embedding.hpp"
#include "deepcausal/matching.hpp"
#include "deepcausal/metrics.hpp"
#include "deepcausal/propensity.hpp"

namespace deepcausal {

inline constexpr int kConfigVersion = 1;

enum class ExperimentKind { swissroll, propensity, gradcheck };
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct SwissRollExperiment {
  SwissRollConfig data{};
  double test_fraction = 0.2;
  std::vector<std::string> methods{"raw_knn", "pca", "lle", "autoencoder"};
  std::size_t embedding_dim = 2;
  std::size_t k_match = 1;
  std::optional<double> caliper;
  PcaOptions pca{true};
  LleOptions lle{};
  AutoencoderOptions autoencoder{};
  // Clusters for the k-means plot-data baseline; 0 disables it.
  std::size_t kmeans_clusters = kSwissRollGroups;
};

struct PropensityExperiment {
  std::size_t n_pairs = 1000;
  double jitter_sigma = 0.02;
  // Adds the observed outcome as a model input next to the covariates.
  bool include_outcome = false;
  std::vector<std::string> methods{"logistic", "propensity_net"};
  MatchDirection direction = MatchDirection::treated_to_control;
  PropensityFitConfig fit{};
};

struct GradcheckExperiment {
  // Explicit specs, checked first.
  std::vector<NetworkSpec> specs;
  // Seeded random specs appended after the explicit ones.
  std::size_t random_specs = 24;
  std::size_t batch_rows = 4;
  double tolerance = 1e-4;
  // Test hook: multiplies the analytic gradient before comparison.
  double corrupt_gradient_scale = 1.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::swissroll;
  std::uint64_t seed = 0;
  SwissRollExperiment swissroll{};
  PropensityExperiment propensity{};
  GradcheckExperiment gradcheck{};

  // Documented defaults for each experiment.
  static ExperimentConfig defaults(ExperimentKind kind);
};

// Strict JSON: "version" must equal kConfigVersion, unknown keys are
// rejected at every level, omitted keys take their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
// Every field spelled out; parse_config(resolved_config(c)) reproduces c.
nlohmann::json resolved_config(const ExperimentConfig& c);

// Seeds of the independent random streams used by the runners.
namespace stream {
inline constexpr std::uint64_t data = 0;
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t model_init = 2;
inline constexpr std::uint64_t model_train = 3;
inline constexpr std::uint64_t kmeans = 4;
inline constexpr std::uint64_t specs = 5;
}  // namespace stream

struct MethodEmbedding {
  std::string method;
  Matrix coords;  // every unit, train and test
};

struct SwissRollResult {
  ObservationalDataset data;
  Split split;
  std::vector<EffectReport> reports;
  std::vector<MethodEmbedding> embeddings;
  std::optional<KMeansResult> kmeans;
};

struct PropensityMethodResult {
  std::string method;
  Vector scores;
  std::vector<MatchResult> matches;
  LogisticFit logistic;  // only for the logistic method
};

struct PropensityResult {
  ObservationalDataset data;
  Matrix features;
  std::vector<PropensityReport> reports;
  std::vector<PropensityMethodResult> methods;
};

struct GradcheckEntry {
  NetworkSpec spec;
  GradCheckResult result;
  bool passed = false;
};

struct GradcheckResult {
  std::vector<GradcheckEntry> entries;
  double tolerance = 0.0;
  bool all_passed() const;
};

SwissRollResult run_swissroll(const ExperimentConfig& cfg);
PropensityResult run_propensity(const ExperimentConfig& cfg);
GradcheckResult run_gradcheck(const ExperimentConfig& cfg);

// Random but valid spec: 1-3 layers, widths 1-5, any activation/loss pairing
// the network accepts, dropout on some hidden layers.
NetworkSpec random_network_spec(std::uint64_t seed);

nlohmann::json reports_json(const SwissRollResult& r);
nlohmann::json reports_json(const PropensityResult& r);
nlohmann::json reports_json(const GradcheckResult& r);

// Refuses a non-empty directory unless force is set; creates it otherwise.
void prepare_output_dir(const std::filesystem::path& dir, bool force);

// reports.json, comparison.csv, embedding_<method>.csv, resolved_config.json.
void write_outputs(const SwissRollResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);
// reports.json, comparison.csv, matched_pairs.csv, resolved_config.json.
void write_outputs(const PropensityResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);
// gradcheck.json, reports.json, resolved_config.json.
void write_outputs(const GradcheckResult& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace deepcausal
