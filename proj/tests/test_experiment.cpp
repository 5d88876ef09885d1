#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "deepcausal/experiment.hpp"

using namespace deepcausal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("deepcausal_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DEEPCAUSAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_config(const fs::path& p, const json& j) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << j.dump();
}

ExperimentConfig small_swissroll(std::vector<std::string> methods) {
  auto c = ExperimentConfig::defaults(ExperimentKind::swissroll);
  c.swissroll.data.n = 300;
  c.swissroll.methods = std::move(methods);
  c.swissroll.autoencoder.train.epochs = 5;
  c.swissroll.kmeans_clusters = 0;
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughResolvedJson) {
  for (auto kind : {ExperimentKind::swissroll, ExperimentKind::propensity, ExperimentKind::gradcheck}) {
    const auto c = ExperimentConfig::defaults(kind);
    const json r = resolved_config(c);
    EXPECT_EQ(resolved_config(parse_config(r)), r) << to_string(kind);
  }
}

TEST(Config, MinimalDocumentTakesDefaults) {
  const auto c = parse_config(json{{"version", 1}, {"experiment", "propensity"}});
  EXPECT_EQ(c.kind, ExperimentKind::propensity);
  EXPECT_EQ(c.propensity.n_pairs, 1000u);
  EXPECT_DOUBLE_EQ(c.propensity.jitter_sigma, 0.02);
  EXPECT_EQ(resolved_config(c), resolved_config(ExperimentConfig::defaults(ExperimentKind::propensity)));
}

TEST(Config, OverridesAreApplied) {
  const json j = {{"version", 1},
                  {"experiment", "swissroll"},
                  {"seed", 9},
                  {"swissroll", {{"methods", {"pca"}}, {"data", {{"n", 500}}}, {"lle", {{"k_neighbors", 7}}}}}};
  const auto c = parse_config(j);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.swissroll.methods, std::vector<std::string>{"pca"});
  EXPECT_EQ(c.swissroll.data.n, 500u);
  EXPECT_EQ(c.swissroll.lle.k_neighbors, 7u);
}

TEST(Config, StrictnessRejects) {
  auto expect_reject = [](const json& j, const std::string& fragment) {
    try {
      parse_config(j);
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_reject({{"version", 1}, {"experiment", "swissroll"}, {"sede", 1}}, "sede");
  expect_reject({{"version", 1}, {"experiment", "swissroll"}, {"swissroll", {{"data", {{"nn", 5}}}}}}, "data.nn");
  expect_reject({{"version", 2}, {"experiment", "swissroll"}}, "version");
  expect_reject({{"experiment", "swissroll"}}, "version");
  expect_reject({{"version", 1}, {"experiment", "bootstrap"}}, "bootstrap");
  expect_reject({{"version", 1}, {"experiment", "swissroll"}, {"swissroll", {{"methods", {"tsne"}}}}}, "tsne");
  expect_reject({{"version", 1}, {"experiment", "swissroll"}, {"swissroll", {{"methods", {"pca", "pca"}}}}}, "pca");
  expect_reject({{"version", 1}, {"experiment", "swissroll"}, {"swissroll", {{"data", {{"n", "many"}}}}}}, "n");
  expect_reject({{"version", 1}, {"experiment", "propensity"}, {"propensity", {{"jitter_sigma", -1.0}}}}, "jitter");
  expect_reject({{"version", 1}, {"experiment", "gradcheck"}, {"gradcheck", {{"random_specs", 0}}}}, "gradcheck");
}

#ifdef DEEPCAUSAL_CONFIG_DIR
TEST(Config, ShippedConfigsMatchDefaults) {
  const fs::path dir = DEEPCAUSAL_CONFIG_DIR;
  for (auto kind : {ExperimentKind::swissroll, ExperimentKind::propensity, ExperimentKind::gradcheck}) {
    const auto c = load_config(dir / (to_string(kind) + ".json"));
    EXPECT_EQ(resolved_config(c), resolved_config(ExperimentConfig::defaults(kind))) << to_string(kind);
  }
  const auto twins = load_config(dir / "swissroll_twins.json");
  EXPECT_TRUE(twins.swissroll.data.duplicate_twins);
  EXPECT_EQ(twins.swissroll.data.noise_sigma, 0.0);
}
#endif

TEST(Config, LoadReportsFileErrors) {
  EXPECT_THROW(load_config("/nonexistent/deepcausal.json"), ValidationError);
  const auto dir = scratch("badjson");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{ \"version\": 1, ";
  EXPECT_THROW(load_config(dir / "c.json"), ValidationError);
}

TEST(SwissRollRun, OneMethodGivesOneReport) {
  const auto r = run_swissroll(small_swissroll({"pca"}));
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].method, "pca");
  EXPECT_EQ(r.reports[0].n_test, 60u);
  EXPECT_TRUE(r.reports[0].silhouette.has_value());
  EXPECT_EQ(r.embeddings[0].coords.rows(), 300);
  EXPECT_EQ(r.embeddings[0].coords.cols(), 2);
}

TEST(SwissRollRun, TwinModeRecoversEffectsExactly) {
  auto c = small_swissroll({"raw_knn", "pca", "lle", "autoencoder"});
  c.swissroll.data.duplicate_twins = true;
  const auto r = run_swissroll(c);
  ASSERT_EQ(r.reports.size(), 4u);
  for (const auto& rep : r.reports) EXPECT_LT(rep.mean_abs_ite_error, 1e-10) << rep.method;
}

TEST(SwissRollRun, DeterministicAndSeedSensitive) {
  const auto c = small_swissroll({"raw_knn", "autoencoder"});
  const auto a = run_swissroll(c);
  const auto b = run_swissroll(c);
  EXPECT_EQ(a.reports, b.reports);
  auto c2 = c;
  c2.seed = 1;
  EXPECT_NE(run_swissroll(c2).reports[0].mean_abs_ite_error, a.reports[0].mean_abs_ite_error);
}

TEST(SwissRollRun, WritesOutputContract) {
  auto c = small_swissroll({"raw_knn", "pca"});
  c.swissroll.kmeans_clusters = 6;
  const auto r = run_swissroll(c);
  const auto dir = scratch("swiss_out");
  prepare_output_dir(dir, false);
  write_outputs(r, c, dir);
  for (const char* f : {"reports.json", "comparison.csv", "resolved_config.json", "embedding_raw_knn.csv",
                        "embedding_pca.csv", "kmeans.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(first_line(dir / "embedding_pca.csv"), "unit,z1,z2,group,w,split");
  EXPECT_EQ(first_line(dir / "embedding_raw_knn.csv"), "unit,z1,z2,z3,group,w,split");
  EXPECT_EQ(first_line(dir / "kmeans.csv"), "unit,x1,x2,x3,group,cluster");
  const auto j = json::parse(read_text(dir / "reports.json"));
  EXPECT_EQ(j.at("reports").size(), 2u);
  EXPECT_EQ(effect_report_from_json(j.at("reports")[1]), r.reports[1]);
  EXPECT_EQ(resolved_config(load_config(dir / "resolved_config.json")), resolved_config(c));
}

TEST(PropensityRun, OutputContract) {
  auto c = ExperimentConfig::defaults(ExperimentKind::propensity);
  c.propensity.n_pairs = 100;
  c.propensity.fit.net.train.epochs = 5;
  const auto r = run_propensity(c);
  ASSERT_EQ(r.reports.size(), 2u);
  EXPECT_EQ(r.reports[0].method, "logistic");
  EXPECT_EQ(r.reports[1].method, "propensity_net");
  for (const auto& m : r.methods) {
    EXPECT_EQ(m.matches.size(), 100u);
    EXPECT_EQ(m.scores.size(), 200);
  }
  for (const auto& rep : r.reports) {
    EXPECT_GE(rep.misassignment_rate_pct, 0.0);
    EXPECT_LE(rep.misassignment_rate_pct, 100.0);
    EXPECT_GE(rep.accuracy_pct, 0.0);
    EXPECT_LE(rep.accuracy_pct, 100.0);
  }
  const auto dir = scratch("prop_out");
  prepare_output_dir(dir, false);
  write_outputs(r, c, dir);
  EXPECT_EQ(first_line(dir / "matched_pairs.csv"),
            "method,unit,w,score,x1,x2,y_obs,matched_index,matched_score,pair_index");
  EXPECT_EQ(first_line(dir / "comparison.csv"), std::string("method,") + kMisassignmentErrorColumn + "," +
                                                    kMisassignmentRateColumn + "," + kAccuracyColumn);
  const auto j = json::parse(read_text(dir / "reports.json"));
  EXPECT_TRUE(j.contains("logistic_fit"));
  EXPECT_EQ(propensity_report_from_json(j.at("reports")[0]), r.reports[0]);
}

TEST(PropensityRun, IncludeOutcomeAddsAFeature) {
  auto c = ExperimentConfig::defaults(ExperimentKind::propensity);
  c.propensity.n_pairs = 50;
  c.propensity.methods = {"logistic"};
  c.propensity.include_outcome = true;
  EXPECT_EQ(run_propensity(c).features.cols(), 3);
}

TEST(GradcheckRun, PassesAndCorruptionFails) {
  auto c = ExperimentConfig::defaults(ExperimentKind::gradcheck);
  c.gradcheck.random_specs = 6;
  const auto ok = run_gradcheck(c);
  EXPECT_EQ(ok.entries.size(), 6u);
  EXPECT_TRUE(ok.all_passed());
  c.gradcheck.corrupt_gradient_scale = 1.5;
  EXPECT_FALSE(run_gradcheck(c).all_passed());
}

TEST(GradcheckRun, RandomSpecsAreValidAndVaried) {
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto spec = random_network_spec(s);
    EXPECT_NO_THROW(spec.validate());
    EXPECT_GE(spec.layers.size(), 1u);
    EXPECT_LE(spec.layers.size(), 3u);
    seen.insert(spec_to_json(spec).dump());
  }
  EXPECT_GT(seen.size(), 40u);
}

TEST(OutputDir, RefusesNonEmptyWithoutForce) {
  const auto dir = scratch("nonempty");
  fs::create_directories(dir);
  std::ofstream(dir / "x.txt") << "x";
  EXPECT_THROW(prepare_output_dir(dir, false), ValidationError);
  EXPECT_NO_THROW(prepare_output_dir(dir, true));
  EXPECT_NO_THROW(prepare_output_dir(scratch("fresh") / "nested", false));
}

TEST(Cli, ExitCodes) {
  const auto root = scratch("cli");
  fs::create_directories(root);
  const json grad = {{"version", 1}, {"experiment", "gradcheck"}, {"gradcheck", {{"random_specs", 3}}}};
  write_config(root / "grad.json", grad);
  EXPECT_EQ(run_cli("gradcheck --config " + (root / "grad.json").string() + " --out " + (root / "g1").string()), 0);
  EXPECT_TRUE(fs::exists(root / "g1" / "gradcheck.json"));
  // Same directory again: refused, then allowed with --force.
  EXPECT_EQ(run_cli("gradcheck --config " + (root / "grad.json").string() + " --out " + (root / "g1").string()), 1);
  EXPECT_EQ(run_cli("gradcheck --config " + (root / "grad.json").string() + " --out " + (root / "g1").string() +
                    " --force"),
            0);

  write_config(root / "unknown.json", {{"version", 1}, {"experiment", "gradcheck"}, {"bogus", 1}});
  EXPECT_EQ(run_cli("gradcheck --config " + (root / "unknown.json").string() + " --out " + (root / "g2").string()), 1);
  EXPECT_EQ(run_cli("propensity --config " + (root / "grad.json").string() + " --out " + (root / "g3").string()), 1);
  EXPECT_EQ(run_cli("swissroll --out " + (root / "g4").string() + " --bogus-flag"), 1);
  EXPECT_EQ(run_cli("swissroll"), 1);

  json corrupt = grad;
  corrupt["gradcheck"]["corrupt_gradient_scale"] = 2.0;
  write_config(root / "corrupt.json", corrupt);
  EXPECT_EQ(run_cli("gradcheck --config " + (root / "corrupt.json").string() + " --out " + (root / "g5").string()), 2);

  const json diverge = {
      {"version", 1},
      {"experiment", "swissroll"},
      {"swissroll",
       {{"data", {{"n", 100}}},
        {"methods", {"autoencoder"}},
        {"kmeans_clusters", 0},
        {"autoencoder", {{"train", {{"epochs", 50}, {"optimizer", {{"name", "sgd"}, {"learning_rate", 1e6}}}}}}}}}};
  write_config(root / "diverge.json", diverge);
  EXPECT_EQ(run_cli("swissroll --config " + (root / "diverge.json").string() + " --out " + (root / "g6").string()), 2);
}

TEST(Cli, SeedOverrideIsDeterministic) {
  const auto root = scratch("cli_det");
  fs::create_directories(root);
  write_config(root / "p.json", {{"version", 1},
                                 {"experiment", "propensity"},
                                 {"propensity",
                                  {{"n_pairs", 60},
                                   {"propensity_net", {{"train", {{"epochs", 3}}}}}}}});
  const std::string base = "propensity --config " + (root / "p.json").string() + " --seed 4 --out ";
  ASSERT_EQ(run_cli(base + (root / "a").string()), 0);
  ASSERT_EQ(run_cli(base + (root / "b").string()), 0);
  EXPECT_EQ(read_text(root / "a" / "reports.json"), read_text(root / "b" / "reports.json"));
  EXPECT_EQ(read_text(root / "a" / "matched_pairs.csv"), read_text(root / "b" / "matched_pairs.csv"));
  EXPECT_EQ(json::parse(read_text(root / "a" / "resolved_config.json")).at("seed"), 4);
}
