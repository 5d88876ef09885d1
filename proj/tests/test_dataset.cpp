#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "deepcausal/dataset.hpp"

using namespace deepcausal;

namespace {

constexpr double kPi = std::numbers::pi;

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("deepcausal_test_" + name);
}

}  // namespace

TEST(SwissRoll, PointAtOrigin) {
  const auto p = swiss_roll_point(0.0, 0.0);
  EXPECT_NEAR(p[0], 0.0, 1e-12);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(p[2], -3.0 * kPi / 2.0, 1e-12);
}

TEST(SwissRoll, PointAtHalfTurn) {
  const double v = std::nextafter(1.0, 0.0);
  const auto p = swiss_roll_point(0.5, v);
  EXPECT_NEAR(p[0], -3.0 * kPi, 1e-12);
  EXPECT_NEAR(p[1], 11.0, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
}

TEST(SwissRoll, LinearOutcomesOfDefaults) {
  // a=(1,1,1), b=(2,1,1) on x_clean=(1,2,3): 1+2+3 and 2+2+3.
  SwissRollConfig cfg;
  const Eigen::Vector3d x(1, 2, 3);
  const Eigen::Vector3d a(cfg.coeff_control.data()), b(cfg.coeff_treated.data());
  EXPECT_EQ(a.dot(x), 6.0);
  EXPECT_EQ(b.dot(x), 7.0);
  EXPECT_EQ(b.dot(x) - a.dot(x), 1.0);
}

TEST(SwissRoll, ShapesAndInvariants) {
  SwissRollConfig cfg;
  cfg.n = 600;
  cfg.seed = 7;
  const auto ds = gen_swiss_roll(cfg);
  ASSERT_EQ(ds.size(), 600u);
  ASSERT_EQ(ds.dim(), 3u);
  ASSERT_TRUE(ds.truth.has_value());
  ds.validate();
  const auto& t = *ds.truth;
  std::vector<int> per_group(kSwissRollGroups, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_EQ(t.ite_true[ii], t.y1[ii] - t.y0[ii]);
    EXPECT_EQ(ds.y_obs[ii], ds.w[i] == 1 ? t.y1[ii] : t.y0[ii]);
    ASSERT_GE(t.group[i], 0);
    ASSERT_LT(t.group[i], kSwissRollGroups);
    ++per_group[static_cast<std::size_t>(t.group[i])];
  }
  for (int c : per_group) EXPECT_EQ(c, 100);
}

TEST(SwissRoll, NoiselessPointsLieOnTheRollAndOutcomesAreLinear) {
  SwissRollConfig cfg;
  cfg.n = 200;
  cfg.noise_sigma = 0.0;
  const auto ds = gen_swiss_roll(cfg);
  const auto& t = *ds.truth;
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    const double x = ds.x(i, 0), z = ds.x(i, 2);
    const double radius = std::hypot(x, z);
    EXPECT_GE(radius, 3.0 * kPi / 2.0 - 1e-9);
    EXPECT_LE(radius, 9.0 * kPi / 2.0 + 1e-9);
    EXPECT_NEAR(std::cos(radius) * radius, x, 1e-9);
    EXPECT_NEAR(std::sin(radius) * radius, z, 1e-9);
    EXPECT_NEAR(t.y0[i], ds.x.row(i).sum(), 1e-9);
    EXPECT_NEAR(t.ite_true[i], ds.x(i, 0), 1e-9);
  }
}

TEST(SwissRoll, GroupsFollowTheRollParameter) {
  SwissRollConfig cfg;
  cfg.n = 300;
  cfg.noise_sigma = 0.0;
  const auto ds = gen_swiss_roll(cfg);
  // With no noise the radius equals t, so group order must follow radius.
  std::vector<std::pair<double, int>> r;
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    r.emplace_back(std::hypot(ds.x(i, 0), ds.x(i, 2)), ds.truth->group[static_cast<std::size_t>(i)]);
  }
  std::sort(r.begin(), r.end());
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i - 1].second, r[i].second);
}

TEST(SwissRoll, SameSeedSameData) {
  SwissRollConfig cfg;
  cfg.n = 100;
  cfg.seed = 42;
  cfg.outcome_noise_sigma = 0.3;
  EXPECT_EQ(gen_swiss_roll(cfg), gen_swiss_roll(cfg));
  auto other = cfg;
  other.seed = 43;
  EXPECT_FALSE(gen_swiss_roll(cfg) == gen_swiss_roll(other));
}

TEST(SwissRoll, TreatmentShareFollowsPTreat) {
  SwissRollConfig cfg;
  cfg.n = 4000;
  cfg.p_treat = 0.3;
  const auto ds = gen_swiss_roll(cfg);
  double share = 0.0;
  for (int w : ds.w) share += w;
  share /= static_cast<double>(ds.size());
  // Binomial sd is about 0.0072.
  EXPECT_NEAR(share, 0.3, 0.03);
}

TEST(SwissRoll, TwinModeClonesIntoTheOppositeArm) {
  SwissRollConfig cfg;
  cfg.n = 50;
  cfg.duplicate_twins = true;
  const auto ds = gen_swiss_roll(cfg);
  ASSERT_EQ(ds.size(), 100u);
  ds.validate();
  const auto& pair = *ds.truth->pair_index;
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(pair[i], i + 50);
    EXPECT_EQ(pair[i + 50], i);
    EXPECT_EQ(ds.w[i] + ds.w[i + 50], 1);
    EXPECT_TRUE(ds.x.row(static_cast<Eigen::Index>(i)) == ds.x.row(static_cast<Eigen::Index>(i + 50)));
  }
}

TEST(SwissRoll, RejectsBadConfig) {
  SwissRollConfig cfg;
  cfg.n = 1;
  EXPECT_THROW(gen_swiss_roll(cfg), ValidationError);
  cfg = {};
  cfg.noise_sigma = std::nan("");
  EXPECT_THROW(gen_swiss_roll(cfg), ValidationError);
  cfg = {};
  cfg.p_treat = 1.5;
  EXPECT_THROW(gen_swiss_roll(cfg), ValidationError);
  cfg = {};
  cfg.coeff_treated[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(gen_swiss_roll(cfg), ValidationError);
  cfg = {};
  cfg.outcome_noise_sigma = -1.0;
  EXPECT_THROW(gen_swiss_roll(cfg), ValidationError);
}

TEST(PropensityPairs, ShapeAndBijection) {
  const auto ds = gen_propensity_pairs(1000, 0.01, 3);
  ASSERT_EQ(ds.size(), 2000u);
  ASSERT_EQ(ds.dim(), 2u);
  ds.validate();
  const auto& pair = *ds.truth->pair_index;
  std::vector<int> hit(2000, 0);
  for (std::size_t i = 0; i < 2000; ++i) {
    EXPECT_EQ(pair[pair[i]], i);
    EXPECT_NE(ds.w[i], ds.w[pair[i]]);
    ++hit[pair[i]];
  }
  for (int h : hit) EXPECT_EQ(h, 1);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(ds.w[i], 1);
    EXPECT_EQ(ds.w[i + 1000], 0);
    for (Eigen::Index c = 0; c < 2; ++c) {
      EXPECT_GE(ds.x(static_cast<Eigen::Index>(i), c), 0.0);
      EXPECT_LT(ds.x(static_cast<Eigen::Index>(i), c), 1.0);
    }
  }
}

TEST(PropensityPairs, PairDistanceShrinksWithJitter) {
  double prev = std::numeric_limits<double>::infinity();
  for (double jitter : {1e-1, 1e-3, 1e-5, 1e-8}) {
    const auto ds = gen_propensity_pairs(1, jitter, 11);
    const double d = (ds.x.row(0) - ds.x.row(1)).norm() + std::abs(ds.y_obs[0] - ds.y_obs[1]);
    EXPECT_LT(d, prev);
    EXPECT_LT(d, 20.0 * jitter);
    prev = d;
  }
}

TEST(PropensityPairs, TwinIsTheNearestTreatedUnitForSmallJitter) {
  const auto ds = gen_propensity_pairs(200, 1e-4, 5);
  const auto& pair = *ds.truth->pair_index;
  for (std::size_t c = 200; c < 400; ++c) {
    // Exhaustive scan over (x1, x2, y).
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < 200; ++t) {
      const auto ci = static_cast<Eigen::Index>(c), ti = static_cast<Eigen::Index>(t);
      const double d = std::pow(ds.x(ci, 0) - ds.x(ti, 0), 2) + std::pow(ds.x(ci, 1) - ds.x(ti, 1), 2) +
                       std::pow(ds.y_obs[ci] - ds.y_obs[ti], 2);
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    EXPECT_EQ(best, pair[c]);
  }
}

TEST(PropensityPairs, RejectsZeroJitter) {
  EXPECT_THROW(gen_propensity_pairs(10, 0.0, 1), ValidationError);
  EXPECT_THROW(gen_propensity_pairs(10, -0.1, 1), ValidationError);
  EXPECT_THROW(gen_propensity_pairs(0, 0.1, 1), ValidationError);
}

TEST(Dataset, ValidateCatchesInconsistentTruth) {
  SwissRollConfig cfg;
  cfg.n = 20;
  auto ds = gen_swiss_roll(cfg);
  auto bad = ds;
  bad.truth->ite_true[3] += 1e-9;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ds;
  bad.y_obs[4] += 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ds;
  bad.w[0] = 2;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ds;
  bad.x(0, 0) = std::nan("");
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = ds;
  bad.w.pop_back();
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Dataset, SubsetKeepsTruthAndDropsPairs) {
  const auto ds = gen_propensity_pairs(10, 0.05, 2);
  const auto sub = ds.subset({1, 12, 5});
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.w[1], 0);
  EXPECT_EQ(sub.y_obs[2], ds.y_obs[5]);
  EXPECT_FALSE(sub.truth->pair_index.has_value());
  sub.validate();
}

TEST(Csv, RoundTripSwissRoll) {
  SwissRollConfig cfg;
  cfg.n = 120;
  cfg.outcome_noise_sigma = 0.25;
  const auto ds = gen_swiss_roll(cfg);
  const auto path = temp_path("roll.csv");
  save_csv(ds, path);
  const auto back = load_csv(path);
  EXPECT_EQ(back, ds);
  std::filesystem::remove(path);
}

TEST(Csv, RoundTripPairsAndBareData) {
  const auto ds = gen_propensity_pairs(25, 0.02, 9);
  EXPECT_EQ(parse_csv(to_csv(ds)), ds);
  auto bare = ds;
  bare.truth.reset();
  EXPECT_EQ(parse_csv(to_csv(bare)), bare);
}

TEST(Csv, HeaderNamesColumns) {
  const auto ds = gen_propensity_pairs(2, 0.02, 9);
  const auto text = to_csv(ds);
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,w,y_obs,y0,y1,ite_true,group,pair_index");
}

TEST(Csv, ErrorsCarryLineNumbers) {
  const std::string header = "x1,w,y_obs\n";
  auto message = [](const std::string& text) {
    try {
      parse_csv(text);
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(header + "1,0,2\n1,3,2\n").find("line 3"), std::string::npos);
  EXPECT_NE(message(header + "1,0,2\n1,0\n").find("line 3"), std::string::npos);
  EXPECT_NE(message(header + "abc,0,2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message(header).find("no rows"), std::string::npos);
  EXPECT_THROW(parse_csv(""), ValidationError);
  EXPECT_THROW(load_csv(temp_path("does_not_exist.csv")), ValidationError);
}

TEST(Split, DisjointCoverSortedAndSeeded) {
  const auto s = train_test_split(101, 0.2, 3);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 81u);
  std::vector<int> seen(101, 0);
  for (auto i : s.train) ++seen[i];
  for (auto i : s.test) ++seen[i];
  for (int v : seen) EXPECT_EQ(v, 1);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
  EXPECT_EQ(train_test_split(101, 0.2, 3).test, s.test);
  EXPECT_NE(train_test_split(101, 0.2, 4).test, s.test);
  EXPECT_THROW(train_test_split(10, 1.0, 0), ValidationError);
}
