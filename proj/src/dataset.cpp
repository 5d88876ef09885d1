#include "deepcausal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace deepcausal {

Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in [0, 1)");
  }
  IndexVector perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

void ObservationalDataset::validate() const {
  const auto n = w.size();
  if (static_cast<std::size_t>(x.rows()) != n || static_cast<std::size_t>(y_obs.size()) != n) {
    throw ValidationError("dataset length mismatch: x has " + std::to_string(x.rows()) +
                          " rows, w has " + std::to_string(n) + ", y_obs has " +
                          std::to_string(y_obs.size()));
  }
  if (!x.allFinite()) throw ValidationError("dataset covariates contain non-finite values");
  if (!all_finite(y_obs)) throw ValidationError("dataset outcomes contain non-finite values");
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] != 0 && w[i] != 1) {
      throw ValidationError("treatment indicator of unit " + std::to_string(i) + " is not binary");
    }
  }
  if (!truth) return;
  const auto& t = *truth;
  if (static_cast<std::size_t>(t.y0.size()) != n || static_cast<std::size_t>(t.y1.size()) != n ||
      static_cast<std::size_t>(t.ite_true.size()) != n || t.group.size() != n) {
    throw ValidationError("ground truth length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (t.ite_true[ii] != t.y1[ii] - t.y0[ii]) {
      throw ValidationError("ite_true != y1 - y0 at unit " + std::to_string(i));
    }
    if (y_obs[ii] != (w[i] == 1 ? t.y1[ii] : t.y0[ii])) {
      throw ValidationError("y_obs disagrees with the potential outcome of unit " + std::to_string(i));
    }
  }
  if (t.pair_index) {
    const auto& p = *t.pair_index;
    if (p.size() != n) throw ValidationError("pair_index length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] >= n || p[p[i]] != i || w[p[i]] == w[i]) {
        throw ValidationError("pair_index is not an opposite-arm bijection at unit " +
                              std::to_string(i));
      }
    }
  }
}

ObservationalDataset ObservationalDataset::subset(const IndexVector& rows) const {
  ObservationalDataset out;
  out.x = take_rows(x, rows);
  out.w = take(w, rows);
  out.y_obs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.y_obs[static_cast<Eigen::Index>(r)] = y_obs[static_cast<Eigen::Index>(rows[r])];
  }
  if (truth) {
    GroundTruth t;
    t.y0.resize(out.y_obs.size());
    t.y1.resize(out.y_obs.size());
    t.ite_true.resize(out.y_obs.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto dst = static_cast<Eigen::Index>(r);
      const auto src = static_cast<Eigen::Index>(rows[r]);
      t.y0[dst] = truth->y0[src];
      t.y1[dst] = truth->y1[src];
      t.ite_true[dst] = truth->ite_true[src];
    }
    t.group = take(truth->group, rows);
    out.truth = std::move(t);
  }
  return out;
}

bool ObservationalDataset::operator==(const ObservationalDataset& o) const {
  return x.rows() == o.x.rows() && x.cols() == o.x.cols() && x == o.x && w == o.w &&
         y_obs.size() == o.y_obs.size() && y_obs == o.y_obs && truth == o.truth;
}

void SwissRollConfig::validate() const {
  if (n < 2) throw ValidationError("swiss roll needs n >= 2");
  auto finite3 = [](const std::array<double, 3>& a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
  };
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw ValidationError("noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(outcome_noise_sigma) || outcome_noise_sigma < 0.0) {
    throw ValidationError("outcome_noise_sigma must be finite and >= 0");
  }
  if (!finite3(coeff_control) || !finite3(coeff_treated)) {
    throw ValidationError("outcome coefficients must be finite");
  }
  if (!(p_treat >= 0.0 && p_treat <= 1.0)) throw ValidationError("p_treat must lie in [0, 1]");
}

Eigen::Vector3d swiss_roll_point(double u, double v) {
  const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * u);
  const double h = 11.0 * v;
  return {t * std::cos(t), h, t * std::sin(t)};
}

ObservationalDataset gen_swiss_roll(const SwissRollConfig& cfg) {
  cfg.validate();
  const auto n = cfg.n;
  const auto rows = static_cast<Eigen::Index>(cfg.duplicate_twins ? 2 * n : n);
  Rng rng(cfg.seed);

  ObservationalDataset ds;
  ds.x.resize(rows, 3);
  ds.w.resize(static_cast<std::size_t>(rows));
  ds.y_obs.resize(rows);
  GroundTruth truth;
  truth.y0.resize(rows);
  truth.y1.resize(rows);
  truth.ite_true.resize(rows);
  truth.group.resize(static_cast<std::size_t>(rows));

  const Eigen::Vector3d a(cfg.coeff_control.data());
  const Eigen::Vector3d b(cfg.coeff_treated.data());
  std::vector<double> t_param(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    const Eigen::Vector3d clean = swiss_roll_point(u, v);
    t_param[i] = 1.5 * std::numbers::pi * (1.0 + 2.0 * u);
    for (int c = 0; c < 3; ++c) ds.x(ii, c) = clean[c] + normal(rng, cfg.noise_sigma);
    ds.w[i] = uniform01(rng) < cfg.p_treat ? 1 : 0;
    truth.y0[ii] = a.dot(clean) + normal(rng, cfg.outcome_noise_sigma);
    truth.y1[ii] = b.dot(clean) + normal(rng, cfg.outcome_noise_sigma);
    truth.ite_true[ii] = truth.y1[ii] - truth.y0[ii];
    ds.y_obs[ii] = ds.w[i] == 1 ? truth.y1[ii] : truth.y0[ii];
  }

  // Six equal-count bands along the roll parameter.
  IndexVector order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return t_param[l] < t_param[r]; });
  for (std::size_t rank = 0; rank < n; ++rank) {
    truth.group[order[rank]] = static_cast<int>(rank * kSwissRollGroups / n);
  }

  if (cfg.duplicate_twins) {
    IndexVector pair(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = static_cast<Eigen::Index>(i);
      const auto dst = static_cast<Eigen::Index>(i + n);
      ds.x.row(dst) = ds.x.row(src);
      ds.w[i + n] = 1 - ds.w[i];
      truth.y0[dst] = truth.y0[src];
      truth.y1[dst] = truth.y1[src];
      truth.ite_true[dst] = truth.ite_true[src];
      truth.group[i + n] = truth.group[i];
      ds.y_obs[dst] = ds.w[i + n] == 1 ? truth.y1[dst] : truth.y0[dst];
      pair[i] = i + n;
      pair[i + n] = i;
    }
    truth.pair_index = std::move(pair);
  }
  ds.truth = std::move(truth);
  return ds;
}

ObservationalDataset gen_propensity_pairs(std::size_t n, double jitter_sigma, std::uint64_t seed) {
  if (n < 1) throw ValidationError("gen_propensity_pairs needs n >= 1");
  if (!std::isfinite(jitter_sigma) || jitter_sigma <= 0.0) {
    throw ValidationError("jitter_sigma must be > 0: zero jitter makes both arms coincide");
  }
  Rng rng(seed);
  const auto rows = static_cast<Eigen::Index>(2 * n);
  ObservationalDataset ds;
  ds.x.resize(rows, 2);
  ds.w.resize(2 * n);
  ds.y_obs.resize(rows);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    ds.x(ii, 0) = uniform01(rng);
    ds.x(ii, 1) = uniform01(rng);
    ds.y_obs[ii] = uniform01(rng);
    ds.w[i] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(i);
    const auto dst = static_cast<Eigen::Index>(i + n);
    ds.x(dst, 0) = ds.x(src, 0) + normal(rng, jitter_sigma);
    ds.x(dst, 1) = ds.x(src, 1) + normal(rng, jitter_sigma);
    ds.y_obs[dst] = ds.y_obs[src] + normal(rng, jitter_sigma);
    ds.w[i + n] = 0;
  }

  // The twin's outcome stands in for the missing potential outcome.
  GroundTruth truth;
  truth.y0.resize(rows);
  truth.y1.resize(rows);
  truth.ite_true.resize(rows);
  truth.group.assign(2 * n, 0);
  IndexVector pair(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = static_cast<Eigen::Index>(i);
    const auto c = static_cast<Eigen::Index>(i + n);
    truth.y1[t] = truth.y1[c] = ds.y_obs[t];
    truth.y0[t] = truth.y0[c] = ds.y_obs[c];
    truth.ite_true[t] = truth.ite_true[c] = ds.y_obs[t] - ds.y_obs[c];
    pair[i] = i + n;
    pair[i + n] = i;
  }
  truth.pair_index = std::move(pair);
  ds.truth = std::move(truth);
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw ValidationError("CSV line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view field, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    parse_fail(line_no, "cannot parse '" + std::string(field) + "' in column " + column);
  }
  if (!std::isfinite(v)) parse_fail(line_no, "non-finite value in column " + column);
  return v;
}

long long parse_int(std::string_view field, std::size_t line_no, const std::string& column) {
  long long v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    parse_fail(line_no, "cannot parse integer '" + std::string(field) + "' in column " + column);
  }
  return v;
}

}  // namespace

std::string to_csv(const ObservationalDataset& ds) {
  ds.validate();
  std::ostringstream os;
  const auto d = ds.x.cols();
  for (Eigen::Index j = 0; j < d; ++j) os << 'x' << (j + 1) << ',';
  os << "w,y_obs";
  const bool has_truth = ds.truth.has_value();
  const bool has_pair = has_truth && ds.truth->pair_index.has_value();
  if (has_truth) os << ",y0,y1,ite_true,group";
  if (has_pair) os << ",pair_index";
  os << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < d; ++j) os << format_double(ds.x(ii, j)) << ',';
    os << ds.w[i] << ',' << format_double(ds.y_obs[ii]);
    if (has_truth) {
      const auto& t = *ds.truth;
      os << ',' << format_double(t.y0[ii]) << ',' << format_double(t.y1[ii]) << ','
         << format_double(t.ite_true[ii]) << ',' << t.group[i];
    }
    if (has_pair) os << ',' << (*ds.truth->pair_index)[i];
    os << '\n';
  }
  return os.str();
}

ObservationalDataset parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ValidationError("CSV has no rows");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_fields(line);

  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d + 1)) ++d;
  if (d == 0) parse_fail(1, "header must start with x1");
  auto expect = [&](std::size_t pos, const char* name) {
    return pos < header.size() && header[pos] == name;
  };
  if (!expect(d, "w") || !expect(d + 1, "y_obs")) parse_fail(1, "expected columns w,y_obs after covariates");
  bool has_truth = false;
  bool has_pair = false;
  std::size_t expected = d + 2;
  if (header.size() > d + 2) {
    if (!expect(d + 2, "y0") || !expect(d + 3, "y1") || !expect(d + 4, "ite_true") ||
        !expect(d + 5, "group")) {
      parse_fail(1, "ground-truth columns must be y0,y1,ite_true,group");
    }
    has_truth = true;
    expected = d + 6;
    if (header.size() > d + 6) {
      if (!expect(d + 6, "pair_index") || header.size() != d + 7) parse_fail(1, "unexpected columns after group");
      has_pair = true;
      expected = d + 7;
    }
  }

  std::vector<std::vector<double>> xs;
  std::vector<int> w;
  std::vector<double> y, y0, y1, ite;
  std::vector<int> group;
  IndexVector pair;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != expected) {
      parse_fail(line_no, "expected " + std::to_string(expected) + " fields, found " +
                              std::to_string(f.size()));
    }
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = parse_double(f[j], line_no, "x" + std::to_string(j + 1));
    xs.push_back(std::move(row));
    const auto wv = parse_int(f[d], line_no, "w");
    if (wv != 0 && wv != 1) parse_fail(line_no, "w must be 0 or 1, found " + std::to_string(wv));
    w.push_back(static_cast<int>(wv));
    y.push_back(parse_double(f[d + 1], line_no, "y_obs"));
    if (has_truth) {
      y0.push_back(parse_double(f[d + 2], line_no, "y0"));
      y1.push_back(parse_double(f[d + 3], line_no, "y1"));
      ite.push_back(parse_double(f[d + 4], line_no, "ite_true"));
      group.push_back(static_cast<int>(parse_int(f[d + 5], line_no, "group")));
    }
    if (has_pair) {
      const auto p = parse_int(f[d + 6], line_no, "pair_index");
      if (p < 0) parse_fail(line_no, "pair_index must be non-negative");
      pair.push_back(static_cast<std::size_t>(p));
    }
  }
  if (w.empty()) throw ValidationError("CSV has no rows");

  const auto n = static_cast<Eigen::Index>(w.size());
  ObservationalDataset ds;
  ds.x.resize(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) ds.x(i, static_cast<Eigen::Index>(j)) = xs[static_cast<std::size_t>(i)][j];
  }
  ds.w = std::move(w);
  ds.y_obs = Eigen::Map<Vector>(y.data(), n);
  if (has_truth) {
    GroundTruth t;
    t.y0 = Eigen::Map<Vector>(y0.data(), n);
    t.y1 = Eigen::Map<Vector>(y1.data(), n);
    t.ite_true = Eigen::Map<Vector>(ite.data(), n);
    t.group = std::move(group);
    if (has_pair) t.pair_index = std::move(pair);
    ds.truth = std::move(t);
  }
  ds.validate();
  return ds;
}

void save_csv(const ObservationalDataset& ds, const std::filesystem::path& path) {
  const auto text = to_csv(ds);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw ValidationError("failed writing " + path.string());
}

ObservationalDataset load_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace deepcausal
