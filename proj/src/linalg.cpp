#include "deepcausal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deepcausal {

void normalize_column_signs(Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      // Strictly greater keeps the first index on magnitude ties.
      if (std::abs(m(r, c)) > best + 1e-15 * best) {
        best = std::abs(m(r, c));
        arg = r;
      }
    }
    if (m(arg, c) < 0.0) m.col(c) = -m.col(c);
  }
}

void canonicalize_eigenpairs(SymmetricEigen& e) {
  normalize_column_signs(e.vectors);
  const auto n = e.values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    const double dl = e.values[l];
    const double dr = e.values[r];
    if (std::abs(dl - dr) > 1e-12 * scale) return dl < dr;
    for (Eigen::Index k = 0; k < e.vectors.rows(); ++k) {
      const double vl = e.vectors(k, l);
      const double vr = e.vectors(k, r);
      if (vl != vr) return vl > vr;
    }
    return false;
  });
  Vector values(n);
  Matrix vectors(e.vectors.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    values[j] = e.values[order[static_cast<std::size_t>(j)]];
    vectors.col(j) = e.vectors.col(order[static_cast<std::size_t>(j)]);
  }
  e.values = std::move(values);
  e.vectors = std::move(vectors);
}

SymmetricEigen jacobi_eigen(const Matrix& input, double tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw ValidationError("jacobi_eigen needs a square matrix");
  if (!input.allFinite()) throw ValidationError("jacobi_eigen: matrix has non-finite entries");
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, input.cwiseAbs().maxCoeff())) {
    throw ValidationError("jacobi_eigen needs a symmetric matrix");
  }
  const auto n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double threshold = tol * std::max(1.0, a.norm());

  auto off_norm = [&]() {
    double s = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
      for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
    }
    return std::sqrt(s);
  };

  SymmetricEigen out;
  while (off_norm() >= threshold) {
    if (out.sweeps >= max_sweeps) {
      throw NumericalError("jacobi_eigen did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    ++out.sweeps;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  out.values = a.diagonal();
  out.vectors = std::move(v);
  canonicalize_eigenpairs(out);
  return out;
}

namespace {

inline void rotate_columns(double* __restrict x, double* __restrict y, Eigen::Index n, double c, double s) {
  for (Eigen::Index k = 0; k < n; ++k) {
    const double xk = x[k];
    const double yk = y[k];
    x[k] = c * xk - s * yk;
    y[k] = s * xk + c * yk;
  }
}

}  // namespace

SymmetricEigen gram_eigen_jacobi(Matrix b, double tol, int max_sweeps) {
  if (!b.allFinite()) throw ValidationError("gram_eigen_jacobi: matrix has non-finite entries");
  const auto rows = b.rows();
  const auto n = b.cols();
  Matrix v = Matrix::Identity(n, n);
  Vector norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms[j] = b.col(j).squaredNorm();

  SymmetricEigen out;
  bool rotated = true;
  while (rotated) {
    if (out.sweeps >= max_sweeps) {
      throw NumericalError("gram_eigen_jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    ++out.sweeps;
    rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      double* bp = b.col(p).data();
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double* bq = b.col(q).data();
        const double gamma = b.col(p).dot(b.col(q));
        const double alpha = norms[p];
        const double beta = norms[q];
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_columns(bp, bq, rows, c, s);
        rotate_columns(v.col(p).data(), v.col(q).data(), n, c, s);
        norms[p] = alpha - t * gamma;
        norms[q] = beta + t * gamma;
      }
    }
    // Refresh to stop drift in the updated norms.
    for (Eigen::Index j = 0; j < n; ++j) norms[j] = b.col(j).squaredNorm();
  }
  out.values = norms;
  out.vectors = std::move(v);
  canonicalize_eigenpairs(out);
  return out;
}

}  // namespace deepcausal
