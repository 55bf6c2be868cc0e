#pragma once

// SVD entropy ("information quantity") of grayscale matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "artmetrics/error.hpp"
#include "artmetrics/image_io.hpp"

namespace artmetrics {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SingularSpectrum {
  std::vector<double> sigma;      // nonincreasing, length min(m,n)
  std::vector<double> sigma_bar;  // sigma / sum(sigma); all zeros when all_zero
  bool all_zero = false;

  std::size_t size() const { return sigma.size(); }
};

inline Eigen::Map<const RowMajorMatrix> as_eigen(const GrayMatrix& m) {
  return {m.values.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols)};
}

inline GrayMatrix from_eigen(const Eigen::MatrixXd& a) {
  GrayMatrix m(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()));
  Eigen::Map<RowMajorMatrix>(m.values.data(), a.rows(), a.cols()) = a;
  return m;
}

namespace detail {

inline void require_finite(const GrayMatrix& m) {
  if (m.rows == 0 || m.cols == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");
  for (double v : m.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "matrix has NaN or Inf entries");
  }
}

// Values below max(m,n) * eps * sigma_1 are rounding noise of the decomposition
// (a constant 400x400 matrix leaves ~1e-16 relative residue in 399 slots), so they
// count as exact zeros.
inline SingularSpectrum make_spectrum(const Eigen::VectorXd& raw, std::size_t rows, std::size_t cols) {
  SingularSpectrum s;
  s.sigma.assign(raw.data(), raw.data() + raw.size());
  for (double& v : s.sigma) v = std::max(v, 0.0);
  std::sort(s.sigma.begin(), s.sigma.end(), std::greater<>());
  if (!s.sigma.empty()) {
    const double tol = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * s.sigma[0];
    for (double& v : s.sigma) {
      if (v <= tol) v = 0.0;
    }
  }
  const double total = std::accumulate(s.sigma.begin(), s.sigma.end(), 0.0);
  s.sigma_bar.assign(s.sigma.size(), 0.0);
  if (total <= 0.0) {
    s.all_zero = true;
    return s;
  }
  std::transform(s.sigma.begin(), s.sigma.end(), s.sigma_bar.begin(),
                 [total](double v) { return v / total; });
  return s;
}

}  // namespace detail

inline SingularSpectrum singular_values(const GrayMatrix& m) {
  detail::require_finite(m);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(m));
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::DecompositionFailure, "SVD did not converge");
  }
  return detail::make_spectrum(svd.singularValues(), m.rows, m.cols);
}

/// Shannon entropy in bits of a probability vector, with 0 log 0 = 0.
inline double shannon_bits(const std::vector<double>& probs) {
  double e = 0.0;
  for (double p : probs) {
    if (p > 0.0) e -= p * std::log2(p);
  }
  return std::max(e, 0.0);
}

inline double spectrum_entropy(const SingularSpectrum& s) {
  if (s.all_zero) return 0.0;
  const double cap = std::log2(static_cast<double>(s.size()));
  return std::min(shannon_bits(s.sigma_bar), cap);
}

/// Entropy (bits) of the sum-normalized singular values; 0 for the zero matrix.
inline double svd_entropy(const GrayMatrix& m) { return spectrum_entropy(singular_values(m)); }

/// Best rank-r approximation sum_{i<=r} sigma_i u_i v_i^T. Values are not clamped.
inline Eigen::MatrixXd truncated_reconstruction(const GrayMatrix& m, std::size_t rank) {
  detail::require_finite(m);
  const std::size_t p = std::min(m.rows, m.cols);
  if (rank < 1 || rank > p) {
    throw Error(ErrorCode::RankOutOfRange,
                "rank " + std::to_string(rank) + " outside [1, " + std::to_string(p) + "]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(as_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::DecompositionFailure, "SVD did not converge");
  }
  const auto r = static_cast<Eigen::Index>(rank);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

}  // namespace artmetrics
