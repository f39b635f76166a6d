#pragma once

// Dense complex-matrix kernel. Everything here is a pure function over
// Eigen values; no function keeps state between calls.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "petzlab/error.hpp"

namespace petzlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Relative cutoff below which eigenvalues of a PSD operator count as kernel.
inline constexpr double kRankCut = 1e-12;
/// Largest tolerated asymmetry of an operator that is meant to be Hermitian.
inline constexpr double kHermitianTol = 1e-10;
/// Most negative eigenvalue (relative to the spectral scale) still called PSD.
inline constexpr double kPsdTol = 1e-10;

/// Spectral decomposition H = V diag(values) V^dagger, values descending.
struct HermEig {
  RVector values;
  CMatrix vectors;
};

/// M = u diag(s) v^dagger with s descending.
struct Svd {
  CMatrix u;
  RVector s;
  CMatrix v;
};

namespace detail {

inline bool all_finite(const CMatrix& m) {
  return m.allFinite();
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_square(const CMatrix& m, const char* who) {
  if (m.rows() != m.cols()) {
    fail(ErrorKind::DimensionMismatch,
         std::string(who) + ": expected a square matrix, got " + std::to_string(m.rows()) + "x" +
             std::to_string(m.cols()));
  }
}

inline cplx trace(const CMatrix& m) {
  return m.trace();
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline CMatrix kron_all(std::span<const CMatrix> factors) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline CMatrix identity(Eigen::Index d) {
  return CMatrix::Identity(d, d);
}

/// Max-entry asymmetry ||H - H^dagger||_max.
inline double asymmetry(const CMatrix& h) {
  return max_abs(h - h.adjoint());
}

inline CMatrix hermitian_part(const CMatrix& h) {
  return (h + h.adjoint()) * 0.5;
}

inline CMatrix outer(const CVector& a, const CVector& b) {
  return a * b.adjoint();
}

/// Scaling used for relative tolerances: max(1, ||H||_max).
inline double tol_scale(const CMatrix& h) {
  return std::max(1.0, max_abs(h));
}

}  // namespace detail

/// Hermitian eigendecomposition with eigenvalues in descending order.
///
/// Inputs whose asymmetry stays below 1e-10 (relative to max(1, ||H||_max))
/// are symmetrized first; anything more asymmetric is rejected.
inline HermEig herm_eig(const CMatrix& h) {
  detail::require_square(h, "herm_eig");
  if (!detail::all_finite(h)) fail(ErrorKind::NonFinite, "herm_eig: input has NaN/Inf entries");
  const double asym = detail::asymmetry(h);
  if (asym > kHermitianTol * detail::tol_scale(h)) {
    fail(ErrorKind::NotHermitian, "herm_eig: asymmetry " + std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(detail::hermitian_part(h));
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NumericalBreakdown, "herm_eig: eigen solver did not converge");
  }
  const Eigen::Index n = h.rows();
  HermEig out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

/// Full singular value decomposition; both factors are square unitaries.
inline Svd svd(const CMatrix& m) {
  if (!detail::all_finite(m)) fail(ErrorKind::NonFinite, "svd: input has NaN/Inf entries");
  Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

/// Thin singular value decomposition (min(rows, cols) singular triplets).
inline Svd thin_svd(const CMatrix& m) {
  if (!detail::all_finite(m)) fail(ErrorKind::NonFinite, "thin_svd: input has NaN/Inf entries");
  Eigen::BDCSVD<CMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

/// Spectrum of a PSD operator after the PSD check, used by every support-power helper.
inline HermEig psd_eig(const CMatrix& p, const char* who = "psd_eig") {
  HermEig eig = herm_eig(p);
  if (eig.values.size() == 0) return eig;
  const double scale = std::max(1.0, eig.values(0));
  const double smallest = eig.values(eig.values.size() - 1);
  if (smallest < -kPsdTol * scale) {
    fail(ErrorKind::NotPsd, std::string(who) + ": minimum eigenvalue " + std::to_string(smallest));
  }
  return eig;
}

/// Number of eigenvalues strictly above rank_cut * lambda_max.
inline Eigen::Index support_size(const RVector& descending, double rank_cut = kRankCut) {
  if (descending.size() == 0 || descending(0) <= 0.0) return 0;
  const double cut = rank_cut * descending(0);
  Eigen::Index r = 0;
  while (r < descending.size() && descending(r) > cut) ++r;
  return r;
}

/// sum_k f(lambda_k) |v_k><v_k| over the support of a PSD operator.
template <class Fn>
CMatrix apply_on_support(const HermEig& eig, Fn&& fn, double rank_cut = kRankCut) {
  const Eigen::Index n = eig.vectors.rows();
  const Eigen::Index r = support_size(eig.values, rank_cut);
  CVector diag(r);
  for (Eigen::Index k = 0; k < r; ++k) diag(k) = fn(eig.values(k));
  const auto v = eig.vectors.leftCols(r);
  CMatrix out = CMatrix::Zero(n, n);
  if (r > 0) out.noalias() = v * diag.asDiagonal() * v.adjoint();
  return out;
}

/// P^z restricted to the support of P; the kernel maps to zero.
inline CMatrix matrix_power_on_support(const CMatrix& p, cplx z, double rank_cut = kRankCut) {
  const HermEig eig = psd_eig(p, "matrix_power_on_support");
  return apply_on_support(eig, [z](double lambda) { return std::pow(cplx(lambda, 0.0), z); },
                          rank_cut);
}

inline CMatrix matrix_power_on_support(const HermEig& eig, cplx z, double rank_cut = kRankCut) {
  return apply_on_support(eig, [z](double lambda) { return std::pow(cplx(lambda, 0.0), z); },
                          rank_cut);
}

/// Orthogonal projector onto the support of a PSD operator.
inline CMatrix support_projector(const CMatrix& p, double rank_cut = kRankCut) {
  const HermEig eig = psd_eig(p, "support_projector");
  return apply_on_support(eig, [](double) { return cplx(1.0, 0.0); }, rank_cut);
}

/// Which factor of a bipartite operator partial_trace keeps.
enum class Keep { First, Second };

/// Partial trace over an arbitrary set of tensor factors.
///
/// `dims` lists the factor dimensions in tensor order and `keep` the indices
/// of the factors that survive, in increasing order.
inline CMatrix partial_trace(const CMatrix& m, std::span<const std::size_t> dims,
                             std::span<const std::size_t> keep) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (static_cast<std::size_t>(m.rows()) != total || static_cast<std::size_t>(m.cols()) != total) {
    fail(ErrorKind::DimensionMismatch, "partial_trace: matrix size " + std::to_string(m.rows()) +
                                           " does not match product of dims " +
                                           std::to_string(total));
  }
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) fail(ErrorKind::DimensionMismatch, "partial_trace: keep index out of range");
    kept[k] = true;
  }
  std::size_t d_keep = 1;
  std::size_t d_trace = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) (kept[i] ? d_keep : d_trace) *= dims[i];

  // full index of (kept multi-index, traced multi-index)
  std::vector<Eigen::Index> full(d_keep * d_trace);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    std::size_t ki = 0, ti = 0, kstride = 1, tstride = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
      const std::size_t digit = rest % dims[f];
      rest /= dims[f];
      if (kept[f]) {
        ki += digit * kstride;
        kstride *= dims[f];
      } else {
        ti += digit * tstride;
        tstride *= dims[f];
      }
    }
    full[ki * d_trace + ti] = static_cast<Eigen::Index>(idx);
  }

  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(d_keep), static_cast<Eigen::Index>(d_keep));
  for (std::size_t i = 0; i < d_keep; ++i) {
    for (std::size_t j = 0; j < d_keep; ++j) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < d_trace; ++t) acc += m(full[i * d_trace + t], full[j * d_trace + t]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return out;
}

/// Partial trace of an operator on A (x) B, keeping one of the two factors.
inline CMatrix partial_trace(const CMatrix& m, std::size_t d_a, std::size_t d_b, Keep keep) {
  const std::size_t dims[2] = {d_a, d_b};
  const std::size_t kept[1] = {keep == Keep::First ? std::size_t{0} : std::size_t{1}};
  return partial_trace(m, dims, kept);
}

/// Schatten p-norm (quasi-norm for 0 < p < 1) from the singular values.
inline double schatten_norm(const CMatrix& m, double p) {
  if (!(p > 0.0)) fail(ErrorKind::InvalidOrder, "schatten_norm: order must be positive");
  if (m.size() == 0) return 0.0;
  const RVector s = thin_svd(m).s;
  if (p == 2.0) return s.norm();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 0.0) acc += std::pow(s(i), p);
  }
  return std::pow(acc, 1.0 / p);
}

namespace detail {

inline void require_state(const CMatrix& rho, const char* who) {
  require_square(rho, who);
  const double asym = asymmetry(rho);
  if (asym > kHermitianTol * tol_scale(rho)) {
    fail(ErrorKind::NotState, std::string(who) + ": operator is not Hermitian");
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    fail(ErrorKind::NotState, std::string(who) + ": trace " + std::to_string(tr));
  }
  const double smallest = herm_eig(rho).values.tail(1)(0);
  if (smallest < -1e-10) {
    fail(ErrorKind::NotState, std::string(who) + ": minimum eigenvalue " + std::to_string(smallest));
  }
}

}  // namespace detail

/// Uhlmann fidelity ||rho^{1/2} sigma^{1/2}||_1 (not squared).
inline double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    fail(ErrorKind::DimensionMismatch, "fidelity: operand dimensions differ");
  }
  detail::require_state(rho, "fidelity");
  detail::require_state(sigma, "fidelity");
  const CMatrix a = matrix_power_on_support(rho, 0.5);
  const CMatrix b = matrix_power_on_support(sigma, 0.5);
  return std::min(1.0, schatten_norm(a * b, 1.0));
}

}  // namespace petzlab
