#pragma once

// Entropies, Renyi divergences and the mutual-information variants that
// govern decoder fidelities. All logarithms are base 2. Second arguments of
// divergences may be any PSD operator, not only states.

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "petzlab/error.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

struct PositiveInfinity {
  friend bool operator==(PositiveInfinity, PositiveInfinity) { return true; }
};

using ExtendedReal = std::variant<double, PositiveInfinity>;

/// Which support clause decided the value.
enum class SupportCondition {
  Absolutely,     // supp rho inside supp sigma
  NotOrthogonal,  // alpha < 1 and supports overlap, though not nested
  Orthogonal,     // alpha < 1, supports orthogonal: +inf
  KernelViolation,  // supp rho leaves supp sigma where that is required: +inf
};

struct DivergenceResult {
  ExtendedReal value;
  SupportCondition support_condition;

  bool is_infinite() const { return std::holds_alternative<PositiveInfinity>(value); }

  /// Finite value, or SupportViolation.
  double finite() const {
    if (is_infinite()) fail(ErrorKind::SupportViolation, "divergence is +infinity");
    return std::get<double>(value);
  }
};

/// Weight of rho outside the support of sigma tolerated as numerical leakage.
inline constexpr double kSupportLeakTol = 1e-9;

namespace detail {

inline double log2(double x) { return std::log2(x); }

// tr[(1 - Pi_sigma) rho]
inline double leakage(const CMatrix& rho, const HermEig& sigma) {
  const Eigen::Index r = support_size(sigma.values);
  const CMatrix v = sigma.vectors.leftCols(r);
  return std::max(0.0, rho.trace().real() - (v.adjoint() * rho * v).trace().real());
}

// ||Pi_rho Pi_sigma||_F^2
inline double overlap(const HermEig& rho, const HermEig& sigma) {
  const CMatrix a = rho.vectors.leftCols(support_size(rho.values));
  const CMatrix b = sigma.vectors.leftCols(support_size(sigma.values));
  return (a.adjoint() * b).squaredNorm();
}

inline void require_bipartite(const DensityOperator& s, const char* who) {
  if (s.layout().size() != 2) {
    fail(ErrorKind::DimensionMismatch, std::string(who) + ": expected a bipartite state");
  }
}

inline void require_same_dim(const CMatrix& rho, const CMatrix& sigma, const char* who) {
  if (rho.rows() != sigma.rows() || sigma.rows() != sigma.cols()) {
    fail(ErrorKind::DimensionMismatch, std::string(who) + ": operand dimensions differ");
  }
}

// Eigenvalues of a PSD matrix, clipped at zero.
inline RVector psd_values(const CMatrix& m) {
  return herm_eig(detail::hermitian_part(m)).values.cwiseMax(0.0);
}

}  // namespace detail

enum class EntropyKind { VonNeumann, Renyi };

inline double entropy(const CMatrix& rho, EntropyKind kind = EntropyKind::VonNeumann, double alpha = 1.0) {
  const RVector lam = psd_eig(rho, "entropy").values.cwiseMax(0.0);
  if (kind == EntropyKind::VonNeumann) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      if (lam(i) > 0.0) h -= lam(i) * detail::log2(lam(i));
    }
    return h;
  }
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    fail(ErrorKind::InvalidOrder, "Renyi entropy order must lie in (0,1) or (1,inf)");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < support_size(lam); ++i) s += std::pow(lam(i), alpha);
  return detail::log2(s) / (1.0 - alpha);
}

inline double entropy(const DensityOperator& rho, EntropyKind kind = EntropyKind::VonNeumann, double alpha = 1.0) {
  return entropy(rho.matrix(), kind, alpha);
}

enum class DerivedEntropy { Conditional, Mutual, Coherent };

/// H(A|B), I(A:B) or I(A>B) = -H(A|B) of a bipartite state; `a_label` names A.
inline double entropy_derived(const DensityOperator& rho_ab, DerivedEntropy kind, const std::string& a_label) {
  detail::require_bipartite(rho_ab, "entropy_derived");
  const std::size_t ia = rho_ab.layout().index_of(a_label);
  const std::string b_label = rho_ab.layout()[1 - ia].label;
  const double h_ab = entropy(rho_ab);
  const double h_b = entropy(rho_ab.reduce({b_label}));
  switch (kind) {
    case DerivedEntropy::Conditional: return h_ab - h_b;
    case DerivedEntropy::Coherent: return h_b - h_ab;
    case DerivedEntropy::Mutual: return entropy(rho_ab.reduce({a_label})) + h_b - h_ab;
  }
  return 0.0;
}

/// D(rho||sigma) = tr[rho (log rho - log sigma)], +inf unless supp rho in supp sigma.
inline DivergenceResult relative_entropy(const CMatrix& rho, const CMatrix& sigma) {
  detail::require_same_dim(rho, sigma, "relative_entropy");
  const HermEig es = psd_eig(sigma, "relative_entropy");
  if (detail::leakage(rho, es) > kSupportLeakTol) {
    return {PositiveInfinity{}, SupportCondition::KernelViolation};
  }
  const double neg_h = -entropy(rho);
  const CMatrix log_sigma = apply_on_support(es, [](double x) { return cplx(detail::log2(x), 0.0); });
  const double cross = (rho * log_sigma).trace().real();
  return {neg_h - cross, SupportCondition::Absolutely};
}

namespace detail {

inline void check_order(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidOrder, "divergence order must be >= 0");
}

// Support clauses shared by both Renyi families.
inline SupportCondition renyi_support(const CMatrix& rho, const HermEig& er, const HermEig& es, double alpha) {
  if (leakage(rho, es) <= kSupportLeakTol) return SupportCondition::Absolutely;
  if (alpha < 1.0) {
    return overlap(er, es) > 1e-10 ? SupportCondition::NotOrthogonal : SupportCondition::Orthogonal;
  }
  return SupportCondition::KernelViolation;
}

}  // namespace detail

/// Petz Renyi divergence (1/(alpha-1)) log tr[rho^alpha sigma^(1-alpha)].
inline DivergenceResult petz_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha) {
  detail::check_order(alpha);
  if (alpha == 1.0) return relative_entropy(rho, sigma);
  detail::require_same_dim(rho, sigma, "petz_divergence");
  const HermEig er = psd_eig(rho, "petz_divergence");
  const HermEig es = psd_eig(sigma, "petz_divergence");
  const SupportCondition cond = detail::renyi_support(rho, er, es, alpha);
  if (cond == SupportCondition::Orthogonal || cond == SupportCondition::KernelViolation) {
    return {PositiveInfinity{}, cond};
  }
  const CMatrix ra = alpha == 0.0 ? support_projector(rho) : matrix_power_on_support(er, alpha);
  const CMatrix sb = matrix_power_on_support(es, 1.0 - alpha);
  const double q = (ra * sb).trace().real();
  if (!(q > 0.0)) return {PositiveInfinity{}, SupportCondition::Orthogonal};
  return {detail::log2(q) / (alpha - 1.0), cond};
}

/// Sandwiched Renyi divergence (1/(alpha-1)) log ||sigma^g rho sigma^g||_alpha^alpha, g = (1-alpha)/(2 alpha).
inline DivergenceResult sandwiched_divergence(const CMatrix& rho, const CMatrix& sigma, double alpha) {
  detail::check_order(alpha);
  if (alpha == 0.0) fail(ErrorKind::InvalidOrder, "sandwiched divergence needs alpha > 0");
  if (alpha == 1.0) return relative_entropy(rho, sigma);
  detail::require_same_dim(rho, sigma, "sandwiched_divergence");
  const HermEig er = psd_eig(rho, "sandwiched_divergence");
  const HermEig es = psd_eig(sigma, "sandwiched_divergence");
  const SupportCondition cond = detail::renyi_support(rho, er, es, alpha);
  if (cond == SupportCondition::Orthogonal || cond == SupportCondition::KernelViolation) {
    return {PositiveInfinity{}, cond};
  }
  const CMatrix sg = matrix_power_on_support(es, (1.0 - alpha) / (2.0 * alpha));
  // fractional powers of roundoff-level eigenvalues are not small, so cut them
  const RVector lam = detail::psd_values(sg * rho * sg);
  const Eigen::Index r = support_size(lam);
  double q = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) q += std::pow(lam(i), alpha);
  if (!(q > 0.0)) return {PositiveInfinity{}, SupportCondition::Orthogonal};
  return {detail::log2(q) / (alpha - 1.0), cond};
}

namespace detail {

// (1_R (x) X) applied as kron with identity on the second factor.
inline CMatrix on_first(const CMatrix& x, std::size_t d_second) {
  return kron(x, CMatrix::Identity(static_cast<Eigen::Index>(d_second), static_cast<Eigen::Index>(d_second)));
}
inline CMatrix on_second(std::size_t d_first, const CMatrix& x) {
  return kron(CMatrix::Identity(static_cast<Eigen::Index>(d_first), static_cast<Eigen::Index>(d_first)), x);
}

inline void require_support_in(const CMatrix& sigma_rb, const CMatrix& w_r, std::size_t d_b, const char* who) {
  const CMatrix proj = on_first(support_projector(w_r), d_b);
  const double leak = sigma_rb.trace().real() - (proj * sigma_rb).trace().real();
  if (leak > kSupportLeakTol) {
    fail(ErrorKind::SupportViolation, std::string(who) + ": sigma_RB leaves supp(W_R) (x) 1 by " + std::to_string(leak));
  }
}

}  // namespace detail

/// inf over states tau_B of D_2(sigma_RB || W_R (x) tau_B).
///
/// With Y = tr_R[(W^{-1/2} (x) 1) sigma^2 (W^{-1/2} (x) 1)] the objective is
/// log tr[Y tau^{-1}], minimized at tau = sqrt(Y)/tr sqrt(Y).
inline double min_petz_mi_order2(const DensityOperator& sigma_rb, const CMatrix& w_r) {
  detail::require_bipartite(sigma_rb, "min_petz_mi_order2");
  const std::size_t d_r = sigma_rb.layout()[0].dim;
  const std::size_t d_b = sigma_rb.layout()[1].dim;
  if (static_cast<std::size_t>(w_r.rows()) != d_r) fail(ErrorKind::DimensionMismatch, "W_R must act on R");
  const CMatrix& s = sigma_rb.matrix();
  detail::require_support_in(s, w_r, d_b, "min_petz_mi_order2");
  const CMatrix wm = detail::on_first(matrix_power_on_support(w_r, -0.5), d_b);
  const CMatrix y = partial_trace(wm * s * s * wm, d_r, d_b, Keep::Second);
  const RVector lam = detail::psd_values(y);
  const double tr_sqrt = lam.head(support_size(lam)).cwiseSqrt().sum();
  return 2.0 * detail::log2(tr_sqrt);
}

/// Z = tr_R[(sigma_R^{1/2} (x) 1) sigma_RE^{1/2}], PSD by cyclicity in R.
inline CMatrix singly_min_half_kernel(const DensityOperator& sigma_re) {
  const std::size_t d_r = sigma_re.layout()[0].dim;
  const std::size_t d_e = sigma_re.layout()[1].dim;
  const CMatrix sr = partial_trace(sigma_re.matrix(), d_r, d_e, Keep::First);
  const CMatrix prod = detail::on_first(matrix_power_on_support(sr, 0.5), d_e) * matrix_power_on_support(sigma_re.matrix(), 0.5);
  return detail::hermitian_part(partial_trace(prod, d_r, d_e, Keep::Second));
}

/// inf over tau_E of D_{1/2}(sigma_RE || sigma_R (x) tau_E) = -log tr[Z^2].
inline double singly_min_petz_mi_half(const DensityOperator& sigma_re) {
  detail::require_bipartite(sigma_re, "singly_min_petz_mi_half");
  const CMatrix z = singly_min_half_kernel(sigma_re);
  return -detail::log2(z.squaredNorm());
}

/// D~_2(sigma_RB || W_R (x) sigma_B).
inline double sandwiched_mi_up(const DensityOperator& sigma_rb, const CMatrix& w_r) {
  detail::require_bipartite(sigma_rb, "sandwiched_mi_up");
  const std::size_t d_r = sigma_rb.layout()[0].dim;
  const std::size_t d_b = sigma_rb.layout()[1].dim;
  if (static_cast<std::size_t>(w_r.rows()) != d_r) fail(ErrorKind::DimensionMismatch, "W_R must act on R");
  const CMatrix sb = partial_trace(sigma_rb.matrix(), d_r, d_b, Keep::Second);
  const DivergenceResult d = sandwiched_divergence(sigma_rb.matrix(), detail::kron(w_r, sb), 2.0);
  if (d.is_infinite()) fail(ErrorKind::SupportViolation, "sandwiched_mi_up: sigma_RB not supported on W_R (x) sigma_B");
  return d.finite();
}

/// D~_{1/2}(sigma_RE || sigma_R (x) sigma_E) = -2 log F(sigma_RE, sigma_R (x) sigma_E).
inline double sandwiched_mi_upup_half(const DensityOperator& sigma_re) {
  detail::require_bipartite(sigma_re, "sandwiched_mi_upup_half");
  const std::size_t d_r = sigma_re.layout()[0].dim;
  const std::size_t d_e = sigma_re.layout()[1].dim;
  const CMatrix& s = sigma_re.matrix();
  const CMatrix prod = detail::kron(partial_trace(s, d_r, d_e, Keep::First), partial_trace(s, d_r, d_e, Keep::Second));
  return -2.0 * detail::log2(fidelity(s, prod));
}

/// eps^SW = -D(sigma_RB || sigma_R^{-1} (x) sigma_B).
inline double epsilon_sw(const DensityOperator& sigma_rb) {
  detail::require_bipartite(sigma_rb, "epsilon_sw");
  const std::size_t d_r = sigma_rb.layout()[0].dim;
  const std::size_t d_b = sigma_rb.layout()[1].dim;
  const CMatrix& s = sigma_rb.matrix();
  const CMatrix sr_inv = matrix_power_on_support(partial_trace(s, d_r, d_b, Keep::First), -1.0);
  const DivergenceResult d = relative_entropy(s, detail::kron(sr_inv, partial_trace(s, d_r, d_b, Keep::Second)));
  return -d.finite();
}

/// 1 - sqrt(ln2/2 * eps). Inputs in [-1e-12, 0) are roundoff and read as 0.
inline double sw_original_bound(double eps) {
  if (!std::isfinite(eps)) fail(ErrorKind::InvalidParameter, "sw_original_bound: eps must be finite");
  if (eps < -1e-12) fail(ErrorKind::NegativeEpsilon, "sw_original_bound: eps = " + std::to_string(eps));
  return 1.0 - std::sqrt(std::numbers::ln2 / 2.0 * std::max(0.0, eps));
}

/// sigma_R^{-1} on its support, the reference weight used throughout.
inline CMatrix inverse_marginal_r(const DensityOperator& sigma_rb) {
  detail::require_bipartite(sigma_rb, "inverse_marginal_r");
  const std::size_t d_r = sigma_rb.layout()[0].dim;
  const std::size_t d_b = sigma_rb.layout()[1].dim;
  return matrix_power_on_support(partial_trace(sigma_rb.matrix(), d_r, d_b, Keep::First), -1.0);
}

}  // namespace petzlab
