#pragma once

// Schumacher-Westmoreland decoder.
//
// Systems: R (dim d = rank rho), A, B, E = A B' and the primed copy
// R'E' = R' A' B of dimension n = d * d_A * d_B, indexed (r', a', b). The
// basis phi_kl = |k>_R' (x) |e_l>_E' is T = 1_d (x) E_b, where the columns of
// E_b are the eigenvectors of sigma_E; E' reuses their coefficients under the
// (a, b') <-> (a', b) identification.
//
// Everything the decoder needs is low rank, so U and W are stored as
// completed isometries rather than dense n x n unitaries:
//   S[b, (r,e)] = <r,b,e|sigma>,  S = Us Sig Vs^dagger (thin)
//   sigma_RE^{1/2} = conj(Vs) Sig Vs^T,  G = T^T Vs
//   W maps P_B Us -> T G (P_B: first d_B columns, i.e. |0>_{R'A'})
//   M in the T basis = (G Sig)(D G)^dagger, D = diag sqrt(lambda_k mu_l)
//   U in the T basis maps the left singular vectors of M onto the right ones.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "petzlab/decoders.hpp"
#include "petzlab/error.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

/// Unitary Q with Q * in = out for isometries in, out (n x r), completed on
/// the orthogonal complements by Householder bases.
class CompletedUnitary {
 public:
  CompletedUnitary() = default;
  CompletedUnitary(const CMatrix& in, const CMatrix& out) : qin_(in), qout_(out) {
    if (in.rows() != out.rows() || in.cols() != out.cols()) {
      fail(ErrorKind::DimensionMismatch, "CompletedUnitary: isometry shapes differ");
    }
    const Eigen::Index r = in.cols();
    const CMatrix rin = qin_.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
    const CMatrix rout = qout_.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>();
    core_ = rout * rin.adjoint();
  }

  Eigen::Index dim() const { return qin_.rows(); }

  /// Q * Y without forming Q.
  CMatrix apply(const CMatrix& y) const {
    CMatrix z = qin_.householderQ().adjoint() * y;
    const Eigen::Index r = core_.rows();
    z.topRows(r) = (core_ * z.topRows(r)).eval();
    return qout_.householderQ() * z;
  }

  /// Q^dagger * Y.
  CMatrix apply_adjoint(const CMatrix& y) const {
    CMatrix z = qout_.householderQ().adjoint() * y;
    const Eigen::Index r = core_.rows();
    z.topRows(r) = (core_.adjoint() * z.topRows(r)).eval();
    return qin_.householderQ() * z;
  }

  /// Dense matrix; O(n^2) memory, meant for small instances and tests.
  CMatrix dense() const { return apply(CMatrix::Identity(dim(), dim())); }

 private:
  Eigen::HouseholderQR<CMatrix> qin_;
  Eigen::HouseholderQR<CMatrix> qout_;
  CMatrix core_;
};

struct SwConstruction {
  // Schmidt data of |rho>_RA: R uses the computational basis, A the columns of a_basis
  RVector lambda;
  CMatrix a_basis;
  StinespringIsometry dilation;
  // sigma_E = sum_l mu_l |e_l><e_l|, e_l the columns of e_basis (mu descending)
  RVector mu;
  CMatrix e_basis;
  // factors of |sigma>_RBE
  CMatrix us;
  RVector sig;
  CMatrix vs;
  CMatrix g;
  // M in the T basis as m_left * m_right^dagger, and its singular values
  CMatrix m_left;
  CMatrix m_right;
  RVector m_singular;
  CompletedUnitary u_t;  // U in the T basis
  CompletedUnitary w;    // W in the (r', a', b) basis
  std::vector<CMatrix> kraus;
  double alignment_residual = 0.0;
  double trace_mu_gap = 0.0;  // |tr[M U] - sum s_i|

  std::size_t d_r() const { return static_cast<std::size_t>(lambda.size()); }
  std::size_t d_e() const { return dilation.d_e; }
  std::size_t n() const { return d_r() * dilation.d_e; }

  /// T * Y and T^T * Y, T = 1_d (x) E_b.
  CMatrix t_apply(const CMatrix& y) const { return block_apply(e_basis, y); }
  CMatrix tt_apply(const CMatrix& y) const { return block_apply(e_basis.transpose(), y); }
  CMatrix t_dense() const { return detail::kron(CMatrix::Identity(lambda.size(), lambda.size()), e_basis); }

  /// U and W as dense matrices in the computational (r', a', b) basis.
  CMatrix u_dense() const { return t_dense() * u_t.dense() * t_dense().adjoint(); }
  CMatrix w_dense() const { return w.dense(); }

 private:
  CMatrix block_apply(const CMatrix& blk, const CMatrix& y) const {
    const Eigen::Index de = blk.rows();
    CMatrix out(y.rows(), y.cols());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) out.middleRows(k * de, de).noalias() = blk * y.middleRows(k * de, de);
    return out;
  }
};

namespace detail {

// Columns of `cols` followed by an orthonormal basis of their complement.
inline CMatrix complete_basis(const CMatrix& cols) {
  const Eigen::Index n = cols.rows();
  const Eigen::Index r = cols.cols();
  Eigen::HouseholderQR<CMatrix> qr(cols);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  q.leftCols(r) = cols;
  return q;
}

// Orthonormal basis of the column space of a (n x r) plus the r x r factor: a = q * rfac.
inline void thin_qr(const CMatrix& a, CMatrix& q, CMatrix& rfac) {
  Eigen::HouseholderQR<CMatrix> qr(a);
  q = qr.householderQ() * CMatrix::Identity(a.rows(), a.cols());
  rfac = qr.matrixQR().topLeftCorner(a.cols(), a.cols()).triangularView<Eigen::Upper>();
}

}  // namespace detail

struct SwDecoder {
  Decoder decoder;
  SwConstruction construction;
};

inline constexpr double kAlignmentTol = 1e-8;

inline SwDecoder build_sw(const DensityOperator& rho_a, const KrausChannel& n) {
  if (n.d_in() != rho_a.dim()) fail(ErrorKind::DimensionMismatch, "build_sw: channel input differs from source");
  SwConstruction c;
  const PurifiedSource src = purify(rho_a);
  c.lambda = src.schmidt_coeffs;
  c.a_basis = src.a_basis;
  c.dilation = stinespring_dilation(n);
  const Eigen::Index d = static_cast<Eigen::Index>(src.d_r());
  const Eigen::Index d_a = static_cast<Eigen::Index>(n.d_in());
  const Eigen::Index d_b = static_cast<Eigen::Index>(n.d_out());
  const Eigen::Index d_e = static_cast<Eigen::Index>(c.dilation.d_e);
  const Eigen::Index dim = d * d_e;

  // |sigma>_RBE = (1 (x) V)|rho>, stored as S[b, (r, e)] and as C[(r, b), e]
  const CVector sigma = purified_output(src, c.dilation);
  CMatrix s(d_b, dim);
  CMatrix coeff_e(d * d_b, d_e);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index b = 0; b < d_b; ++b) {
      for (Eigen::Index e = 0; e < d_e; ++e) {
        const cplx v = sigma((r * d_b + b) * d_e + e);
        s(b, r * d_e + e) = v;
        coeff_e(r * d_b + b, e) = v;
      }
    }
  }

  // sigma_E = C^T conj(C): eigenvectors conj(Vc), eigenvalues Sc^2
  {
    const Svd sv = thin_svd(coeff_e);
    const Eigen::Index k = sv.s.size();
    c.e_basis = detail::complete_basis(sv.v.conjugate());
    c.mu = RVector::Zero(d_e);
    c.mu.head(k) = sv.s.cwiseAbs2();
  }

  {
    const Svd sv = thin_svd(s);
    c.us = sv.u;
    c.sig = sv.s;
    c.vs = sv.v;
  }
  c.g = c.tt_apply(c.vs);

  // W: P_B Us -> T G
  CMatrix pb_us = CMatrix::Zero(dim, c.us.cols());
  pb_us.topRows(d_b) = c.us;
  const CMatrix tg = c.t_apply(c.g);
  c.w = CompletedUnitary(pb_us, tg);
  c.alignment_residual = ((c.w.apply(pb_us) - tg) * c.sig.cast<cplx>().asDiagonal()).norm();
  if (!(c.alignment_residual <= kAlignmentTol)) {
    fail(ErrorKind::AlignmentFailure, "build_sw: purification alignment residual " + std::to_string(c.alignment_residual));
  }

  // M in the T basis, low rank: (G Sig)(D G)^dagger
  RVector dvec(dim);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = 0; l < d_e; ++l) dvec(k * d_e + l) = std::sqrt(std::max(0.0, c.lambda(k) * c.mu(l)));
  }
  c.m_left = c.g * c.sig.cast<cplx>().asDiagonal();
  c.m_right = dvec.cast<cplx>().asDiagonal() * c.g;
  CMatrix ql, rl, qr, rr;
  detail::thin_qr(c.m_left, ql, rl);
  detail::thin_qr(c.m_right, qr, rr);
  const Svd core = svd(rl * rr.adjoint());
  c.m_singular = core.s;
  const CMatrix left_vecs = ql * core.u;
  const CMatrix right_vecs = qr * core.v;
  c.u_t = CompletedUnitary(left_vecs, right_vecs);

  // guard: tr[M U] = sum of singular values
  const cplx tr_mu = (c.m_right.adjoint() * c.u_t.apply(c.m_left)).trace();
  c.trace_mu_gap = std::abs(tr_mu - cplx(c.m_singular.sum(), 0.0));
  if (c.trace_mu_gap > 1e-9 * std::max(1.0, c.m_singular.sum())) {
    fail(ErrorKind::AlignmentFailure, "build_sw: tr[MU] deviates from ||M||_1 by " + std::to_string(c.trace_mu_gap));
  }

  // K_l P_B = sum_k |a_k> <phi_kl| U W P_B, and T^dagger W P_B = G Us^dagger
  const CMatrix z = c.u_t.apply(c.g * c.us.adjoint());
  c.kraus.reserve(static_cast<std::size_t>(d_e));
  const CMatrix a_cols = c.a_basis.leftCols(d);
  for (Eigen::Index l = 0; l < d_e; ++l) {
    CMatrix rows(d, d_b);
    for (Eigen::Index k = 0; k < d; ++k) rows.row(k) = z.row(k * d_e + l);
    c.kraus.push_back(a_cols * rows);
  }
  (void)d_a;
  Decoder dec{KrausChannel(c.kraus, {"B", n.d_out()}, {"A", n.d_in()}), DecoderKind::Sw, 0.0};
  validate_cptp(dec.channel, 1e-9);
  return {std::move(dec), std::move(c)};
}

}  // namespace petzlab
