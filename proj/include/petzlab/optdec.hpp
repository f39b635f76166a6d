#pragma once

// Optimal decoder fidelity as a semidefinite program over decoder Choi
// matrices, solved by a dense primal-dual interior-point method.
//
// Variable X on B (x) A (decoder input first, same convention as
// choi_of_channel). Primal: max tr[G X] s.t. tr_A X = 1_B, X >= 0.
// Dual: min tr Y s.t. Y (x) 1_A - G >= 0.
//
// Internally the solver works with the minimization form min <C, X>, C = -G,
// dual multiplier y = -Y and slack Z = C - y (x) 1.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "petzlab/decoders.hpp"
#include "petzlab/error.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

struct SdpProblem {
  CMatrix objective;  // G, Hermitian on B (x) A
  std::size_t d_b = 0;
  std::size_t d_a = 0;

  std::size_t dim() const { return d_b * d_a; }
};

struct SdpSolution {
  CMatrix x;  // optimal Choi matrix
  CMatrix y;  // dual variable, Y (x) 1 >= G
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;  // ||tr_A X - 1||_F
  double dual_residual = 0.0;    // ||Z - (Y (x) 1 - G)||_F
  int iterations = 0;
};

/// G = sum_j |w_j><w_j| with w_j[(b, a)] = conj((K_j rho)[b, a]); then
/// tr[Choi(D) G] = sum_ij |tr(rho D_i K_j)|^2 = F_e(rho, D o N).
inline SdpProblem build_fidelity_sdp(const DensityOperator& rho_a, const KrausChannel& n) {
  if (n.d_in() != rho_a.dim()) fail(ErrorKind::DimensionMismatch, "build_fidelity_sdp: channel input differs from source");
  const Eigen::Index d_a = static_cast<Eigen::Index>(n.d_in());
  const Eigen::Index d_b = static_cast<Eigen::Index>(n.d_out());
  CMatrix w(d_b * d_a, static_cast<Eigen::Index>(n.kraus().size()));
  for (std::size_t j = 0; j < n.kraus().size(); ++j) {
    const CMatrix kr = n.kraus()[j] * rho_a.matrix();
    for (Eigen::Index b = 0; b < d_b; ++b) {
      for (Eigen::Index a = 0; a < d_a; ++a) w(b * d_a + a, static_cast<Eigen::Index>(j)) = std::conj(kr(b, a));
    }
  }
  return {detail::hermitian_part(w * w.adjoint()), n.d_out(), n.d_in()};
}

/// A problem restricted to supp(sigma_B) on the input and supp(rho_A) on the
/// output, with what is needed to lift a reduced Choi matrix back.
struct ReducedProblem {
  SdpProblem problem;
  CMatrix j_b;     // d_B x r_B isometry onto supp N(rho)
  CMatrix j_a;     // d_A x r_A isometry onto supp rho
  CMatrix kernel;  // d_B x (d_B - r_B), basis of ker N(rho)

  /// Decoder Kraus operators: J_A D' J_B^dagger from the reduced Choi matrix,
  /// plus |a_0><f| on the kernel so that the lift is trace preserving.
  KrausChannel lift(const CMatrix& x_reduced, double tol = 1e-7) const {
    const std::size_t rb = static_cast<std::size_t>(j_b.cols());
    const std::size_t ra = static_cast<std::size_t>(j_a.cols());
    const KrausChannel inner = channel_from_choi(x_reduced, {"B", rb}, {"A", ra}, tol);
    std::vector<CMatrix> ops;
    for (const auto& k : inner.kraus()) ops.push_back(j_a * k * j_b.adjoint());
    for (Eigen::Index f = 0; f < kernel.cols(); ++f) ops.push_back(j_a.col(0) * kernel.col(f).adjoint());
    return KrausChannel(std::move(ops), {"B", static_cast<std::size_t>(j_b.rows())},
                        {"A", static_cast<std::size_t>(j_a.rows())});
  }
};

inline ReducedProblem reduce_problem(const DensityOperator& rho_a, const KrausChannel& n) {
  const SdpProblem full = build_fidelity_sdp(rho_a, n);
  const HermEig er = psd_eig(rho_a.matrix(), "reduce_problem");
  const HermEig eb = psd_eig(apply_channel(n, rho_a.matrix()), "reduce_problem");
  const Eigen::Index ra = support_size(er.values);
  const Eigen::Index rb = support_size(eb.values);
  ReducedProblem out;
  out.j_a = er.vectors.leftCols(ra);
  out.j_b = eb.vectors.leftCols(rb);
  out.kernel = eb.vectors.rightCols(eb.vectors.cols() - rb);
  // vec(J_A D' J_B^dagger) = (conj(J_B) (x) J_A) vec(D')
  const CMatrix emb = detail::kron(CMatrix(out.j_b.conjugate()), out.j_a);
  out.problem = {detail::hermitian_part(emb.adjoint() * full.objective * emb), static_cast<std::size_t>(rb),
                 static_cast<std::size_t>(ra)};
  return out;
}

namespace detail {

struct SdpOps {
  Eigen::Index m;  // d_B
  Eigen::Index k;  // d_A

  CMatrix ptrace(const CMatrix& x) const {
    CMatrix out = CMatrix::Zero(m, m);
    for (Eigen::Index b = 0; b < m; ++b) {
      for (Eigen::Index c = 0; c < m; ++c) {
        cplx acc = 0.0;
        for (Eigen::Index a = 0; a < k; ++a) acc += x(b * k + a, c * k + a);
        out(b, c) = acc;
      }
    }
    return out;
  }

  CMatrix lift(const CMatrix& y) const { return kron(y, CMatrix::Identity(k, k)); }

  // Schur operator E -> tr_A[W (E (x) 1) W] on row-major vec(E)
  CMatrix schur(const CMatrix& w) const {
    CMatrix out = CMatrix::Zero(m * m, m * m);
    CMatrix blk1(m, m), blk2(m, m);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index a2 = 0; a2 < k; ++a2) {
        for (Eigen::Index b = 0; b < m; ++b) {
          for (Eigen::Index c = 0; c < m; ++c) {
            blk1(b, c) = w(b * k + a, c * k + a2);
            blk2(b, c) = w(b * k + a2, c * k + a);
          }
        }
        out += kron(blk1, CMatrix(blk2.transpose()));
      }
    }
    return out;
  }

  CVector vec(const CMatrix& e) const {
    CVector v(m * m);
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index c = 0; c < m; ++c) v(b * m + c) = e(b, c);
    return v;
  }

  CMatrix unvec(const CVector& v) const {
    CMatrix e(m, m);
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index c = 0; c < m; ++c) e(b, c) = v(b * m + c);
    return e;
  }
};

// Largest alpha with Lam + alpha * D >= 0 (Lam diagonal positive), capped at 1e30.
inline double max_step(const RVector& lam, const CMatrix& d) {
  const RVector s = lam.cwiseSqrt().cwiseInverse();
  const CMatrix scaled = s.cast<cplx>().asDiagonal() * d * s.cast<cplx>().asDiagonal();
  const double mn = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(scaled), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return mn < 0.0 ? -1.0 / mn : 1e30;
}

inline double real_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace().real(); }

}  // namespace detail

/// Nesterov-Todd scaled primal-dual path following with Mehrotra's
/// predictor-corrector, from the infeasible start X = 1/d_A, Y = (lmax(G)+1) 1.
inline SdpSolution solve_sdp(const SdpProblem& prob, double tol = 1e-7, int max_iter = 100) {
  const Eigen::Index m = static_cast<Eigen::Index>(prob.d_b);
  const Eigen::Index k = static_cast<Eigen::Index>(prob.d_a);
  const Eigen::Index n = m * k;
  if (prob.objective.rows() != n || prob.objective.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "solve_sdp: objective is not (d_B d_A) x (d_B d_A)");
  }
  if (detail::asymmetry(prob.objective) > 1e-10 * std::max(1.0, prob.objective.norm())) {
    fail(ErrorKind::NotHermitian, "solve_sdp: objective is not Hermitian");
  }
  const detail::SdpOps ops{m, k};
  const CMatrix c = -prob.objective;
  const CMatrix bmat = CMatrix::Identity(m, m);
  const double lmax = Eigen::SelfAdjointEigenSolver<CMatrix>(prob.objective, Eigen::EigenvaluesOnly).eigenvalues()(n - 1);

  CMatrix x = CMatrix::Identity(n, n) / static_cast<double>(k);
  CMatrix y = -(std::max(lmax, 0.0) + 1.0) * CMatrix::Identity(m, m);
  CMatrix z = c - ops.lift(y);
  const double scale = 1.0 + prob.objective.norm();

  SdpSolution sol;
  for (int it = 0; it <= max_iter; ++it) {
    const CMatrix rp = bmat - ops.ptrace(x);
    const CMatrix rd = c - z - ops.lift(y);
    const double primal = -detail::real_inner(c, x);
    const double dual = -y.trace().real();
    const double xz = detail::real_inner(x, z);
    sol.primal = primal;
    sol.dual = dual;
    sol.gap = dual - primal;
    sol.primal_residual = rp.norm();
    sol.dual_residual = rd.norm();
    sol.iterations = it;
    // absolute: the objective is a fidelity, so this also gives the relative bound
    if (std::abs(sol.gap) <= tol && xz <= tol &&
        sol.primal_residual <= tol && sol.dual_residual <= tol * scale) {
      sol.x = x;
      sol.y = -y;
      return sol;
    }
    if (it == max_iter) break;

    // NT scaling: Gs^-1 X Gs^-dagger = Gs^dagger Z Gs = Lam
    Eigen::LLT<CMatrix> llt(x);
    if (llt.info() != Eigen::Success) fail(ErrorKind::NumericalBreakdown, "solve_sdp: X lost positive definiteness");
    const CMatrix lx = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(detail::hermitian_part(lx.adjoint() * z * lx));
    if (!(es.eigenvalues()(0) > 0.0)) fail(ErrorKind::NumericalBreakdown, "solve_sdp: Z lost positive definiteness");
    const RVector lam = es.eigenvalues().cwiseSqrt();
    const CMatrix gs = lx * es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal();
    // Gs^-1 = Lam^{1/2} Q^dagger Lx^-1
    const CMatrix lx_inv = lx.triangularView<Eigen::Lower>().solve(CMatrix::Identity(n, n));
    const CMatrix gs_inv = lam.cwiseSqrt().cast<cplx>().asDiagonal() * es.eigenvectors().adjoint() * lx_inv;
    const CMatrix wmat = gs * gs.adjoint();

    const CMatrix schur = detail::hermitian_part(ops.schur(wmat));
    Eigen::LLT<CMatrix> schur_llt(schur);
    if (schur_llt.info() != Eigen::Success) fail(ErrorKind::NumericalBreakdown, "solve_sdp: Schur complement not positive definite");

    const double mu = xz / static_cast<double>(n);
    const CMatrix wrdw = wmat * rd * wmat;

    struct Step {
      CMatrix dx, dy, dz;
    };
    auto solve = [&](const CMatrix& rc_scaled) {
      const CMatrix rc = gs * rc_scaled * gs.adjoint();
      const CMatrix rhs = rp - ops.ptrace(rc) + ops.ptrace(wrdw);
      Step s;
      s.dy = detail::hermitian_part(ops.unvec(schur_llt.solve(ops.vec(rhs))));
      s.dz = detail::hermitian_part(rd - ops.lift(s.dy));
      s.dx = detail::hermitian_part(rc - wmat * s.dz * wmat);
      return s;
    };
    // Lam o U = R  =>  U_ij = 2 R_ij / (lam_i + lam_j)
    auto lyap = [&](const CMatrix& r) {
      CMatrix u(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) u(i, j) = 2.0 * r(i, j) / (lam(i) + lam(j));
      return u;
    };
    auto scaled_dirs = [&](const Step& s, CMatrix& dxs, CMatrix& dzs) {
      dxs = detail::hermitian_part(gs_inv * s.dx * gs_inv.adjoint());
      dzs = detail::hermitian_part(gs.adjoint() * s.dz * gs);
    };

    // predictor
    const Step aff = solve(-CMatrix(lam.cast<cplx>().asDiagonal()));
    CMatrix dxs, dzs;
    scaled_dirs(aff, dxs, dzs);
    const double ap = std::min(1.0, detail::max_step(lam, dxs));
    const double ad = std::min(1.0, detail::max_step(lam, dzs));
    const double xz_aff = detail::real_inner(x + ap * aff.dx, z + ad * aff.dz);
    const double sigma = std::clamp(std::pow(std::max(xz_aff, 0.0) / xz, 3.0), 0.0, 1.0);

    // corrector
    CMatrix r = sigma * mu * CMatrix::Identity(n, n);
    r.diagonal() -= lam.cwiseAbs2().cast<cplx>();
    r -= 0.5 * (dxs * dzs + dzs * dxs);
    const Step st = solve(lyap(r));
    scaled_dirs(st, dxs, dzs);
    const double gamma = 0.98;
    const double sp = std::min(1.0, gamma * detail::max_step(lam, dxs));
    const double sd = std::min(1.0, gamma * detail::max_step(lam, dzs));
    x = detail::hermitian_part(x + sp * st.dx);
    y = detail::hermitian_part(y + sd * st.dy);
    z = detail::hermitian_part(z + sd * st.dz);
  }
  fail(ErrorKind::MaxIterations, "solve_sdp: no convergence in " + std::to_string(max_iter) +
                                     " iterations (gap " + std::to_string(sol.gap) + ")");
}

struct OptimalDecoder {
  double value = 0.0;
  SdpSolution solution;  // of the reduced problem
  std::size_t reduced_dim = 0;
  KrausChannel decoder;  // lifted to B -> A
};

inline OptimalDecoder solve_optimal_decoder(const DensityOperator& rho_a, const KrausChannel& n, double tol = 1e-7) {
  const ReducedProblem red = reduce_problem(rho_a, n);
  SdpSolution sol = solve_sdp(red.problem, tol);
  KrausChannel dec = red.lift(sol.x, 1e-6);
  return {sol.primal, std::move(sol), red.problem.dim(), std::move(dec)};
}

inline double optimal_fidelity(const DensityOperator& rho_a, const KrausChannel& n, double tol = 1e-7) {
  return solve_optimal_decoder(rho_a, n, tol).value;
}

struct BkReport {
  double f_opt = 0.0;
  double f_petz = 0.0;
  double f_opt_squared = 0.0;
  bool holds = false;
};

/// F_opt^2 <= F_petz <= F_opt, each side with slack tol.
inline BkReport bk_bracket_check(const DensityOperator& rho_a, const KrausChannel& n, double tol = 1e-6) {
  BkReport r;
  r.f_opt = optimal_fidelity(rho_a, n);
  r.f_petz = fe_closed_form(sigma_rb_of(rho_a, n), ClosedFormVariant::Petz);
  r.f_opt_squared = r.f_opt * r.f_opt;
  r.holds = r.f_opt_squared - tol <= r.f_petz && r.f_petz <= r.f_opt + tol;
  if (!r.holds) {
    fail(ErrorKind::BracketViolated, "bk_bracket_check: F_opt=" + std::to_string(r.f_opt) +
                                         " F_petz=" + std::to_string(r.f_petz));
  }
  return r;
}

}  // namespace petzlab
