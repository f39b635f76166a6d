#pragma once

// Petz, rotated Petz and twirled Petz decoders, their entanglement fidelities
// by direct simulation and in closed form.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "petzlab/error.hpp"
#include "petzlab/infomeasures.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/quadrature.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

enum class DecoderKind { Petz, Rotated, Twirled, Sw, Identity, Custom };

inline std::string to_string(DecoderKind k) {
  switch (k) {
    case DecoderKind::Petz: return "petz";
    case DecoderKind::Rotated: return "rotated";
    case DecoderKind::Twirled: return "twirled";
    case DecoderKind::Sw: return "sw";
    case DecoderKind::Identity: return "identity";
    case DecoderKind::Custom: return "custom";
  }
  return "custom";
}

/// A recovery channel B -> A with a tag saying how it was built.
struct Decoder {
  KrausChannel channel;
  DecoderKind kind = DecoderKind::Custom;
  double t = 0.0;  // rotation parameter, meaningful for Rotated only
};

inline Decoder identity_decoder(std::size_t d) {
  return {KrausChannel({CMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))}, {"B", d},
                       {"A", d}),
          DecoderKind::Identity};
}

/// F_e(rho_A, D o N), applying N and then D to the canonical purification.
inline double fe_of_decoder(const DensityOperator& rho_a, const KrausChannel& n, const KrausChannel& d) {
  if (n.d_in() != rho_a.dim() || d.d_in() != n.d_out() || d.d_out() != rho_a.dim()) {
    fail(ErrorKind::DimensionMismatch, "fe_of_decoder: source, channel and decoder dimensions do not chain");
  }
  const PurifiedSource src = purify(rho_a);
  const Layout ra{{"R", src.d_r()}, {"A", src.d_a()}};
  const Layout rb{{"R", src.d_r()}, {"B", n.d_out()}};
  const KrausChannel nn = n.relabeled("A", "B");
  const KrausChannel dd = d.relabeled("B", "A");
  const CMatrix out = apply_channel(dd, apply_channel(nn, src.projector(), ra, "A"), rb, "B");
  return std::clamp((src.purification.adjoint() * out * src.purification)(0, 0).real(), 0.0, 1.0);
}

inline double fe_of_decoder(const DensityOperator& rho_a, const KrausChannel& n, const Decoder& d) {
  return fe_of_decoder(rho_a, n, d.channel);
}

/// Spectral data shared by all rotated Petz decoders of one (rho_A, N).
///
/// Kraus operators rho^{(1-it)/2} K_j^dagger sigma_B^{(-1+it)/2}; off the
/// support of sigma_B = N(rho) a completion branch measures the kernel and
/// prepares the maximally mixed state on supp rho.
class PetzFamily {
 public:
  PetzFamily(const DensityOperator& rho_a, const KrausChannel& n) : n_(n) {
    if (n.d_in() != rho_a.dim()) fail(ErrorKind::DimensionMismatch, "Petz decoder: channel input differs from source");
    rho_ = psd_eig(rho_a.matrix(), "Petz decoder");
    sigma_b_ = psd_eig(apply_channel(n, rho_a.matrix()), "Petz decoder");
    if (!(sigma_b_.values(0) > 1e-300)) {
      fail(ErrorKind::DegenerateChannelOutput, "Petz decoder: N(rho) is numerically zero");
    }
    rank_rho_ = support_size(rho_.values);
    rank_b_ = support_size(sigma_b_.values);
    const Eigen::Index d_a = static_cast<Eigen::Index>(n.d_in());
    const Eigen::Index d_b = static_cast<Eigen::Index>(n.d_out());
    const double w = 1.0 / std::sqrt(static_cast<double>(rank_rho_));
    for (Eigen::Index j = rank_b_; j < d_b; ++j) {
      for (Eigen::Index i = 0; i < rank_rho_; ++i) {
        completion_.push_back(w * rho_.vectors.col(i) * sigma_b_.vectors.col(j).adjoint());
      }
    }
    (void)d_a;
  }

  Decoder rotated(double t) const {
    const CMatrix rho_pow = apply_on_support(rho_, [t](double x) { return std::pow(cplx(x, 0.0), cplx(0.5, -t / 2.0)); });
    const CMatrix sb_pow =
        apply_on_support(sigma_b_, [t](double x) { return std::pow(cplx(x, 0.0), cplx(-0.5, t / 2.0)); });
    std::vector<CMatrix> ops;
    ops.reserve(n_.kraus().size() + completion_.size());
    for (const auto& k : n_.kraus()) ops.push_back(rho_pow * k.adjoint() * sb_pow);
    for (const auto& c : completion_) ops.push_back(c);
    Decoder d{KrausChannel(std::move(ops), {"B", n_.d_out()}, {"A", n_.d_in()}),
              t == 0.0 ? DecoderKind::Petz : DecoderKind::Rotated, t};
    validate_cptp(d.channel, 1e-9);
    return d;
  }

  /// sum_i w_i Choi(rotated(t_i)) over a quadrature rule.
  ///
  /// In the eigenbases of rho and sigma_B the rotation multiplies Kraus entry
  /// (a, b) by exp(i t theta_ab), theta_ab = (ln s_b - ln lambda_a) / 2, so the
  /// node sum is the t = 0 Choi matrix times the node-averaged phases,
  /// entrywise. The completion branch does not depend on t.
  CMatrix averaged_choi(const Beta0Rule& rule) const {
    const Eigen::Index d_a = static_cast<Eigen::Index>(n_.d_in());
    const Eigen::Index d_b = static_cast<Eigen::Index>(n_.d_out());
    const Eigen::Index ra = rank_rho_, rb = rank_b_, m = ra * rb;
    const CMatrix ua = rho_.vectors.leftCols(ra), ub = sigma_b_.vectors.leftCols(rb);
    CMatrix v(m, static_cast<Eigen::Index>(n_.kraus().size()));
    RVector theta(m);
    for (Eigen::Index b = 0; b < rb; ++b) {
      for (Eigen::Index a = 0; a < ra; ++a) theta(b * ra + a) = 0.5 * (std::log(sigma_b_.values(b)) - std::log(rho_.values(a)));
    }
    for (std::size_t j = 0; j < n_.kraus().size(); ++j) {
      const CMatrix mj = ua.adjoint() * n_.kraus()[j].adjoint() * ub;
      for (Eigen::Index b = 0; b < rb; ++b) {
        for (Eigen::Index a = 0; a < ra; ++a) {
          v(b * ra + a, static_cast<Eigen::Index>(j)) = std::sqrt(rho_.values(a) / sigma_b_.values(b)) * mj(a, b);
        }
      }
    }
    CMatrix c = v * v.adjoint();
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = 0; q < m; ++q) {
        const double dth = theta(p) - theta(q);
        cplx phase = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) phase += rule.weights[i] * std::polar(1.0, rule.nodes[i] * dth);
        c(p, q) *= phase;
      }
    }
    // vec(U_A D U_B^dagger) = (conj(U_B) (x) U_A) vec(D)
    const CMatrix emb = detail::kron(CMatrix(ub.conjugate()), ua);
    CMatrix choi = emb * c * emb.adjoint();
    if (!completion_.empty()) {
      CMatrix vc(d_b * d_a, static_cast<Eigen::Index>(completion_.size()));
      for (std::size_t l = 0; l < completion_.size(); ++l) {
        for (Eigen::Index i = 0; i < d_b; ++i) {
          for (Eigen::Index o = 0; o < d_a; ++o) vc(i * d_a + o, static_cast<Eigen::Index>(l)) = completion_[l](o, i);
        }
      }
      choi += total * (vc * vc.adjoint());
    }
    return choi;
  }

  const KrausChannel& channel() const { return n_; }

 private:
  KrausChannel n_;
  HermEig rho_;
  HermEig sigma_b_;
  Eigen::Index rank_rho_ = 0;
  Eigen::Index rank_b_ = 0;
  std::vector<CMatrix> completion_;
};

inline Decoder build_petz(const DensityOperator& rho_a, const KrausChannel& n) {
  return PetzFamily(rho_a, n).rotated(0.0);
}

inline Decoder build_rotated_petz(const DensityOperator& rho_a, const KrausChannel& n, double t) {
  return PetzFamily(rho_a, n).rotated(t);
}

/// F_t = sum_jk c_jk cos(t w_jk) in the product eigenbasis of sigma_R (x) sigma_B^{-1}.
///
/// With Y = sigma_R (x) sigma_B^{-1} = sum_j y_j |e_j><e_j|, c_jk =
/// sqrt(y_j y_k) |<e_j|sigma_RB|e_k>|^2 and w_jk = ln(y_j / y_k) / 2.
class FidelitySpectrum {
 public:
  explicit FidelitySpectrum(const DensityOperator& sigma_rb) {
    if (sigma_rb.layout().size() != 2) fail(ErrorKind::DimensionMismatch, "closed form needs a bipartite sigma_RB");
    const std::size_t d_r = sigma_rb.layout()[0].dim;
    const std::size_t d_b = sigma_rb.layout()[1].dim;
    const CMatrix& s = sigma_rb.matrix();
    const HermEig er = psd_eig(partial_trace(s, d_r, d_b, Keep::First), "fe_closed_form");
    const HermEig eb = psd_eig(partial_trace(s, d_r, d_b, Keep::Second), "fe_closed_form");
    const Eigen::Index nr = support_size(er.values);
    const Eigen::Index nb = support_size(eb.values);
    const CMatrix basis = detail::kron(er.vectors.leftCols(nr), eb.vectors.leftCols(nb));
    const double leak = s.trace().real() - (basis.adjoint() * s * basis).trace().real();
    if (leak > kSupportLeakTol) {
      fail(ErrorKind::SupportViolation, "sigma_RB leaves supp(sigma_R) (x) supp(sigma_B) by " + std::to_string(leak));
    }
    const CMatrix sig = basis.adjoint() * s * basis;
    const Eigen::Index m = nr * nb;
    RVector log_y(m);
    for (Eigen::Index a = 0; a < nr; ++a) {
      for (Eigen::Index b = 0; b < nb; ++b) log_y(a * nb + b) = std::log(er.values(a)) - std::log(eb.values(b));
    }
    c_.resize(m, m);
    w_.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        c_(j, k) = std::exp(0.5 * (log_y(j) + log_y(k))) * std::norm(sig(j, k));
        w_(j, k) = 0.5 * (log_y(j) - log_y(k));
      }
    }
  }

  double at(double t) const {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < c_.rows(); ++j) {
      for (Eigen::Index k = 0; k < c_.cols(); ++k) acc += c_(j, k) * std::cos(t * w_(j, k));
    }
    return acc;
  }

  const Eigen::MatrixXd& weights() const { return c_; }
  const Eigen::MatrixXd& frequencies() const { return w_; }

 private:
  Eigen::MatrixXd c_;
  Eigen::MatrixXd w_;
};

enum class ClosedFormVariant { Petz, Rotated, Twirled };

/// F_e of the Petz-family decoder for sigma_RB = N(|rho><rho|).
inline double fe_closed_form(const DensityOperator& sigma_rb, ClosedFormVariant variant, double t = 0.0,
                             double tol = 1e-9) {
  const FidelitySpectrum spec(sigma_rb);
  switch (variant) {
    case ClosedFormVariant::Petz: return spec.at(0.0);
    case ClosedFormVariant::Rotated: return spec.at(t);
    case ClosedFormVariant::Twirled:
      return beta0_quadrature([&spec](double s) { return spec.at(s); }, tol).value;
  }
  return 0.0;
}

/// sigma_RB for the canonical purification of rho_A.
inline DensityOperator sigma_rb_of(const DensityOperator& rho_a, const KrausChannel& n) {
  return output_state(purify(rho_a), n.relabeled("A", "B"));
}

struct TwirledDecoder {
  Decoder decoder;
  QuadratureResult quadrature;  // the rule shared by the scalar formula and the Choi integral
  double trace_residual = 0.0;  // ||tr_A C - 1|| before renormalization
};

/// Integrates rotated-Petz Choi matrices against beta_0 at the nodes chosen for the scalar formula.
inline TwirledDecoder build_twirled_petz(const DensityOperator& rho_a, const KrausChannel& n, double tol = 1e-9) {
  const PetzFamily family(rho_a, n);
  const FidelitySpectrum spec(sigma_rb_of(rho_a, n));
  QuadratureResult q = beta0_quadrature([&spec](double s) { return spec.at(s); }, tol);
  const Eigen::Index d_in = static_cast<Eigen::Index>(n.d_out());
  const Eigen::Index d_out = static_cast<Eigen::Index>(n.d_in());
  CMatrix choi = detail::hermitian_part(family.averaged_choi(q.rule));
  const std::size_t dims[2] = {n.d_out(), n.d_in()};
  const std::size_t keep_in[1] = {0};
  const CMatrix tp = partial_trace(choi, dims, keep_in);
  const double residual = (tp - CMatrix::Identity(d_in, d_in)).norm();
  if (residual > tol) {
    fail(ErrorKind::ToleranceNotMet, "twirled decoder: Choi trace defect " + std::to_string(residual));
  }
  const CMatrix fix = detail::kron(matrix_power_on_support(tp, -0.5), CMatrix::Identity(d_out, d_out));
  choi = detail::hermitian_part(fix * choi * fix);
  Decoder d{channel_from_choi(choi, {"B", n.d_out()}, {"A", n.d_in()}), DecoderKind::Twirled, 0.0};
  return {std::move(d), std::move(q), residual};
}

}  // namespace petzlab
