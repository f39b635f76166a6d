#pragma once

// States, channels, dilations and purifications on labeled tensor-factor
// systems. Tensor order is always explicit: a Layout lists the factors in the
// order they appear in the Kronecker product.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "petzlab/error.hpp"
#include "petzlab/matcore.hpp"

namespace petzlab {

struct Subsystem {
  std::string label;
  std::size_t dim = 0;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

/// Ordered list of labeled tensor factors.
class Layout {
 public:
  Layout() = default;
  Layout(std::initializer_list<Subsystem> parts) : parts_(parts) { check(); }
  explicit Layout(std::vector<Subsystem> parts) : parts_(std::move(parts)) { check(); }

  const std::vector<Subsystem>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  const Subsystem& operator[](std::size_t i) const { return parts_[i]; }

  std::size_t total_dim() const {
    std::size_t d = 1;
    for (const auto& p : parts_) d *= p.dim;
    return d;
  }

  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d;
    d.reserve(parts_.size());
    for (const auto& p : parts_) d.push_back(p.dim);
    return d;
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].label == label) return i;
    }
    fail(ErrorKind::DimensionMismatch, "layout has no subsystem labeled '" + label + "'");
  }

  /// Product of the dimensions strictly before / after factor i.
  std::size_t dim_before(std::size_t i) const {
    std::size_t d = 1;
    for (std::size_t k = 0; k < i; ++k) d *= parts_[k].dim;
    return d;
  }
  std::size_t dim_after(std::size_t i) const {
    std::size_t d = 1;
    for (std::size_t k = i + 1; k < parts_.size(); ++k) d *= parts_[k].dim;
    return d;
  }

  Layout replaced(std::size_t i, Subsystem with) const {
    auto parts = parts_;
    parts.at(i) = std::move(with);
    return Layout(std::move(parts));
  }

  friend bool operator==(const Layout&, const Layout&) = default;

 private:
  void check() const {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i].dim == 0) fail(ErrorKind::DimensionMismatch, "subsystem '" + parts_[i].label + "' has dimension 0");
      for (std::size_t j = i + 1; j < parts_.size(); ++j) {
        if (parts_[i].label == parts_[j].label) {
          fail(ErrorKind::DimensionMismatch, "duplicate subsystem label '" + parts_[i].label + "'");
        }
      }
    }
  }

  std::vector<Subsystem> parts_;
};

/// Positive unit-trace operator on a labeled system.
class DensityOperator {
 public:
  DensityOperator(CMatrix matrix, Layout layout) : matrix_(std::move(matrix)), layout_(std::move(layout)) {
    if (static_cast<std::size_t>(matrix_.rows()) != layout_.total_dim() ||
        matrix_.rows() != matrix_.cols()) {
      fail(ErrorKind::DimensionMismatch, "density operator size does not match its layout");
    }
    if (!matrix_.allFinite()) fail(ErrorKind::NonFinite, "density operator has NaN/Inf entries");
    if (detail::asymmetry(matrix_) > kHermitianTol) {
      fail(ErrorKind::NotState, "density operator is not Hermitian");
    }
    matrix_ = detail::hermitian_part(matrix_);
    const double tr = matrix_.trace().real();
    if (std::abs(tr - 1.0) > 1e-10) fail(ErrorKind::NotState, "trace " + std::to_string(tr));
    const double smallest = herm_eig(matrix_).values.tail(1)(0);
    if (smallest < -1e-10) {
      fail(ErrorKind::NotState, "minimum eigenvalue " + std::to_string(smallest));
    }
  }

  /// Single-factor state labeled `label`.
  static DensityOperator on(const CMatrix& matrix, const std::string& label = "A") {
    return DensityOperator(matrix, Layout{{label, static_cast<std::size_t>(matrix.rows())}});
  }

  const CMatrix& matrix() const { return matrix_; }
  const Layout& layout() const { return layout_; }
  std::size_t dim() const { return layout_.total_dim(); }

  /// Marginal on the listed labels (kept in this operator's tensor order).
  DensityOperator reduce(const std::vector<std::string>& keep) const {
    std::vector<std::size_t> idx;
    for (const auto& l : keep) idx.push_back(layout_.index_of(l));
    std::sort(idx.begin(), idx.end());
    std::vector<Subsystem> parts;
    for (auto i : idx) parts.push_back(layout_[i]);
    const auto dims = layout_.dims();
    return DensityOperator(partial_trace(matrix_, dims, idx), Layout(std::move(parts)));
  }

 private:
  CMatrix matrix_;
  Layout layout_;
};

inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) fail(ErrorKind::DimensionMismatch, "fidelity: dimensions differ");
  return fidelity(rho.matrix(), sigma.matrix());
}

/// Completely positive map stored as Kraus operators of shape d_out x d_in.
///
/// The constructor checks shapes only; trace preservation is established by
/// validate_cptp, which every factory in this library calls.
class KrausChannel {
 public:
  KrausChannel(std::vector<CMatrix> kraus, Subsystem input, Subsystem output)
      : kraus_(std::move(kraus)), input_(std::move(input)), output_(std::move(output)) {
    if (kraus_.empty()) fail(ErrorKind::InvalidParameter, "channel needs at least one Kraus operator");
    for (const auto& k : kraus_) {
      if (static_cast<std::size_t>(k.rows()) != output_.dim ||
          static_cast<std::size_t>(k.cols()) != input_.dim) {
        fail(ErrorKind::DimensionMismatch, "Kraus operator shape does not match channel dimensions");
      }
      if (!k.allFinite()) fail(ErrorKind::NonFinite, "Kraus operator has NaN/Inf entries");
    }
  }

  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const Subsystem& input() const { return input_; }
  const Subsystem& output() const { return output_; }
  std::size_t d_in() const { return input_.dim; }
  std::size_t d_out() const { return output_.dim; }

  KrausChannel relabeled(std::string in_label, std::string out_label) const {
    return KrausChannel(kraus_, {std::move(in_label), input_.dim}, {std::move(out_label), output_.dim});
  }

 private:
  std::vector<CMatrix> kraus_;
  Subsystem input_;
  Subsystem output_;
};

/// ||sum_k K_k^dagger K_k - 1||_F.
inline double trace_preservation_residual(const KrausChannel& ch) {
  CMatrix sum = CMatrix::Zero(static_cast<Eigen::Index>(ch.d_in()), static_cast<Eigen::Index>(ch.d_in()));
  for (const auto& k : ch.kraus()) sum.noalias() += k.adjoint() * k;
  return (sum - CMatrix::Identity(sum.rows(), sum.cols())).norm();
}

inline void validate_cptp(const KrausChannel& ch, double tol = 1e-10) {
  const double residual = trace_preservation_residual(ch);
  if (!(residual <= tol)) {
    fail(ErrorKind::NotTracePreserving, "sum K^dagger K deviates from identity by " + std::to_string(residual));
  }
}

namespace detail {

// (1_before (x) K (x) 1_after) X for X with rows ordered (before, in, after).
inline CMatrix left_local(const CMatrix& k, const CMatrix& x, std::size_t before, std::size_t after) {
  const Eigen::Index din = k.cols();
  const Eigen::Index dout = k.rows();
  const Eigen::Index b = static_cast<Eigen::Index>(before);
  const Eigen::Index a = static_cast<Eigen::Index>(after);
  CMatrix out(b * dout * a, x.cols());
  if (a == 1) {
    for (Eigen::Index i = 0; i < b; ++i) {
      out.middleRows(i * dout, dout).noalias() = k * x.middleRows(i * din, din);
    }
    return out;
  }
  out.setZero();
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index o = 0; o < dout; ++o) {
      for (Eigen::Index s = 0; s < din; ++s) {
        const cplx c = k(o, s);
        if (c == cplx(0.0, 0.0)) continue;
        for (Eigen::Index j = 0; j < a; ++j) {
          out.row((i * dout + o) * a + j) += c * x.row((i * din + s) * a + j);
        }
      }
    }
  }
  return out;
}

// (1 (x) K (x) 1) X (1 (x) K (x) 1)^dagger
inline CMatrix conjugate_local(const CMatrix& k, const CMatrix& x, std::size_t before, std::size_t after) {
  const CMatrix half = left_local(k, x, before, after);
  const CMatrix half_adj = half.adjoint();
  return left_local(k, half_adj, before, after).adjoint();
}

}  // namespace detail

/// Applies a channel to the labeled factor of an operator on `layout`.
inline CMatrix apply_channel(const KrausChannel& ch, const CMatrix& x, const Layout& layout,
                             const std::string& acting_on) {
  const std::size_t slot = layout.index_of(acting_on);
  if (layout[slot].dim != ch.d_in()) {
    fail(ErrorKind::DimensionMismatch, "apply_channel: subsystem '" + acting_on + "' has dimension " +
                                           std::to_string(layout[slot].dim) + ", channel expects " +
                                           std::to_string(ch.d_in()));
  }
  if (static_cast<std::size_t>(x.rows()) != layout.total_dim() || x.rows() != x.cols()) {
    fail(ErrorKind::DimensionMismatch, "apply_channel: operator does not match layout");
  }
  const std::size_t before = layout.dim_before(slot);
  const std::size_t after = layout.dim_after(slot);
  const Eigen::Index n_out = static_cast<Eigen::Index>(before * ch.d_out() * after);
  CMatrix out = CMatrix::Zero(n_out, n_out);
  for (const auto& k : ch.kraus()) out += detail::conjugate_local(k, x, before, after);
  return out;
}

/// Applies a channel to an operator that lives on the channel input alone.
inline CMatrix apply_channel(const KrausChannel& ch, const CMatrix& x) {
  return apply_channel(ch, x, Layout{ch.input()}, ch.input().label);
}

inline DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho,
                                     const std::string& acting_on) {
  const std::size_t slot = rho.layout().index_of(acting_on);
  CMatrix out = apply_channel(ch, rho.matrix(), rho.layout(), acting_on);
  Subsystem replaced = ch.output();
  return DensityOperator(std::move(out), rho.layout().replaced(slot, replaced));
}

/// Heisenberg-picture action Y -> sum_k K_k^dagger Y K_k.
inline CMatrix adjoint_apply(const KrausChannel& ch, const CMatrix& y) {
  if (static_cast<std::size_t>(y.rows()) != ch.d_out() || y.rows() != y.cols()) {
    fail(ErrorKind::DimensionMismatch, "adjoint_apply: operator must live on the channel output");
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(ch.d_in()), static_cast<Eigen::Index>(ch.d_in()));
  for (const auto& k : ch.kraus()) out.noalias() += k.adjoint() * y * k;
  return out;
}

/// Kraus set of ch1 (x) ch2 on the joint input.
inline KrausChannel tensor(const KrausChannel& first, const KrausChannel& second) {
  std::vector<CMatrix> ops;
  ops.reserve(first.kraus().size() * second.kraus().size());
  for (const auto& a : first.kraus()) {
    for (const auto& b : second.kraus()) ops.push_back(detail::kron(a, b));
  }
  return KrausChannel(std::move(ops), {first.input().label, first.d_in() * second.d_in()},
                      {first.output().label, first.d_out() * second.d_out()});
}

inline KrausChannel tensor_power(const KrausChannel& ch, std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidParameter, "tensor_power: n must be positive");
  KrausChannel out = ch;
  for (std::size_t i = 1; i < n; ++i) out = tensor(out, ch);
  return out;
}

/// second o first, as a Kraus channel with all pairwise products.
inline KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.d_in() != first.d_out()) fail(ErrorKind::DimensionMismatch, "compose: dimension mismatch");
  std::vector<CMatrix> ops;
  ops.reserve(first.kraus().size() * second.kraus().size());
  for (const auto& b : second.kraus()) {
    for (const auto& a : first.kraus()) ops.push_back(b * a);
  }
  return KrausChannel(std::move(ops), first.input(), second.output());
}

/// Choi operator sum_{ij} |i><j| (x) N(|i><j|) on (input (x) output).
inline CMatrix choi_of_channel(const KrausChannel& ch) {
  const Eigen::Index din = static_cast<Eigen::Index>(ch.d_in());
  const Eigen::Index dout = static_cast<Eigen::Index>(ch.d_out());
  CMatrix vecs(din * dout, static_cast<Eigen::Index>(ch.kraus().size()));
  for (std::size_t l = 0; l < ch.kraus().size(); ++l) {
    const CMatrix& k = ch.kraus()[l];
    for (Eigen::Index i = 0; i < din; ++i) {
      for (Eigen::Index o = 0; o < dout; ++o) vecs(i * dout + o, static_cast<Eigen::Index>(l)) = k(o, i);
    }
  }
  return vecs * vecs.adjoint();
}

/// Minimal Kraus representation read off the spectrum of a Choi operator.
inline KrausChannel channel_from_choi(const CMatrix& choi, const Subsystem& input, const Subsystem& output,
                                      double tol = 1e-8) {
  const Eigen::Index din = static_cast<Eigen::Index>(input.dim);
  const Eigen::Index dout = static_cast<Eigen::Index>(output.dim);
  if (choi.rows() != din * dout || choi.cols() != din * dout) {
    fail(ErrorKind::DimensionMismatch, "channel_from_choi: Choi size does not match dimensions");
  }
  const HermEig eig = herm_eig(choi);
  const double scale = std::max(1.0, eig.values(0));
  if (eig.values.tail(1)(0) < -tol * scale) {
    fail(ErrorKind::NotPsd, "channel_from_choi: minimum eigenvalue " + std::to_string(eig.values.tail(1)(0)));
  }
  const std::size_t dims[2] = {input.dim, output.dim};
  const std::size_t keep_in[1] = {0};
  const CMatrix tp = partial_trace(choi, dims, keep_in);
  const double residual = (tp - CMatrix::Identity(din, din)).norm();
  if (residual > tol) {
    fail(ErrorKind::NotTracePreserving, "channel_from_choi: tr_out C deviates from identity by " +
                                            std::to_string(residual));
  }
  std::vector<CMatrix> ops;
  const Eigen::Index r = std::max<Eigen::Index>(1, support_size(eig.values, kRankCut));
  for (Eigen::Index l = 0; l < r; ++l) {
    const double w = std::sqrt(std::max(0.0, eig.values(l)));
    CMatrix k(dout, din);
    for (Eigen::Index i = 0; i < din; ++i) {
      for (Eigen::Index o = 0; o < dout; ++o) k(o, i) = w * eig.vectors(i * dout + o, l);
    }
    ops.push_back(std::move(k));
  }
  return KrausChannel(std::move(ops), input, output);
}

/// Isometry V: A -> B (x) E with N(X) = tr_E[V X V^dagger].
struct StinespringIsometry {
  CMatrix v;
  std::size_t d_a = 0;
  std::size_t d_b = 0;
  std::size_t d_e = 0;
};

/// Stinespring dilation with the environment padded to d_E = d_A * d_B.
inline StinespringIsometry stinespring_dilation(const KrausChannel& ch) {
  const std::size_t d_a = ch.d_in();
  const std::size_t d_b = ch.d_out();
  const std::size_t d_e = d_a * d_b;
  const KrausChannel* source = &ch;
  KrausChannel reduced = ch;
  if (ch.kraus().size() > d_e) {
    reduced = channel_from_choi(choi_of_channel(ch), ch.input(), ch.output());
    source = &reduced;
    if (reduced.kraus().size() > d_e) {
      fail(ErrorKind::TooManyKraus, "stinespring_dilation: " + std::to_string(reduced.kraus().size()) +
                                        " Kraus operators exceed d_A*d_B = " + std::to_string(d_e));
    }
  }
  StinespringIsometry out{CMatrix::Zero(static_cast<Eigen::Index>(d_b * d_e), static_cast<Eigen::Index>(d_a)),
                          d_a, d_b, d_e};
  const auto& ops = source->kraus();
  for (std::size_t l = 0; l < ops.size(); ++l) {
    for (std::size_t b = 0; b < d_b; ++b) {
      out.v.row(static_cast<Eigen::Index>(b * d_e + l)) = ops[l].row(static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

/// Channel X -> tr_B[V X V^dagger] with Kraus operators (<b| (x) 1_E) V.
inline KrausChannel complementary_channel(const KrausChannel& ch, const std::string& env_label = "E") {
  const StinespringIsometry iso = stinespring_dilation(ch);
  std::vector<CMatrix> ops;
  ops.reserve(iso.d_b);
  const Eigen::Index de = static_cast<Eigen::Index>(iso.d_e);
  for (std::size_t b = 0; b < iso.d_b; ++b) {
    ops.push_back(iso.v.middleRows(static_cast<Eigen::Index>(b) * de, de));
  }
  return KrausChannel(std::move(ops), ch.input(), {env_label, iso.d_e});
}

/// Source state with its canonical purification on R (x) A.
///
/// R has dimension rank(rho_A); the purification is
/// sum_k sqrt(lambda_k) |k>_R (x) |a_k>_A with the eigenbasis of rho_A in
/// descending order. `a_basis` holds all d_A eigenvectors as columns.
struct PurifiedSource {
  DensityOperator rho_a;
  CVector purification;
  RVector schmidt_coeffs;
  CMatrix a_basis;

  std::size_t d_r() const { return static_cast<std::size_t>(schmidt_coeffs.size()); }
  std::size_t d_a() const { return rho_a.dim(); }
  Layout layout(const std::string& r = "R", const std::string& a = "A") const {
    return Layout{{r, d_r()}, {a, d_a()}};
  }
  CMatrix projector() const { return purification * purification.adjoint(); }
  DensityOperator state(const std::string& r = "R", const std::string& a = "A") const {
    return DensityOperator(projector(), layout(r, a));
  }
};

inline PurifiedSource purify(const DensityOperator& rho) {
  const HermEig eig = psd_eig(rho.matrix(), "purify");
  const Eigen::Index d_a = static_cast<Eigen::Index>(rho.dim());
  const Eigen::Index d_r = std::max<Eigen::Index>(1, support_size(eig.values));
  RVector lambda = eig.values.head(d_r).cwiseMax(0.0);
  lambda /= lambda.sum();
  CVector psi = CVector::Zero(d_r * d_a);
  for (Eigen::Index k = 0; k < d_r; ++k) {
    psi.segment(k * d_a, d_a) = std::sqrt(lambda(k)) * eig.vectors.col(k);
  }
  return PurifiedSource{rho, std::move(psi), std::move(lambda), eig.vectors};
}

/// <psi| (1_R (x) M)(|psi><psi|) |psi> for a given purification on R (x) A.
inline double entanglement_fidelity_with(const CVector& purification, std::size_t d_r, const KrausChannel& m) {
  if (m.d_in() != m.d_out()) fail(ErrorKind::DimensionMismatch, "entanglement fidelity needs an endomorphic channel");
  if (static_cast<std::size_t>(purification.size()) != d_r * m.d_in()) {
    fail(ErrorKind::DimensionMismatch, "purification does not live on R (x) A");
  }
  const Layout layout{{"R", d_r}, {"A", m.d_in()}};
  const CMatrix out = apply_channel(m, purification * purification.adjoint(), layout, "A");
  return std::clamp((purification.adjoint() * out * purification)(0, 0).real(), 0.0, 1.0);
}

/// F_e(rho_A, M) evaluated on the canonical purification.
inline double entanglement_fidelity_direct(const DensityOperator& rho_a, const KrausChannel& m) {
  if (rho_a.dim() != m.d_in()) fail(ErrorKind::DimensionMismatch, "entanglement fidelity: state and channel differ");
  const PurifiedSource src = purify(rho_a);
  return entanglement_fidelity_with(src.purification, src.d_r(), m);
}

/// sigma_RB = (1_R (x) N)(|rho><rho|_RA).
inline DensityOperator output_state(const PurifiedSource& src, const KrausChannel& ch,
                                    const std::string& r = "R") {
  if (ch.d_in() != src.d_a()) fail(ErrorKind::DimensionMismatch, "output_state: channel input differs from source");
  const Layout in{{r, src.d_r()}, {ch.input().label, src.d_a()}};
  CMatrix out = apply_channel(ch, src.projector(), in, ch.input().label);
  return DensityOperator(std::move(out), in.replaced(1, ch.output()));
}

/// Pure state (1_R (x) V)|rho>_RA on R (x) B (x) E.
inline CVector purified_output(const PurifiedSource& src, const StinespringIsometry& iso) {
  const Eigen::Index d_r = static_cast<Eigen::Index>(src.d_r());
  const Eigen::Index d_a = static_cast<Eigen::Index>(src.d_a());
  const Eigen::Index d_be = iso.v.rows();
  CVector out(d_r * d_be);
  for (Eigen::Index r = 0; r < d_r; ++r) out.segment(r * d_be, d_be) = iso.v * src.purification.segment(r * d_a, d_a);
  return out;
}

}  // namespace petzlab
