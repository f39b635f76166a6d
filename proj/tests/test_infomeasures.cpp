#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "petzlab/channels.hpp"
#include "petzlab/infomeasures.hpp"
#include "petzlab/random.hpp"

using namespace petzlab;

namespace {

CMatrix diag(std::initializer_list<double> v) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

CMatrix phi_plus() {
  CVector v = CVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v * v.adjoint();
}

DensityOperator rb(const CMatrix& m, std::size_t d_r, std::size_t d_b, const char* b = "B") {
  return DensityOperator(m, Layout{{"R", d_r}, {b, d_b}});
}

struct PureTriple {
  DensityOperator sigma_rb;
  DensityOperator sigma_re;
};

PureTriple random_triple(Rng& rng, std::size_t d_a, std::size_t d_b, std::size_t kraus, Eigen::Index rank = 0) {
  const auto rho = DensityOperator::on(random_density(rng, static_cast<Eigen::Index>(d_a), rank));
  const auto ch = random_channel(rng, d_a, d_b, kraus);
  const auto src = purify(rho);
  return {output_state(src, ch), output_state(src, complementary_channel(ch))};
}

double value(const DivergenceResult& d) { return d.finite(); }

}  // namespace

TEST(Entropy, Examples) {
  for (Eigen::Index d : {2, 3, 5}) {
    const CMatrix mixed = CMatrix::Identity(d, d) / static_cast<double>(d);
    EXPECT_NEAR(entropy(mixed), std::log2(static_cast<double>(d)), 1e-14);
    EXPECT_NEAR(entropy(mixed, EntropyKind::Renyi, 2.0), std::log2(static_cast<double>(d)), 1e-14);
  }
  EXPECT_NEAR(entropy(diag({1, 0})), 0.0, 1e-15);
  EXPECT_NEAR(entropy(diag({1, 0}), EntropyKind::Renyi, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(entropy(diag({0.75, 0.25}), EntropyKind::Renyi, 2.0), -std::log2(10.0 / 16.0), 1e-14);
  EXPECT_THROW(entropy(diag({0.5, 0.5}), EntropyKind::Renyi, 1.0), Error);
  EXPECT_THROW(entropy(diag({0.5, 0.5}), EntropyKind::Renyi, -1.0), Error);
}

TEST(EntropyDerived, Examples) {
  Rng rng(1);
  const CMatrix a = random_density(rng, 2), b = random_density(rng, 3);
  EXPECT_NEAR(entropy_derived(rb(detail::kron(a, b), 2, 3), DerivedEntropy::Mutual, "R"), 0.0, 1e-12);
  EXPECT_NEAR(entropy_derived(rb(phi_plus(), 2, 2), DerivedEntropy::Coherent, "R"), 1.0, 1e-12);
  EXPECT_NEAR(entropy_derived(rb(phi_plus(), 2, 2), DerivedEntropy::Conditional, "R"), -1.0, 1e-12);

  // eigenvalue-level oracle for the mutual information
  const CMatrix s = random_density(rng, 4);
  auto h = [](const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    double acc = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double l = es.eigenvalues()(i);
      if (l > 1e-300) acc -= l * std::log(l) / std::log(2.0);
    }
    return acc;
  };
  CMatrix sa = CMatrix::Zero(2, 2), sb = CMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) sa(i, j) += s(2 * i + k, 2 * j + k), sb(i, j) += s(2 * k + i, 2 * k + j);
  EXPECT_NEAR(entropy_derived(rb(s, 2, 2), DerivedEntropy::Mutual, "B"), h(sa) + h(sb) - h(s), 1e-12);
}

TEST(PetzDivergence, Examples) {
  Rng rng(2);
  const CMatrix rho = random_density(rng, 3);
  EXPECT_NEAR(value(petz_divergence(rho, rho, 2.0)), 0.0, 1e-12);
  const auto inf = petz_divergence(diag({1, 0}), diag({0, 1}), 2.0);
  EXPECT_TRUE(inf.is_infinite());
  EXPECT_EQ(inf.support_condition, SupportCondition::KernelViolation);
  EXPECT_THROW(inf.finite(), Error);
  const double expect = std::log2((diag({0.25, 0.25}) * diag({4.0, 4.0 / 3.0})).trace().real());
  EXPECT_NEAR(value(petz_divergence(diag({0.5, 0.5}), diag({0.25, 0.75}), 2.0)), expect, 1e-14);
  EXPECT_THROW(petz_divergence(rho, rho, -0.5), Error);

  // alpha < 1: orthogonal supports are infinite, overlapping ones finite
  EXPECT_TRUE(petz_divergence(diag({1, 0}), diag({0, 1}), 0.5).is_infinite());
  const auto partial = petz_divergence(diag({0.5, 0.5}), diag({1, 0}), 0.5);
  EXPECT_FALSE(partial.is_infinite());
  EXPECT_EQ(partial.support_condition, SupportCondition::NotOrthogonal);
  EXPECT_NEAR(partial.finite(), -2.0 * std::log2(std::sqrt(0.5)), 1e-14);
}

TEST(SandwichedDivergence, Examples) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix rho = random_density(rng, 3), sigma = random_density(rng, 3, rep % 2 ? 0 : 2);
    EXPECT_NEAR(value(sandwiched_divergence(rho, rho, 2.0)), 0.0, 1e-10);
    const auto half = sandwiched_divergence(rho, sigma, 0.5);
    EXPECT_NEAR(half.finite(), -2.0 * std::log2(fidelity(rho, sigma)), 1e-9);
  }
  const CMatrix p = diag({0.2, 0.3, 0.5}), q = diag({0.6, 0.1, 0.3});
  EXPECT_NEAR(value(sandwiched_divergence(p, q, 2.0)), value(petz_divergence(p, q, 2.0)), 1e-12);
  EXPECT_TRUE(sandwiched_divergence(diag({1, 0}), diag({0, 1}), 2.0).is_infinite());
  EXPECT_THROW(sandwiched_divergence(p, q, 0.0), Error);
}

TEST(RelativeEntropy, Examples) {
  Rng rng(4);
  const CMatrix rho = random_density(rng, 3);
  EXPECT_NEAR(value(relative_entropy(rho, rho)), 0.0, 1e-12);
  EXPECT_NEAR(value(relative_entropy(0.5 * CMatrix::Identity(2, 2), 2.0 * CMatrix::Identity(2, 2))), -2.0, 1e-14);
  EXPECT_TRUE(relative_entropy(diag({0.5, 0.5}), diag({1, 0})).is_infinite());
  for (int rep = 0; rep < 20; ++rep) {
    const CMatrix r = random_density(rng, 3), s = random_density(rng, 3);
    const auto ch = random_channel(rng, 3, 2, 3);
    const double before = value(relative_entropy(r, s));
    const double after = value(relative_entropy(apply_channel(ch, r), apply_channel(ch, s)));
    EXPECT_GE(before, after - 1e-9);
  }
}

TEST(Divergences, ContinuityAtOrderOne) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const bool commuting = rep % 2 == 0;
    const CMatrix r = commuting ? diag({0.1, 0.3, 0.6}) : random_density(rng, 3);
    const CMatrix s = commuting ? CMatrix(random_density(rng, 3).diagonal().asDiagonal()) : random_density(rng, 3);
    const CMatrix sn = s / s.trace().real();
    const double d = value(relative_entropy(r, sn));
    for (double a : {1.0 - 1e-4, 1.0 + 1e-4}) {
      EXPECT_NEAR(value(petz_divergence(r, sn, a)), d, 1e-3);
      EXPECT_NEAR(value(sandwiched_divergence(r, sn, a)), d, 1e-3);
    }
  }
}

TEST(Divergences, SandwichedMonotoneInOrder) {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const CMatrix r = random_density(rng, 3), s = random_psd(rng, 3);
    const double h = value(sandwiched_divergence(r, s, 0.5));
    const double one = value(relative_entropy(r, s));
    const double two = value(sandwiched_divergence(r, s, 2.0));
    EXPECT_LE(h, one + 1e-9);
    EXPECT_LE(one, two + 1e-9);
  }
}

TEST(MinPetzOrder2, ProductAndPureExamples) {
  Rng rng(7);
  const CMatrix sr = 0.5 * CMatrix::Identity(2, 2);
  const auto prod = rb(detail::kron(sr, random_density(rng, 3)), 2, 3);
  EXPECT_NEAR(min_petz_mi_order2(prod, matrix_power_on_support(sr, -1.0)), -2.0, 1e-12);

  // maximally entangled: W_R = 2 * identity, compare to the tau grid
  const auto phi = rb(phi_plus(), 2, 2);
  const CMatrix w = 2.0 * CMatrix::Identity(2, 2);
  const double grid = oracle::minimize_over_qubit_states(
      [&](const CMatrix& tau) { return petz_divergence(phi.matrix(), detail::kron(w, tau), 2.0).finite(); });
  EXPECT_NEAR(min_petz_mi_order2(phi, w), grid, 1e-6);

  // sigma_B pure: the only admissible tau is sigma_B itself
  const CMatrix pure_b = diag({1, 0});
  const auto s = rb(detail::kron(random_density(rng, 2), pure_b), 2, 2);
  const CMatrix wr = inverse_marginal_r(s);
  EXPECT_NEAR(min_petz_mi_order2(s, wr), petz_divergence(s.matrix(), detail::kron(wr, pure_b), 2.0).finite(), 1e-10);
}

TEST(MinPetzOrder2, MatchesGridOnRandomStates) {
  Rng rng(8);
  for (int rep = 0; rep < 3; ++rep) {
    const auto s = rb(random_density(rng, 4), 2, 2);
    const CMatrix w = inverse_marginal_r(s);
    const double grid = oracle::minimize_over_qubit_states(
        [&](const CMatrix& tau) { return petz_divergence(s.matrix(), detail::kron(w, tau), 2.0).finite(); });
    EXPECT_NEAR(min_petz_mi_order2(s, w), grid, 1e-6);
  }
}

TEST(MinPetzOrder2, SupportViolation) {
  const auto s = rb(phi_plus(), 2, 2);
  EXPECT_THROW(min_petz_mi_order2(s, diag({1, 0})), Error);
}

TEST(SinglyMinHalf, Examples) {
  Rng rng(9);
  const auto prod = rb(detail::kron(random_density(rng, 2), random_density(rng, 2)), 2, 2, "E");
  EXPECT_NEAR(singly_min_petz_mi_half(prod), 0.0, 1e-10);

  for (int rep = 0; rep < 3; ++rep) {
    const auto s = rb(random_density(rng, 4), 2, 2, "E");
    const CMatrix sr = s.reduce({"R"}).matrix();
    const double grid = oracle::minimize_over_qubit_states(
        [&](const CMatrix& tau) { return petz_divergence(s.matrix(), detail::kron(sr, tau), 0.5).finite(); });
    EXPECT_NEAR(singly_min_petz_mi_half(s), grid, 1e-6);
  }

  // maximally entangled pure sigma_RE; the complementary sigma_RB is then I/2 (x) |0><0|
  const auto phi = rb(phi_plus(), 2, 2, "E");
  const auto phi_b = rb(detail::kron(0.5 * CMatrix::Identity(2, 2), diag({1, 0})), 2, 2);
  EXPECT_NEAR(singly_min_petz_mi_half(phi), 2.0, 1e-12);
  EXPECT_NEAR(singly_min_petz_mi_half(phi), -sandwiched_mi_up(phi_b, inverse_marginal_r(phi_b)), 1e-9);
}

TEST(SandwichedUp, Examples) {
  Rng rng(10);
  const CMatrix sr = 0.5 * CMatrix::Identity(2, 2);
  const auto prod = rb(detail::kron(sr, random_density(rng, 3)), 2, 3);
  EXPECT_NEAR(sandwiched_mi_up(prod, inverse_marginal_r(prod)), -2.0, 1e-12);

  for (int rep = 0; rep < 20; ++rep) {
    const auto s = rb(random_density(rng, 6, rep % 3 == 0 ? 3 : 0), 2, 3);
    const std::size_t dr = 2, db = 3;
    const CMatrix sig_r = s.reduce({"R"}).matrix(), sig_b = s.reduce({"B"}).matrix();
    const CMatrix half = matrix_power_on_support(s.matrix(), 0.5);
    const CMatrix mid = detail::kron(matrix_power_on_support(sig_r, 0.5), matrix_power_on_support(sig_b, -0.5));
    const double closed = std::log2((half * mid * half).squaredNorm());
    (void)dr, (void)db;
    EXPECT_NEAR(sandwiched_mi_up(s, inverse_marginal_r(s)), closed, 1e-10);
  }

  // pure product: log tr[sigma_R^3] = 0
  const auto pp = rb(detail::kron(diag({1, 0}), diag({0, 1})), 2, 2);
  EXPECT_NEAR(sandwiched_mi_up(pp, inverse_marginal_r(pp)), 0.0, 1e-12);
}

TEST(SandwichedUpUpHalf, Examples) {
  Rng rng(11);
  const auto prod = rb(detail::kron(random_density(rng, 2), random_density(rng, 3)), 2, 3, "E");
  EXPECT_NEAR(sandwiched_mi_upup_half(prod), 0.0, 1e-10);
  EXPECT_NEAR(sandwiched_mi_upup_half(rb(phi_plus(), 2, 2, "E")), 2.0, 1e-12);
  // No universal order between the two order-1/2 quantities; both sit below
  // the unminimized Petz value D_{1/2}(sigma || sigma_R (x) sigma_E).
  int sandwiched_larger = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto s = rb(random_density(rng, 6), 2, 3, "E");
    const CMatrix prod_marg = detail::kron(s.reduce({"R"}).matrix(), s.reduce({"E"}).matrix());
    const double petz = petz_divergence(s.matrix(), prod_marg, 0.5).finite();
    EXPECT_LE(sandwiched_mi_upup_half(s), petz + 1e-9);
    EXPECT_LE(singly_min_petz_mi_half(s), petz + 1e-9);
    sandwiched_larger += sandwiched_mi_upup_half(s) > singly_min_petz_mi_half(s) ? 1 : 0;
  }
  EXPECT_GT(sandwiched_larger, 0);
  EXPECT_LT(sandwiched_larger, 30);
}

TEST(Duality, PurePairsOfMarginals) {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d_a = 2 + static_cast<std::size_t>(rep % 3);
    const std::size_t d_b = 2 + static_cast<std::size_t>((rep / 3) % 2);
    const auto t = random_triple(rng, d_a, d_b, 2 + static_cast<std::size_t>(rep % 3), rep % 4 == 0 ? 2 : 0);
    const CMatrix w = inverse_marginal_r(t.sigma_rb);
    EXPECT_NEAR(min_petz_mi_order2(t.sigma_rb, w), -sandwiched_mi_upup_half(t.sigma_re), 1e-8);
    EXPECT_NEAR(sandwiched_mi_up(t.sigma_rb, w), -singly_min_petz_mi_half(t.sigma_re), 1e-8);
  }
}

TEST(EpsilonSw, Examples) {
  for (auto code : {CodeKind::BitFlip3, CodeKind::Lncy4}) {
    const auto src = purify(make_code_source(code));
    const auto id = make_channel("identity", 0.0, code_qubits(code));
    EXPECT_NEAR(epsilon_sw(output_state(src, id)), 0.0, 1e-10);
  }

  // bitflip3 at p = 0.25: entropy route H(R|B)_sigma - H(R|A)_rho
  const auto src = purify(make_code_source(CodeKind::BitFlip3));
  const auto s = output_state(src, make_channel("bitflip", 0.25, 3));
  const double h_rb = entropy_derived(s, DerivedEntropy::Conditional, "R");
  const double h_ra = entropy_derived(src.state(), DerivedEntropy::Conditional, "R");
  EXPECT_NEAR(epsilon_sw(s), h_rb - h_ra, 1e-9);

  const auto prod = rb(detail::kron(0.5 * CMatrix::Identity(2, 2), diag({0.3, 0.7})), 2, 2);
  EXPECT_NEAR(epsilon_sw(prod), 2.0, 1e-12);
}

TEST(SwOriginalBound, Examples) {
  EXPECT_DOUBLE_EQ(sw_original_bound(0.0), 1.0);
  EXPECT_NEAR(sw_original_bound(2.0 / std::numbers::ln2), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(sw_original_bound(-1e-13), 1.0);
  try {
    sw_original_bound(-1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeEpsilon);
  }
  for (int i = 0; i <= 1000; ++i) {
    const double eps = 10.0 * i / 1000.0;
    EXPECT_GE(std::exp2(-eps / 2.0), sw_original_bound(eps));
  }
}
