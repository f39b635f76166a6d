#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "petzlab/matcore.hpp"
#include "petzlab/random.hpp"

using namespace petzlab;

namespace {

// Characteristic polynomial coefficients (monic, highest first) by Faddeev-LeVerrier.
std::vector<cplx> char_poly(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  std::vector<cplx> c(static_cast<std::size_t>(n) + 1);
  c[0] = 1.0;
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + c[static_cast<std::size_t>(k - 1)] * CMatrix::Identity(n, n);
    c[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return c;
}

// Durand-Kerner simultaneous root iteration.
std::vector<double> poly_roots(const std::vector<cplx>& c) {
  const std::size_t n = c.size() - 1;
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(cplx(0.4, 0.9), static_cast<double>(i)) * 3.0;
  auto eval = [&](cplx x) {
    cplx v = 0.0;
    for (const auto& ci : c) v = v * x + ci;
    return v;
  };
  for (int iter = 0; iter < 2000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      z[i] -= eval(z[i]) / den;
    }
  }
  std::vector<double> out;
  for (auto r : z) out.push_back(r.real());
  std::sort(out.rbegin(), out.rend());
  return out;
}

CMatrix diag(std::initializer_list<double> v) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

}  // namespace

TEST(HermEig, IdentityAndDiagonal) {
  auto e = herm_eig(CMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values(i), 1.0, 1e-14);
  e = herm_eig(diag({2, 0, -1}));
  EXPECT_NEAR(e.values(0), 2.0, 1e-14);
  EXPECT_NEAR(e.values(1), 0.0, 1e-14);
  EXPECT_NEAR(e.values(2), -1.0, 1e-14);
}

TEST(HermEig, MatchesCharacteristicPolynomialRoots) {
  Rng rng(11);
  // keep the spectrum well separated so Durand-Kerner converges cleanly
  const CMatrix h = random_hermitian(rng, 6);
  const auto roots = poly_roots(char_poly(h));
  const auto e = herm_eig(h);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(e.values(i), roots[static_cast<std::size_t>(i)], 1e-8);
}

TEST(HermEig, ReconstructionAndUnitarity) {
  Rng rng(12);
  std::uniform_int_distribution<int> dim(1, 32);
  for (int rep = 0; rep < 1000; ++rep) {
    const CMatrix h = random_hermitian(rng, dim(rng));
    const auto e = herm_eig(h);
    const CMatrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    ASSERT_LE((h - rec).norm(), 1e-10 * std::max(1.0, h.norm()));
    ASSERT_LE((e.vectors.adjoint() * e.vectors - CMatrix::Identity(h.rows(), h.rows())).norm(), 1e-12 * h.rows());
    for (Eigen::Index i = 1; i < e.values.size(); ++i) ASSERT_GE(e.values(i - 1), e.values(i));
  }
}

TEST(HermEig, RejectsAsymmetricAndNonFinite) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  try {
    herm_eig(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
  m(0, 1) = std::nan("");
  try {
    herm_eig(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
  }
}

TEST(Svd, Reconstruction) {
  Rng rng(13);
  const CMatrix m = random_ginibre(rng, 5, 3);
  const auto s = svd(m);
  const CMatrix sig = CMatrix::Zero(5, 3) + [&] {
    CMatrix d = CMatrix::Zero(5, 3);
    for (Eigen::Index i = 0; i < s.s.size(); ++i) d(i, i) = s.s(i);
    return d;
  }();
  EXPECT_LE((m - s.u * sig * s.v.adjoint()).norm(), 1e-10 * m.norm());
  EXPECT_LE((s.u.adjoint() * s.u - CMatrix::Identity(5, 5)).norm(), 1e-12 * 5);
  EXPECT_LE((s.v.adjoint() * s.v - CMatrix::Identity(3, 3)).norm(), 1e-12 * 3);
}

TEST(MatrixPower, Examples) {
  EXPECT_LE((matrix_power_on_support(CMatrix::Identity(2, 2), -0.5) - CMatrix::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LE((matrix_power_on_support(diag({4, 0}), 0.5) - diag({2, 0})).norm(), 1e-14);
  const CMatrix u = matrix_power_on_support(diag({std::exp(1.0), 0}), cplx(0, 1));
  EXPECT_NEAR(std::abs(u(0, 0) - std::exp(cplx(0, 1))), 0.0, 1e-14);
  EXPECT_EQ(u(1, 1), cplx(0, 0));
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-14);
}

TEST(MatrixPower, ComposesOnSupport) {
  Rng rng(14);
  std::uniform_real_distribution<double> re(-1.5, 1.5);
  for (int rep = 0; rep < 50; ++rep) {
    const CMatrix p = random_psd(rng, 5, 3);
    const cplx z1(re(rng), re(rng));
    const cplx z2(re(rng), re(rng));
    const CMatrix lhs = matrix_power_on_support(p, z1) * matrix_power_on_support(p, z2);
    const CMatrix rhs = matrix_power_on_support(p, z1 + z2);
    ASSERT_LE((lhs - rhs).norm(), 1e-9 * std::max(1.0, rhs.norm()));
  }
}

TEST(MatrixPower, RejectsNegative) {
  try {
    matrix_power_on_support(diag({1, -1}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPsd);
  }
}

TEST(PartialTrace, Examples) {
  Rng rng(15);
  const CMatrix a = random_density(rng, 2);
  const CMatrix b = random_density(rng, 3);
  EXPECT_LE((partial_trace(detail::kron(a, b), 2, 3, Keep::First) - a).norm(), 1e-14);
  EXPECT_LE((partial_trace(detail::kron(a, b), 2, 3, Keep::Second) - b).norm(), 1e-14);
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  EXPECT_LE((partial_trace(phi * phi.adjoint(), 2, 2, Keep::First) - 0.5 * CMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(PartialTrace, MatchesIndexSumOracle) {
  Rng rng(16);
  const CMatrix m = random_psd(rng, 4);
  CMatrix ra = CMatrix::Zero(2, 2);
  CMatrix rb = CMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        ra(i, j) += m(i * 2 + k, j * 2 + k);
        rb(i, j) += m(k * 2 + i, k * 2 + j);
      }
    }
  }
  EXPECT_LE((partial_trace(m, 2, 2, Keep::First) - ra).norm(), 1e-13);
  EXPECT_LE((partial_trace(m, 2, 2, Keep::Second) - rb).norm(), 1e-13);
}

TEST(PartialTrace, ThreeFactorsAndMismatch) {
  Rng rng(17);
  const CMatrix a = random_density(rng, 2), b = random_density(rng, 3), c = random_density(rng, 2);
  const CMatrix abc = detail::kron(detail::kron(a, b), c);
  const std::size_t dims[] = {2, 3, 2};
  const std::size_t keep_ac[] = {0, 2};
  const std::size_t keep_b[] = {1};
  EXPECT_LE((partial_trace(abc, dims, keep_ac) - detail::kron(a, c)).norm(), 1e-14);
  EXPECT_LE((partial_trace(abc, dims, keep_b) - b).norm(), 1e-14);
  try {
    partial_trace(abc, 2, 2, Keep::First);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Schatten, Examples) {
  EXPECT_NEAR(schatten_norm(CMatrix::Identity(3, 3), 2), std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(schatten_norm(diag({3, 4}), 1), 7.0, 1e-14);
  Rng rng(18);
  const CMatrix m = random_ginibre(rng, 5, 5);
  const auto s = svd(m);
  double acc = 0;
  for (Eigen::Index i = 0; i < s.s.size(); ++i) acc += std::sqrt(s.s(i));
  EXPECT_NEAR(schatten_norm(m, 0.5), acc * acc, 1e-10 * acc * acc);
  const double two = schatten_norm(m, 2);
  EXPECT_NEAR(two * two, (m.adjoint() * m).trace().real(), 1e-10 * two * two);
  try {
    schatten_norm(m, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidOrder);
  }
}

TEST(Fidelity, Examples) {
  Rng rng(19);
  const CMatrix rho = random_density(rng, 3);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(diag({1, 0}), diag({0, 1})), 0.0, 1e-14);
  EXPECT_NEAR(fidelity(diag({1, 0}), 0.5 * CMatrix::Identity(2, 2)), 1.0 / std::sqrt(2.0), 1e-14);
  try {
    fidelity(diag({1, 0}), diag({1, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  try {
    fidelity(diag({1, 1}), diag({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotState);
  }
}

TEST(Fidelity, SymmetricAndMultiplicative) {
  Rng rng(20);
  for (int rep = 0; rep < 30; ++rep) {
    const CMatrix r1 = random_density(rng, 2), s1 = random_density(rng, 2, 1);
    const CMatrix r2 = random_density(rng, 3), s2 = random_density(rng, 3);
    ASSERT_NEAR(fidelity(r1, s1), fidelity(s1, r1), 1e-9);
    ASSERT_NEAR(fidelity(detail::kron(r1, r2), detail::kron(s1, s2)), fidelity(r1, s1) * fidelity(r2, s2), 1e-9);
  }
}

// 0 <= Re tr[X Y^{s+it} X Y^{s-it}] <= tr[X Y^s X Y^s], imaginary part negligible.
TEST(TraceInequality, RotatedPowersAreDominated) {
  Rng rng(21);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> s_dist(-1.0, 1.0), t_dist(-5.0, 5.0);
  for (int rep = 0; rep < 500; ++rep) {
    const Eigen::Index d = dim(rng);
    const CMatrix x = random_psd(rng, d);
    const CMatrix y = random_psd(rng, d);
    const double s = s_dist(rng), t = t_dist(rng);
    const auto ey = psd_eig(y);
    const cplx lhs = (x * matrix_power_on_support(ey, cplx(s, t)) * x * matrix_power_on_support(ey, cplx(s, -t))).trace();
    const CMatrix ys = matrix_power_on_support(ey, s);
    const double rhs = (x * ys * x * ys).trace().real();
    ASSERT_GE(lhs.real(), -1e-9);
    ASSERT_LE(lhs.real(), rhs + 1e-9 * std::max(1.0, rhs));
    ASSERT_LE(std::abs(lhs.imag()), 1e-10 * std::max(1.0, rhs));
  }
}
