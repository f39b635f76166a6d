#pragma once

// Seeded random states, channels and unitaries for property tests and audits.

#include <cstddef>
#include <random>

#include "petzlab/matcore.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

using Rng = std::mt19937_64;

inline CMatrix random_ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cplx(g(rng), g(rng));
  }
  return m;
}

/// Haar-ish isometry rows x cols (rows >= cols) from a QR of a Ginibre matrix.
inline CMatrix random_isometry(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const CMatrix g = random_ginibre(rng, rows, cols);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(rows, cols);
  const CMatrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline CMatrix random_unitary(Rng& rng, Eigen::Index d) { return random_isometry(rng, d, d); }

inline CMatrix random_hermitian(Rng& rng, Eigen::Index d) {
  const CMatrix g = random_ginibre(rng, d, d);
  return 0.5 * (g + g.adjoint());
}

/// Random PSD operator of the given rank (full rank when rank == 0).
inline CMatrix random_psd(Rng& rng, Eigen::Index d, Eigen::Index rank = 0) {
  const CMatrix g = random_ginibre(rng, d, rank == 0 ? d : rank);
  return g * g.adjoint();
}

inline CMatrix random_density(Rng& rng, Eigen::Index d, Eigen::Index rank = 0) {
  CMatrix p = random_psd(rng, d, rank);
  p /= p.trace().real();
  return 0.5 * (p + p.adjoint());
}

/// Channel A -> B with `kraus` operators cut from a random isometry.
inline KrausChannel random_channel(Rng& rng, std::size_t d_a, std::size_t d_b, std::size_t kraus) {
  const Eigen::Index da = static_cast<Eigen::Index>(d_a);
  const Eigen::Index db = static_cast<Eigen::Index>(d_b);
  const CMatrix v = random_isometry(rng, db * static_cast<Eigen::Index>(kraus), da);
  std::vector<CMatrix> ops;
  for (std::size_t l = 0; l < kraus; ++l) ops.push_back(v.middleRows(static_cast<Eigen::Index>(l) * db, db));
  KrausChannel ch(std::move(ops), {"A", d_a}, {"B", d_b});
  validate_cptp(ch);
  return ch;
}

}  // namespace petzlab
