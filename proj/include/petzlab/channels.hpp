#pragma once

// Named channels and code sources, addressable by the strings used in sweep
// configs.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "petzlab/error.hpp"
#include "petzlab/matcore.hpp"
#include "petzlab/quantum.hpp"

namespace petzlab {

enum class ChannelKind { BitFlip, AmplitudeDamping, Identity, Depolarizing };
enum class CodeKind { BitFlip3, Lncy4, FiveQubit };

inline ChannelKind parse_channel_kind(std::string_view name) {
  if (name == "bitflip") return ChannelKind::BitFlip;
  if (name == "amplitude_damping") return ChannelKind::AmplitudeDamping;
  if (name == "identity") return ChannelKind::Identity;
  if (name == "depolarizing") return ChannelKind::Depolarizing;
  fail(ErrorKind::InvalidParameter, "unknown channel kind '" + std::string(name) + "'");
}

inline CodeKind parse_code_kind(std::string_view name) {
  if (name == "bitflip3") return CodeKind::BitFlip3;
  if (name == "lncy4") return CodeKind::Lncy4;
  if (name == "fivequbit") return CodeKind::FiveQubit;
  fail(ErrorKind::InvalidParameter, "unknown code '" + std::string(name) + "'");
}

namespace detail {

inline CMatrix pauli(char which) {
  CMatrix m = CMatrix::Zero(2, 2);
  switch (which) {
    case 'I': m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case 'X': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = cplx(0.0, -1.0); m(1, 0) = cplx(0.0, 1.0); break;
    case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: fail(ErrorKind::InvalidParameter, "unknown Pauli");
  }
  return m;
}

// Single-qubit channel of the given kind.
inline std::vector<CMatrix> qubit_kraus(ChannelKind kind, double p) {
  std::vector<CMatrix> ops;
  switch (kind) {
    case ChannelKind::Identity:
      ops.push_back(pauli('I'));
      break;
    case ChannelKind::BitFlip:
      ops.push_back(std::sqrt(1.0 - p) * pauli('I'));
      ops.push_back(std::sqrt(p) * pauli('X'));
      break;
    case ChannelKind::AmplitudeDamping: {
      CMatrix k0 = CMatrix::Zero(2, 2);
      k0(0, 0) = 1.0;
      k0(1, 1) = std::sqrt(1.0 - p);
      CMatrix k1 = CMatrix::Zero(2, 2);
      k1(0, 1) = std::sqrt(p);
      ops.push_back(k0);
      ops.push_back(k1);
      break;
    }
    case ChannelKind::Depolarizing:
      // X -> (1-p) X + p tr[X] I/2
      ops.push_back(std::sqrt(1.0 - 3.0 * p / 4.0) * pauli('I'));
      for (char c : {'X', 'Y', 'Z'}) ops.push_back(std::sqrt(p / 4.0) * pauli(c));
      break;
  }
  return ops;
}

}  // namespace detail

/// Qubit channel of the given kind, raised to the n-th tensor power.
inline KrausChannel make_channel(ChannelKind kind, double p, std::size_t n = 1) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidParameter, "channel parameter p must lie in [0,1]");
  if (n == 0) fail(ErrorKind::InvalidParameter, "tensor power must be positive");
  KrausChannel single(detail::qubit_kraus(kind, p), {"A", 2}, {"B", 2});
  KrausChannel out = tensor_power(single, n);
  validate_cptp(out);
  return out;
}

inline KrausChannel make_channel(std::string_view kind, double p, std::size_t n = 1) {
  return make_channel(parse_channel_kind(kind), p, n);
}

inline std::size_t code_qubits(CodeKind kind) {
  switch (kind) {
    case CodeKind::BitFlip3: return 3;
    case CodeKind::Lncy4: return 4;
    case CodeKind::FiveQubit: return 5;
  }
  return 0;
}

/// Logical basis vectors |0_L>, |1_L> as columns.
inline CMatrix code_basis(CodeKind kind) {
  const std::size_t n = code_qubits(kind);
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix basis = CMatrix::Zero(dim, 2);
  auto bits = [](const char* s) {
    Eigen::Index v = 0;
    for (; *s != '\0'; ++s) v = 2 * v + (*s == '1' ? 1 : 0);
    return v;
  };
  switch (kind) {
    case CodeKind::BitFlip3:
      basis(bits("000"), 0) = 1.0;
      basis(bits("111"), 1) = 1.0;
      break;
    case CodeKind::Lncy4: {
      const double a = 1.0 / std::sqrt(2.0);
      basis(bits("0000"), 0) = a;
      basis(bits("1111"), 0) = a;
      basis(bits("0011"), 1) = a;
      basis(bits("1100"), 1) = a;
      break;
    }
    case CodeKind::FiveQubit: {
      for (const char* s : {"00000", "10010", "01001", "10100", "01010", "00101"}) basis(bits(s), 0) = 0.25;
      for (const char* s : {"11011", "00110", "11000", "11101", "00011", "11110", "01111", "10001", "01100",
                            "10111"}) {
        basis(bits(s), 0) = -0.25;
      }
      // |1_L> = X^{(x)5} |0_L>
      for (Eigen::Index i = 0; i < dim; ++i) basis(dim - 1 - i, 1) = basis(i, 0);
      break;
    }
  }
  return basis;
}

/// rho = (|0_L><0_L| + |1_L><1_L|) / 2 on a single subsystem "A".
inline DensityOperator make_code_source(CodeKind kind) {
  const CMatrix basis = code_basis(kind);
  return DensityOperator::on(0.5 * basis * basis.adjoint(), "A");
}

inline DensityOperator make_code_source(std::string_view kind) { return make_code_source(parse_code_kind(kind)); }

}  // namespace petzlab
