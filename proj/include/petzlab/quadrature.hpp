#pragma once

// Integration against beta_0(t) = (pi/2) / (cosh(pi t) + 1).
//
// With u = tanh(pi t / 2) the weight becomes du/2 on (-1, 1), so the primary
// route is composite 64-node Gauss-Legendre in u with dyadic panel
// refinement. Integrands that keep oscillating as |t| grows (cos(w t) and
// friends) are not smooth at u = +-1 and converge only linearly there; for
// those the rule falls back to composite Gauss-Legendre in t on [-8, 8],
// whose truncated tail weighs 1 - tanh(4 pi) ~ 2.4e-11.

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "petzlab/error.hpp"

namespace petzlab {

inline double beta0(double t) {
  // (pi/2)/(cosh(pi t)+1) = (pi/4) sech^2(pi t / 2), stable for large |t|
  const double s = 1.0 / std::cosh(std::numbers::pi * t / 2.0);
  return std::numbers::pi / 4.0 * s * s;
}

/// Nodes t_i and weights w_i with sum_i w_i g(t_i) ~ int beta_0 g; sum w_i = 1.
struct Beta0Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class Fn>
  double apply(Fn&& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
    return acc;
  }
};

enum class QuadratureRoute { Tanh, Truncated };

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  QuadratureRoute route = QuadratureRoute::Tanh;
  int panels = 0;
  Beta0Rule rule;
};

inline constexpr double kBeta0Cutoff = 8.0;
/// Weight of beta_0 outside [-8, 8].
inline double beta0_tail() { return 1.0 - std::tanh(std::numbers::pi * kBeta0Cutoff / 2.0); }

namespace detail {

using Gauss64 = boost::math::quadrature::gauss<double, 64>;

// Composite 64-point Gauss-Legendre nodes/weights on [a, b] split into `panels`.
inline void gauss_panels(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w) {
  const auto& abs = Gauss64::abscissa();
  const auto& wts = Gauss64::weights();
  const double h = (b - a) / panels;
  x.clear();
  w.clear();
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (std::size_t i = 0; i < abs.size(); ++i) {
      x.push_back(mid - half * abs[i]);
      w.push_back(half * wts[i]);
      if (abs[i] != 0.0) {
        x.push_back(mid + half * abs[i]);
        w.push_back(half * wts[i]);
      }
    }
  }
}

inline Beta0Rule tanh_rule(int panels) {
  std::vector<double> u, w;
  gauss_panels(-1.0, 1.0, panels, u, w);
  Beta0Rule rule;
  for (std::size_t i = 0; i < u.size(); ++i) {
    rule.nodes.push_back(2.0 / std::numbers::pi * std::atanh(u[i]));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

inline Beta0Rule truncated_rule(int panels) {
  std::vector<double> t, w;
  gauss_panels(-kBeta0Cutoff, kBeta0Cutoff, panels, t, w);
  Beta0Rule rule;
  double total = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    rule.nodes.push_back(t[i]);
    rule.weights.push_back(w[i] * beta0(t[i]));
    total += rule.weights.back();
  }
  for (auto& x : rule.weights) x /= total;
  return rule;
}

}  // namespace detail

/// int beta_0(t) g(t) dt to absolute accuracy tol, for g bounded by |g(0)|.
inline QuadratureResult beta0_quadrature(const std::function<double(double)>& g, double tol = 1e-9) {
  if (!(tol > 0.0)) fail(ErrorKind::InvalidParameter, "beta0_quadrature: tol must be positive");
  // past a few panels the tanh route is in its slow regime and differences stop meaning much
  constexpr int kMaxTanhPanels = 8;
  constexpr int kMaxTruncPanels = 1024;

  Beta0Rule prev_rule = detail::tanh_rule(1);
  double prev = prev_rule.apply(g);
  for (int panels = 2; panels <= kMaxTanhPanels; panels *= 2) {
    Beta0Rule rule = detail::tanh_rule(panels);
    const double cur = rule.apply(g);
    if (!std::isfinite(cur)) fail(ErrorKind::NonFinite, "beta0_quadrature: integrand returned NaN/Inf");
    if (std::abs(cur - prev) <= tol) {
      return {cur, std::abs(cur - prev), QuadratureRoute::Tanh, panels, std::move(rule)};
    }
    prev = cur;
  }

  // renormalized rule: error <= quadrature error + 2 * tail * sup|g|
  const double tail_err = 2.0 * beta0_tail() * std::abs(g(0.0));
  if (tail_err > tol) {
    fail(ErrorKind::ToleranceNotMet, "beta0_quadrature: truncation tail exceeds tol");
  }
  prev_rule = detail::truncated_rule(16);
  prev = prev_rule.apply(g);
  for (int panels = 32; panels <= kMaxTruncPanels; panels *= 2) {
    Beta0Rule rule = detail::truncated_rule(panels);
    const double cur = rule.apply(g);
    if (!std::isfinite(cur)) fail(ErrorKind::NonFinite, "beta0_quadrature: integrand returned NaN/Inf");
    const double est = std::abs(cur - prev) + tail_err;
    if (est <= tol) return {cur, est, QuadratureRoute::Truncated, panels, std::move(rule)};
    prev = cur;
  }
  fail(ErrorKind::ToleranceNotMet, "beta0_quadrature: no convergence after " + std::to_string(kMaxTruncPanels) +
                                       " panels");
}

}  // namespace petzlab
