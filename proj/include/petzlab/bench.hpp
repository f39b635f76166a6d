#pragma once

// Experiment runner: settings registry, sweep configs, parameter sweeps,
// invariant audits and CSV output.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "petzlab/channels.hpp"
#include "petzlab/decoders.hpp"
#include "petzlab/error.hpp"
#include "petzlab/infomeasures.hpp"
#include "petzlab/optdec.hpp"
#include "petzlab/quadrature.hpp"
#include "petzlab/sw.hpp"

namespace petzlab {

/// A source and a one-parameter channel family.
struct Setting {
  std::string name;
  DensityOperator source;
  std::function<KrausChannel(double)> channel;
};

inline const std::vector<std::string>& setting_names() {
  static const std::vector<std::string> names{"bitflip3", "lncy4", "fivequbit", "identity", "depolarizing"};
  return names;
}

inline Setting make_setting(const std::string& name) {
  if (name == "bitflip3") {
    return {name, make_code_source(CodeKind::BitFlip3), [](double p) { return make_channel(ChannelKind::BitFlip, p, 3); }};
  }
  if (name == "lncy4") {
    return {name, make_code_source(CodeKind::Lncy4), [](double p) { return make_channel(ChannelKind::AmplitudeDamping, p, 4); }};
  }
  if (name == "fivequbit") {
    return {name, make_code_source(CodeKind::FiveQubit),
            [](double p) { return make_channel(ChannelKind::AmplitudeDamping, p, 5); }};
  }
  const auto half = DensityOperator::on(0.5 * CMatrix::Identity(2, 2));
  if (name == "identity") return {name, half, [](double) { return make_channel(ChannelKind::Identity, 0.0); }};
  if (name == "depolarizing") return {name, half, [](double p) { return make_channel(ChannelKind::Depolarizing, p); }};
  fail(ErrorKind::InvalidParameter, "unknown setting '" + name + "'");
}

inline const std::vector<std::string>& decoder_series() {
  static const std::vector<std::string> s{"sw", "petz", "twirled", "optimal", "none"};
  return s;
}

inline const std::vector<std::string>& bound_series() {
  static const std::vector<std::string> s{"lower_sw", "lower_twirled", "upper_bk", "sw_original"};
  return s;
}

struct SweepConfig {
  std::string setting;
  double p_start = 0.0;
  double p_stop = 1.0;
  std::size_t p_count = 101;
  std::vector<std::string> decoders = decoder_series();
  std::vector<std::string> bounds = bound_series();
  double tol = 1e-7;
  std::string out;  // empty: stdout
  std::size_t workers = 1;

  std::vector<double> grid() const {
    std::vector<double> ps(p_count);
    for (std::size_t i = 0; i < p_count; ++i) {
      ps[i] = p_count == 1 ? p_start : p_start + (p_stop - p_start) * static_cast<double>(i) / static_cast<double>(p_count - 1);
    }
    return ps;
  }
};

inline constexpr std::size_t kMaxSdpDim = 128;

struct CurvePoint {
  std::string setting;
  double p = 0.0;
  std::string series;
  double value = 0.0;  // NaN when the point failed or was skipped
  double seconds = 0.0;
  std::string flags;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] inline void parse_fail(std::size_t line, std::size_t col, const std::string& msg) {
  fail(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
}

template <class T>
T parse_number(const std::string& v, std::size_t line, std::size_t col, const std::string& key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) parse_fail(line, col, "bad number '" + v + "' for " + key);
  return out;
}

}  // namespace detail

/// Flat `key = value` lines; `#` starts a comment. Keys: setting, p_start,
/// p_stop, p_count, decoders, bounds, tol, out, workers. Lists are comma separated.
inline SweepConfig parse_config(std::string_view text) {
  static const std::vector<std::string> keys{"setting", "p_start", "p_stop", "p_count", "decoders",
                                             "bounds",  "tol",     "out",    "workers"};
  SweepConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::size_t key_col = line.find_first_not_of(" \t") + 1;
    if (eq == std::string_view::npos) detail::parse_fail(line_no, key_col, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::size_t value_col = eq + 1 + line.substr(eq + 1).find_first_not_of(" \t") + 1;
    if (key.empty()) detail::parse_fail(line_no, key_col, "missing key");
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) detail::parse_fail(line_no, key_col, "unknown key '" + key + "'");
    if (seen.count(key)) {
      detail::parse_fail(line_no, key_col, "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    if (key == "setting") cfg.setting = value;
    else if (key == "p_start") cfg.p_start = detail::parse_number<double>(value, line_no, value_col, key);
    else if (key == "p_stop") cfg.p_stop = detail::parse_number<double>(value, line_no, value_col, key);
    else if (key == "p_count") cfg.p_count = detail::parse_number<std::size_t>(value, line_no, value_col, key);
    else if (key == "decoders") cfg.decoders = detail::split_list(value);
    else if (key == "bounds") cfg.bounds = detail::split_list(value);
    else if (key == "tol") cfg.tol = detail::parse_number<double>(value, line_no, value_col, key);
    else if (key == "out") cfg.out = value;
    else if (key == "workers") cfg.workers = detail::parse_number<std::size_t>(value, line_no, value_col, key);
  }

  auto invalid = [](const std::string& field, const std::string& msg) {
    fail(ErrorKind::ValidationError, field + ": " + msg);
  };
  if (cfg.setting.empty()) invalid("setting", "required");
  const auto& names = setting_names();
  if (std::find(names.begin(), names.end(), cfg.setting) == names.end()) invalid("setting", "unknown '" + cfg.setting + "'");
  if (!(cfg.p_start >= 0.0 && cfg.p_start <= 1.0)) invalid("p_start", "must lie in [0, 1]");
  if (!(cfg.p_stop >= 0.0 && cfg.p_stop <= 1.0)) invalid("p_stop", "must lie in [0, 1]");
  if (cfg.p_stop < cfg.p_start) invalid("p_stop", "smaller than p_start");
  if (cfg.p_count == 0) invalid("p_count", "must be positive");
  for (const auto& d : cfg.decoders) {
    if (std::find(decoder_series().begin(), decoder_series().end(), d) == decoder_series().end()) invalid("decoders", "unknown '" + d + "'");
  }
  for (const auto& b : cfg.bounds) {
    if (std::find(bound_series().begin(), bound_series().end(), b) == bound_series().end()) invalid("bounds", "unknown '" + b + "'");
  }
  if (cfg.decoders.empty() && cfg.bounds.empty()) invalid("decoders", "no series requested");
  if (!(cfg.tol > 0.0)) invalid("tol", "must be positive");
  if (cfg.workers == 0) invalid("workers", "must be positive");
  return cfg;
}

/// PETZLAB_WORKERS overrides the configured worker count.
inline void apply_env_workers(SweepConfig& cfg) {
  if (const char* env = std::getenv("PETZLAB_WORKERS")) {
    std::size_t w = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), w);
    if (ec != std::errc() || ptr != s.data() + s.size() || w == 0) {
      fail(ErrorKind::ValidationError, "PETZLAB_WORKERS: expected a positive integer");
    }
    cfg.workers = w;
  }
}

namespace detail {

// Runs fn(i) for i in [0, count) on up to `workers` threads.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::string error_flag(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    return "error:" + std::string(to_string(err.kind()));
  } catch (const std::exception&) {
    return "error:Unknown";
  }
}

struct PointContext {
  const Setting& setting;
  double p;
  double tol;
  KrausChannel channel;
  std::optional<DensityOperator> sigma;

  const DensityOperator& sigma_rb() {
    if (!sigma) sigma = sigma_rb_of(setting.source, channel);
    return *sigma;
  }
};

// Returns the value and appends flags.
inline double series_value(PointContext& ctx, const std::string& series, std::string& flags) {
  const auto& rho = ctx.setting.source;
  const auto& n = ctx.channel;
  if (series == "sw") return fe_of_decoder(rho, n, build_sw(rho, n).decoder);
  if (series == "petz") return fe_of_decoder(rho, n, build_petz(rho, n));
  if (series == "twirled") {
    const FidelitySpectrum spec(ctx.sigma_rb());
    const auto q = beta0_quadrature([&spec](double t) { return spec.at(t); }, 1e-10);
    return q.value;
  }
  if (series == "optimal") {
    const ReducedProblem red = reduce_problem(rho, n);
    if (red.problem.dim() > kMaxSdpDim) {
      flags = "skipped:sdp_dim_" + std::to_string(red.problem.dim());
      return std::nan("");
    }
    const SdpSolution sol = solve_sdp(red.problem, ctx.tol);
    if (std::abs(sol.gap) > ctx.tol * (1.0 + std::abs(sol.primal))) flags = "gap";
    return sol.primal;
  }
  if (series == "none") return fe_of_decoder(rho, n, identity_decoder(n.d_out()));
  if (series == "lower_sw") {
    const auto& s = ctx.sigma_rb();
    return std::exp2(min_petz_mi_order2(s, inverse_marginal_r(s)));
  }
  if (series == "lower_twirled") return std::exp2(-epsilon_sw(ctx.sigma_rb()));
  if (series == "upper_bk") return std::sqrt(fe_closed_form(ctx.sigma_rb(), ClosedFormVariant::Petz));
  if (series == "sw_original") return sw_original_bound(epsilon_sw(ctx.sigma_rb()));
  fail(ErrorKind::InvalidParameter, "unknown series '" + series + "'");
}

}  // namespace detail

/// One CurvePoint per (p, series). Failures are recorded as NaN with an
/// `error:<Kind>` flag; the optimal series is skipped above kMaxSdpDim.
inline std::vector<CurvePoint> run_sweep(const SweepConfig& cfg) {
  const Setting setting = make_setting(cfg.setting);
  const std::vector<double> ps = cfg.grid();
  std::vector<std::string> series = cfg.decoders;
  series.insert(series.end(), cfg.bounds.begin(), cfg.bounds.end());
  std::vector<std::vector<CurvePoint>> slots(ps.size());
  detail::parallel_for(ps.size(), cfg.workers, [&](std::size_t i) {
    std::vector<CurvePoint> pts;
    std::optional<detail::PointContext> ctx;
    std::string ctx_error;
    try {
      ctx.emplace(detail::PointContext{setting, ps[i], cfg.tol, setting.channel(ps[i]), std::nullopt});
    } catch (...) {
      ctx_error = detail::error_flag(std::current_exception());
    }
    for (const auto& s : series) {
      CurvePoint pt{setting.name, ps[i], s, std::nan(""), 0.0, ctx_error};
      if (ctx) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
          pt.value = detail::series_value(*ctx, s, pt.flags);
        } catch (...) {
          pt.value = std::nan("");
          pt.flags = detail::error_flag(std::current_exception());
        }
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      pts.push_back(std::move(pt));
    }
    slots[i] = std::move(pts);
  });
  std::vector<CurvePoint> out;
  for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

namespace detail {

inline std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

/// Header `setting,p,series,value,seconds,flags`, rows sorted by (setting,
/// series, p). Wall times are written as 0 unless with_timings is set, so
/// that identical configs give identical bytes.
inline void emit_csv(std::vector<CurvePoint> points, std::ostream& os, bool with_timings = false) {
  std::stable_sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    if (a.setting != b.setting) return a.setting < b.setting;
    if (a.series != b.series) return a.series < b.series;
    return a.p < b.p;
  });
  os << "setting,p,series,value,seconds,flags\n";
  for (const auto& pt : points) {
    os << pt.setting << ',' << detail::fmt12(pt.p) << ',' << pt.series << ',' << detail::fmt12(pt.value) << ','
       << detail::fmt12(with_timings ? pt.seconds : 0.0) << ',' << pt.flags << '\n';
  }
}

inline void emit_csv(const std::vector<CurvePoint>& points, const std::string& path, bool with_timings = false) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  emit_csv(points, f, with_timings);
  f.flush();
  if (!f) fail(ErrorKind::IoError, "write to '" + path + "' failed");
}

struct AuditEntry {
  double p = 0.0;
  std::string check;
  bool passed = false;
  std::string detail;
};

struct AuditReport {
  std::string setting;
  std::vector<AuditEntry> entries;

  bool ok() const {
    return std::all_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.passed; });
  }
  std::size_t violations() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const AuditEntry& e) { return !e.passed; }));
  }
};

struct AuditOptions {
  double slack = 1e-8;
  double bk_slack = 1e-6;
  // applied to every constructed decoder before it is checked; tests use it to inject faults
  std::function<KrausChannel(const KrausChannel&)> tamper;
};

/// Per-point checks: closed form vs simulation, the two fidelity chains, the
/// Barnum-Knill bracket (when the reduced SDP is small enough), decoder
/// CPTP-ness; plus one beta_0 normalization check.
inline AuditReport audit_invariants(const SweepConfig& cfg, const AuditOptions& opt = {}) {
  const Setting setting = make_setting(cfg.setting);
  const std::vector<double> ps = cfg.grid();
  AuditReport report{setting.name, {}};
  {
    const auto q = beta0_quadrature([](double) { return 1.0; }, 1e-12);
    double total = 0.0;
    for (double w : q.rule.weights) total += w;
    const double err = std::max(std::abs(q.value - 1.0), std::abs(total - 1.0));
    report.entries.push_back({0.0, "beta0_normalization", err <= 1e-10, detail::fmt12(err)});
  }
  std::vector<std::vector<AuditEntry>> slots(ps.size());
  detail::parallel_for(ps.size(), cfg.workers, [&](std::size_t i) {
    const double p = ps[i];
    auto& out = slots[i];
    auto record = [&](const std::string& check, const std::function<std::string()>& body) {
      try {
        const std::string msg = body();
        out.push_back({p, check, msg.empty(), msg});
      } catch (...) {
        out.push_back({p, check, false, detail::error_flag(std::current_exception())});
      }
    };
    auto checked = [&](const KrausChannel& ch) {
      KrausChannel d = opt.tamper ? opt.tamper(ch) : ch;
      validate_cptp(d, 1e-9);
      return d;
    };
    const auto& rho = setting.source;
    KrausChannel n = setting.channel(p);
    const DensityOperator sigma = sigma_rb_of(rho, n);
    const double s = opt.slack;

    record("closed_form", [&]() -> std::string {
      const PetzFamily fam(rho, n);
      std::string msg;
      for (double t : {0.0, 0.5, -1.0}) {
        const double direct = fe_of_decoder(rho, n, checked(fam.rotated(t).channel));
        const double closed = fe_closed_form(sigma, ClosedFormVariant::Rotated, t);
        if (std::abs(direct - closed) > s) msg += "t=" + detail::fmt12(t) + " diff " + detail::fmt12(direct - closed) + ";";
      }
      return msg;
    });
    record("twirled_chain", [&]() -> std::string {
      const double petz = fe_closed_form(sigma, ClosedFormVariant::Petz);
      const double tw = fe_closed_form(sigma, ClosedFormVariant::Twirled, 0.0, 1e-10);
      const double lower = std::exp2(-epsilon_sw(sigma));
      if (petz >= tw - s && tw >= lower - s) return {};
      return "petz " + detail::fmt12(petz) + " twirled " + detail::fmt12(tw) + " lower " + detail::fmt12(lower);
    });
    record("sw_chain", [&]() -> std::string {
      const double f_sw = fe_of_decoder(rho, n, checked(build_sw(rho, n).decoder.channel));
      const double mid = std::exp2(min_petz_mi_order2(sigma, inverse_marginal_r(sigma)));
      const double lower = std::exp2(-epsilon_sw(sigma));
      if (f_sw >= mid - s && mid >= lower - s) return {};
      return "sw " + detail::fmt12(f_sw) + " I2 " + detail::fmt12(mid) + " eps " + detail::fmt12(lower);
    });
    record("decoders_cptp", [&]() -> std::string {
      checked(build_twirled_petz(rho, n).decoder.channel);
      return {};
    });
    const ReducedProblem red = reduce_problem(rho, n);
    if (red.problem.dim() <= kMaxSdpDim) {
      record("bk_bracket", [&]() -> std::string {
        const double f_opt = solve_sdp(red.problem, cfg.tol).primal;
        const double petz = fe_closed_form(sigma, ClosedFormVariant::Petz);
        if (f_opt * f_opt - opt.bk_slack <= petz && petz <= f_opt + opt.bk_slack) return {};
        return "opt " + detail::fmt12(f_opt) + " petz " + detail::fmt12(petz);
      });
    }
  });
  for (auto& e : slots) report.entries.insert(report.entries.end(), e.begin(), e.end());
  return report;
}

}  // namespace petzlab
