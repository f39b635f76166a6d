#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "petzlab/bench.hpp"

using namespace petzlab;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::IoError;
}

std::string csv_of(const std::vector<CurvePoint>& pts) {
  std::ostringstream os;
  emit_csv(pts, os);
  return os.str();
}

// value lookup by (series, p)
std::map<std::pair<std::string, double>, double> by_series(const std::vector<CurvePoint>& pts) {
  std::map<std::pair<std::string, double>, double> m;
  for (const auto& pt : pts) m[{pt.series, pt.p}] = pt.value;
  return m;
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config("setting = bitflip3\n");
  EXPECT_EQ(cfg.p_count, 101u);
  EXPECT_EQ(cfg.decoders.size(), 5u);
  EXPECT_EQ(cfg.bounds.size(), 4u);
  EXPECT_DOUBLE_EQ(cfg.tol, 1e-7);
  EXPECT_EQ(cfg.grid().front(), 0.0);
  EXPECT_EQ(cfg.grid().back(), 1.0);
}

TEST(Config, FullExample) {
  const auto cfg = parse_config(
      "# comment line\n"
      "setting = lncy4\n"
      "p_start = 0.1   # trailing comment\n"
      "p_stop = 0.3\n"
      "p_count = 3\n"
      "decoders = sw, petz\n"
      "bounds =\n"
      "tol = 1e-8\n"
      "out = curves.csv\n"
      "workers = 4\n");
  EXPECT_EQ(cfg.decoders, (std::vector<std::string>{"sw", "petz"}));
  EXPECT_TRUE(cfg.bounds.empty());
  EXPECT_EQ(cfg.out, "curves.csv");
  EXPECT_EQ(cfg.workers, 4u);
  ASSERT_EQ(cfg.grid().size(), 3u);
  EXPECT_NEAR(cfg.grid()[1], 0.2, 1e-15);
}

TEST(Config, Errors) {
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\np_start = 0.5\np_stop = 0.2\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("p_count = 3\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("setting = steane\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\np_stop = 1.5\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\ndecoders = sw,magic\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\ndecoders =\nbounds =\n"); }), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\nworkers = 0\n"); }), ErrorKind::ValidationError);

  try {
    parse_config("setting = bitflip3\n  colour = red\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2, column 3"), std::string::npos) << e.what();
  }
  try {
    parse_config("setting = bitflip3\np_count = many\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 2, column 11"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { parse_config("setting bitflip3\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_config("setting = bitflip3\nsetting = lncy4\n"); }), ErrorKind::ParseError);
}

TEST(Csv, Format) {
  EXPECT_EQ(csv_of({}), "setting,p,series,value,seconds,flags\n");
  const std::vector<CurvePoint> one{{"bitflip3", 0.25, "petz", 0.7589285714285714, 1.5, ""}};
  EXPECT_EQ(csv_of(one), "setting,p,series,value,seconds,flags\nbitflip3,0.25,petz,0.758928571429,0,\n");
  EXPECT_EQ(csv_of(one), csv_of(one));

  const std::vector<CurvePoint> pts{{"s", 0.5, "sw", 1.0, 0, ""},
                                    {"s", 0.1, "sw", 1.0, 0, ""},
                                    {"s", 0.5, "petz", std::nan(""), 0, "error:NotPsd"}};
  EXPECT_EQ(csv_of(pts),
            "setting,p,series,value,seconds,flags\n"
            "s,0.5,petz,nan,0,error:NotPsd\n"
            "s,0.1,sw,1,0,\n"
            "s,0.5,sw,1,0,\n");

  EXPECT_EQ(kind_of([&] { emit_csv(pts, std::string("/nonexistent-dir/x.csv")); }), ErrorKind::IoError);
}

TEST(Sweep, PerfectRecoveryAtZero) {
  auto cfg = parse_config("setting = bitflip3\np_stop = 0\np_count = 1\n");
  const auto pts = run_sweep(cfg);
  EXPECT_EQ(pts.size(), 9u);
  for (const auto& pt : pts) {
    EXPECT_TRUE(pt.flags.empty()) << pt.series << " " << pt.flags;
    EXPECT_NEAR(pt.value, 1.0, 1e-6) << pt.series;  // bounds included: eps = 0 makes them all 1
  }
}

TEST(Sweep, BitflipPetzEqualsTwirled) {
  const auto pts = run_sweep(parse_config("setting = bitflip3\np_count = 5\ndecoders = petz,twirled\nbounds =\n"));
  const auto m = by_series(pts);
  for (double p : parse_config("setting = bitflip3\np_count = 5\n").grid()) {
    EXPECT_NEAR(m.at({"petz", p}), m.at({"twirled", p}), 1e-8) << p;
  }
}

TEST(Sweep, LncyOrdering) {
  const auto pts = run_sweep(parse_config("setting = lncy4\np_start = 0.2\np_stop = 0.2\np_count = 1\nbounds =\n"));
  const auto m = by_series(pts);
  const double opt = m.at({"optimal", 0.2}), sw = m.at({"sw", 0.2}), petz = m.at({"petz", 0.2}),
               tw = m.at({"twirled", 0.2});
  EXPECT_GE(opt, sw - 1e-7);
  EXPECT_GT(sw - petz, 1e-6);
  EXPECT_GT(petz - tw, 1e-6);
}

TEST(Sweep, WorkersDoNotChangeValues) {
  auto cfg = parse_config("setting = lncy4\np_count = 6\n");
  const auto serial = csv_of(run_sweep(cfg));
  cfg.workers = 3;
  EXPECT_EQ(csv_of(run_sweep(cfg)), serial);
  EXPECT_EQ(csv_of(run_sweep(cfg)), serial);
}

TEST(Sweep, ErrorFlags) {
  const auto flag = detail::error_flag(std::make_exception_ptr(Error(ErrorKind::ToleranceNotMet, "x")));
  EXPECT_EQ(flag, "error:ToleranceNotMet");
  EXPECT_EQ(detail::error_flag(std::make_exception_ptr(std::runtime_error("x"))), "error:Unknown");
}

TEST(Sweep, EnvWorkers) {
  auto cfg = parse_config("setting = identity\n");
  ::setenv("PETZLAB_WORKERS", "3", 1);
  apply_env_workers(cfg);
  EXPECT_EQ(cfg.workers, 3u);
  ::setenv("PETZLAB_WORKERS", "zero", 1);
  EXPECT_EQ(kind_of([&] { apply_env_workers(cfg); }), ErrorKind::ValidationError);
  ::unsetenv("PETZLAB_WORKERS");
}

TEST(Audit, IdentityAndBitflip) {
  const auto id = audit_invariants(parse_config("setting = identity\np_count = 3\n"));
  EXPECT_TRUE(id.ok());
  const auto bf = audit_invariants(parse_config("setting = bitflip3\np_count = 21\n"));
  EXPECT_EQ(bf.violations(), 0u);
  for (const auto& e : bf.entries) EXPECT_TRUE(e.passed) << e.p << " " << e.check << " " << e.detail;
  // every point carries the bracket check since bitflip3 reduces to at most 16
  EXPECT_EQ(std::count_if(bf.entries.begin(), bf.entries.end(), [](const AuditEntry& e) { return e.check == "bk_bracket"; }), 21);
}

TEST(Audit, CorruptedDecoderIsCaught) {
  AuditOptions opt;
  opt.tamper = [](const KrausChannel& ch) {
    std::vector<CMatrix> ops;
    for (const auto& k : ch.kraus()) ops.push_back(1.01 * k);
    return KrausChannel(ops, ch.input(), ch.output());
  };
  const auto rep = audit_invariants(parse_config("setting = bitflip3\np_start = 0.2\np_stop = 0.2\np_count = 1\n"), opt);
  EXPECT_FALSE(rep.ok());
  bool surfaced = false;
  for (const auto& e : rep.entries) surfaced |= e.detail == "error:NotTracePreserving";
  EXPECT_TRUE(surfaced);
}
