#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "stochdisc/bench.hpp"
#include "stochdisc/errors.hpp"

using namespace stochdisc;
using namespace stochdisc::bench;

namespace {

BenchConfig small_config() {
  BenchConfig cfg;
  cfg.runs = 3;
  cfg.t_grid = {0.1, 1.0, 10.0};
  return cfg;
}

BenchRecord rec(Method m, double t, std::optional<double> eps,
                Status status = Status::ok) {
  BenchRecord r;
  r.method = m;
  r.t = t;
  r.epsilon = eps;
  r.status = status;
  return r;
}

}  // namespace

TEST(Grid, DefaultGrid) {
  const auto g = default_t_grid();
  ASSERT_EQ(g.size(), 21u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-2);
  EXPECT_DOUBLE_EQ(g.back(), 1e2);
  EXPECT_EQ(g[10], 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_NEAR(std::log10(g[i] / g[i - 1]), 0.2, 1e-12);
  }
}

TEST(Config, Validation) {
  BenchConfig cfg = small_config();
  cfg.runs = 0;
  EXPECT_THROW(run_benchmark(cfg), Error);
  cfg = small_config();
  cfg.t_grid = {1.0, 0.5};
  EXPECT_THROW(run_benchmark(cfg), Error);
  cfg.t_grid = {0.0, 1.0};
  EXPECT_THROW(run_benchmark(cfg), Error);
}

TEST(Run, ScalarSingleRecord) {
  BenchConfig cfg;
  cfg.ensemble.n = 1;
  cfg.ensemble.m = 1;
  cfg.ensemble.p = 0;
  cfg.runs = 1;
  cfg.methods = {Method::proposed};
  cfg.t_grid = {1.0};
  const auto records = run_benchmark(cfg);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].status, Status::ok);
  ASSERT_TRUE(records[0].epsilon);
  EXPECT_LE(*records[0].epsilon, 1e-6);
}

TEST(Run, EmptyMethodSet) {
  BenchConfig cfg = small_config();
  cfg.methods.clear();
  EXPECT_TRUE(run_benchmark(cfg).empty());
}

TEST(Run, VanLoanFailsAtLongHorizonInFloat) {
  BenchConfig cfg;
  cfg.runs = 2;
  cfg.methods = {Method::van_loan};
  cfg.t_grid = {100.0};
  for (const auto& r : run_benchmark(cfg)) {
    EXPECT_TRUE(r.status == Status::overflow || (r.epsilon && *r.epsilon > 1.0));
  }
}

TEST(Run, OrderingAndStatusInvariant) {
  BenchConfig cfg = small_config();
  cfg.methods = {Method::van_loan, Method::proposed, Method::lyap_q};
  const auto records = run_benchmark(cfg);
  ASSERT_EQ(records.size(), 3u * 3u * 3u);
  std::size_t i = 0;
  for (std::uint64_t id = 0; id < 3; ++id) {
    for (double t : cfg.t_grid) {
      for (Method m : cfg.methods) {
        EXPECT_EQ(records[i].system_id, id);
        EXPECT_EQ(records[i].t, t);
        EXPECT_EQ(records[i].method, m);
        ++i;
      }
    }
  }
  for (const auto& r : records) {
    EXPECT_EQ(r.epsilon.has_value(), r.status == Status::ok);
    if (r.epsilon) EXPECT_GE(*r.epsilon, 0.0);
    if (r.method == Method::lyap_q) EXPECT_EQ(r.status, Status::not_applicable);
  }
}

TEST(Run, DoubleWidthExactMethodsAreAccurate) {
  BenchConfig cfg = small_config();
  cfg.width = Width::f64;
  cfg.methods = {Method::proposed, Method::van_loan};
  for (const auto& r : run_benchmark(cfg)) {
    if (r.status == Status::ok) EXPECT_LE(*r.epsilon, 1e-6);
  }
}

TEST(Run, DeterministicAcrossThreadCounts) {
  BenchConfig cfg = small_config();
  cfg.threads = 1;
  const auto a = run_benchmark(cfg);
  cfg.threads = 3;
  const auto b = run_benchmark(cfg);
  std::ostringstream sa, sb;
  write_records_csv(sa, a);
  write_records_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Summarize, SingleRecord) {
  const std::vector<BenchRecord> rs{rec(Method::proposed, 1.0, 0.25)};
  const auto rows = summarize(rs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(*rows[0].median, 0.25);
  EXPECT_EQ(*rows[0].q1, 0.25);
  EXPECT_EQ(rows[0].fail_rate, 0.0);
}

TEST(Summarize, QuartilesAndFailures) {
  std::vector<BenchRecord> rs;
  for (double e : {4.0, 1.0, 3.0, 2.0, 5.0}) rs.push_back(rec(Method::van_loan, 2.0, e));
  rs.push_back(rec(Method::van_loan, 2.0, std::nullopt, Status::overflow));
  rs.push_back(rec(Method::proposed, 2.0, std::nullopt, Status::error));
  const auto rows = summarize(rs);
  ASSERT_EQ(rows.size(), 2u);
  const auto* v = find_row(rows, Method::van_loan, 2.0);
  ASSERT_TRUE(v);
  EXPECT_EQ(*v->median, 3.0);
  EXPECT_EQ(*v->q1, 2.0);
  EXPECT_EQ(*v->q3, 4.0);
  EXPECT_NEAR(v->fail_rate, 1.0 / 6.0, 1e-15);
  const auto* p = find_row(rows, Method::proposed, 2.0);
  ASSERT_TRUE(p);
  EXPECT_FALSE(p->median);
  EXPECT_EQ(p->fail_rate, 1.0);
  EXPECT_THROW(summarize(std::vector<BenchRecord>{}), Error);
}

TEST(Csv, FormatAndLineEndings) {
  std::vector<BenchRecord> rs{rec(Method::proposed, 0.1, 1.0 / 3.0),
                              rec(Method::van_loan, 0.1, std::nullopt, Status::overflow)};
  rs[1].system_id = 7;
  std::ostringstream os;
  write_records_csv(os, rs);
  EXPECT_EQ(os.str(),
            "system_id,method,t,epsilon,status\n"
            "0,proposed,0.10000000000000001,0.33333333333333331,ok\n"
            "7,vanloan,0.10000000000000001,,overflow\n");
  std::ostringstream ss;
  write_summary_csv(ss, summarize(rs));
  EXPECT_EQ(ss.str().rfind("method,t,median_eps,q1,q3,fail_rate\nproposed,", 0), 0u);
  EXPECT_EQ(ss.str().find('\r'), std::string::npos);
}

TEST(Csv, FormatRealRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_real(x)), x);
  }
}
