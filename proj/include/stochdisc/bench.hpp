#pragma once

// Precision benchmark: each method runs entirely at one float width on
// systems from the random ensemble; its Q is compared with a double-precision
// quadrature reference, eps = ||Q_hat - Q||_2 / ||Q||_2.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stochdisc/discretize.hpp"
#include "stochdisc/modelgen.hpp"

namespace stochdisc::bench {

enum class Width { f32, f64 };

std::string_view width_name(Width width);

enum class Status { ok, overflow, not_applicable, error };

std::string_view status_name(Status status);

/// 21 points, 10^(-2 + k/5) for k = 0..20: log-spaced over [1e-2, 1e2] and
/// containing every decade (1e-2, 1e-1, 1, 10, 100) exactly.
std::vector<double> default_t_grid();

struct BenchConfig {
  modelgen::EnsembleSpec ensemble{};
  std::vector<double> t_grid = default_t_grid();
  std::vector<Method> methods{Method::proposed, Method::van_loan};
  double oracle_tol = 1e-12;
  int runs = 100;
  Width width = Width::f32;
  unsigned threads = 0;  // 0: std::thread::hardware_concurrency()

  void validate() const;
};

struct BenchRecord {
  std::uint64_t system_id = 0;
  Method method = Method::proposed;
  double t = 0;
  std::optional<double> epsilon;  // present iff status == ok
  Status status = Status::ok;
};

/// Records ordered by (system_id, t, method order in cfg.methods). Per-cell
/// failures are captured in the status column; nothing here throws except
/// for an invalid config.
std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg);

struct SummaryRow {
  Method method = Method::proposed;
  double t = 0;
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;
  double fail_rate = 0;
  std::size_t count = 0;
};

/// One row per (method, t): median and quartiles of eps over ok records and
/// the fraction of records that failed. Throws on an empty record list.
std::vector<SummaryRow> summarize(std::span<const BenchRecord> records);

/// Finds the summary row for (method, t), or nullptr.
const SummaryRow* find_row(std::span<const SummaryRow> rows, Method method, double t);

/// %.17g, the shortest printf form that round-trips a double.
std::string format_real(double x);

void write_records_csv(std::ostream& os, std::span<const BenchRecord> records);
void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);

}  // namespace stochdisc::bench
