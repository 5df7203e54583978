#include "stochdisc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <thread>

#include "stochdisc/errors.hpp"

namespace stochdisc::bench {

namespace {

Status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::overflow: return Status::overflow;
    case ErrorKind::not_applicable:
    case ErrorKind::unsupported_spectrum:
    case ErrorKind::near_singular: return Status::not_applicable;
    default: return Status::error;
  }
}

template <typename Real>
Matrix<double> run_method(const ContinuousModel<Real>& model, Method method, double t,
                          double oracle_tol) {
  OracleOptions oracle;
  oracle.rel_tol = oracle_tol;
  return discretize(model, method, static_cast<Real>(t), oracle).model.q.template cast<double>();
}

// Fills the records of one system: rows [first, first + |t_grid| |methods|).
void run_system(const BenchConfig& cfg, std::uint64_t system_id, BenchRecord* out) {
  const std::size_t per_t = cfg.methods.size();
  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    for (std::size_t mi = 0; mi < per_t; ++mi) {
      BenchRecord& r = out[ti * per_t + mi];
      r.system_id = system_id;
      r.method = cfg.methods[mi];
      r.t = cfg.t_grid[ti];
      r.status = Status::error;
    }
  }

  std::optional<ContinuousModel<double>> model64;
  std::optional<ContinuousModel<float>> model32;
  try {
    model64.emplace(modelgen::gen_random_system(cfg.ensemble, system_id));
    if (cfg.width == Width::f32) model32.emplace(model64->cast<float>());
  } catch (const Error&) {
    return;
  }

  for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
    const double t = cfg.t_grid[ti];
    Matrix<double> truth;
    try {
      OracleOptions oracle;
      oracle.rel_tol = cfg.oracle_tol;
      truth = q_oracle(*model64, t, oracle);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t mi = 0; mi < per_t; ++mi) {
      BenchRecord& r = out[ti * per_t + mi];
      try {
        const Matrix<double> q = cfg.width == Width::f32
                                     ? run_method(*model32, r.method, t, cfg.oracle_tol)
                                     : run_method(*model64, r.method, t, cfg.oracle_tol);
        const double eps = relative_error<double>(q, truth);
        if (std::isfinite(eps)) {
          r.epsilon = eps;
          r.status = Status::ok;
        } else {
          r.status = Status::overflow;
        }
      } catch (const Error& e) {
        r.status = status_of(e);
      }
    }
  }
}

double quantile(const std::vector<double>& sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view width_name(Width width) {
  return width == Width::f32 ? "f32" : "f64";
}

std::string_view status_name(Status status) {
  switch (status) {
    case Status::ok: return "ok";
    case Status::overflow: return "overflow";
    case Status::not_applicable: return "not_applicable";
    case Status::error: return "error";
  }
  return "error";
}

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(std::pow(10.0, -2.0 + k / 5.0));
  return grid;
}

void BenchConfig::validate() const {
  ensemble.validate();
  if (runs < 1) throw Error(ErrorKind::precondition, "bench: runs must be >= 1");
  if (!(oracle_tol > 0)) throw Error(ErrorKind::precondition, "bench: oracle_tol must be > 0");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0) || !std::isfinite(t_grid[i]) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw Error(ErrorKind::precondition,
                  "bench: t_grid must be positive, finite and strictly increasing");
    }
  }
}

std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const std::size_t per_system = cfg.t_grid.size() * cfg.methods.size();
  std::vector<BenchRecord> records(per_system * static_cast<std::size_t>(cfg.runs));
  if (records.empty()) return records;

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1U, static_cast<unsigned>(cfg.runs));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int id = next++; id < cfg.runs; id = next++) {
      run_system(cfg, static_cast<std::uint64_t>(id),
                 records.data() + static_cast<std::size_t>(id) * per_system);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  return records;
}

std::vector<SummaryRow> summarize(std::span<const BenchRecord> records) {
  if (records.empty()) throw Error(ErrorKind::precondition, "summarize: no records");

  std::vector<Method> method_order;
  std::map<std::pair<std::size_t, double>, std::pair<std::vector<double>, std::size_t>> cells;
  for (const BenchRecord& r : records) {
    auto it = std::find(method_order.begin(), method_order.end(), r.method);
    const auto slot = static_cast<std::size_t>(it - method_order.begin());
    if (it == method_order.end()) method_order.push_back(r.method);
    auto& cell = cells[{slot, r.t}];
    ++cell.second;
    if (r.status == Status::ok && r.epsilon) cell.first.push_back(*r.epsilon);
  }

  std::vector<SummaryRow> rows;
  for (auto& [key, cell] : cells) {
    auto& [eps, total] = cell;
    SummaryRow row;
    row.method = method_order[key.first];
    row.t = key.second;
    row.count = total;
    row.fail_rate = static_cast<double>(total - eps.size()) / static_cast<double>(total);
    if (!eps.empty()) {
      std::sort(eps.begin(), eps.end());
      row.median = quantile(eps, 0.5);
      row.q1 = quantile(eps, 0.25);
      row.q3 = quantile(eps, 0.75);
    }
    rows.push_back(row);
  }
  return rows;
}

const SummaryRow* find_row(std::span<const SummaryRow> rows, Method method, double t) {
  for (const SummaryRow& r : rows) {
    if (r.method == method && r.t == t) return &r;
  }
  return nullptr;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_records_csv(std::ostream& os, std::span<const BenchRecord> records) {
  os << "system_id,method,t,epsilon,status\n";
  for (const BenchRecord& r : records) {
    os << r.system_id << ',' << method_name(r.method) << ',' << format_real(r.t) << ','
       << (r.epsilon ? format_real(*r.epsilon) : "") << ',' << status_name(r.status) << '\n';
  }
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  os << "method,t,median_eps,q1,q3,fail_rate\n";
  for (const SummaryRow& r : rows) {
    os << method_name(r.method) << ',' << format_real(r.t) << ',' << opt(r.median) << ','
       << opt(r.q1) << ',' << opt(r.q3) << ',' << format_real(r.fail_rate) << '\n';
  }
}

}  // namespace stochdisc::bench
