// stochdisc: discretize linear SDE models from system files, check the
// discrete-time certificates, run the single-precision benchmark, and
// generate system files.
//
// Exit codes: 0 ok, 1 check flagged an exact method, 2 bad input or
// unwritable output, 3 the method failed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochdisc/bench.hpp"
#include "stochdisc/discretize.hpp"
#include "stochdisc/errors.hpp"
#include "stochdisc/modelgen.hpp"
#include "stochdisc/system_file.hpp"

namespace fs = std::filesystem;
using namespace stochdisc;

namespace {

constexpr int kExitFlagged = 1;
constexpr int kExitInput = 2;
constexpr int kExitMethod = 3;

// DISCRETIZE_LOG: 0/quiet (default), 1/info, 2/debug
int log_level() {
  const char* v = std::getenv("DISCRETIZE_LOG");
  if (!v || !*v) return 0;
  const std::string s(v);
  if (s == "debug") return 2;
  if (s == "info") return 1;
  if (s == "quiet" || s == "off") return 0;
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    return 1;
  }
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "[stochdisc] " << msg << '\n';
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::dimension:
    case ErrorKind::non_finite: return kExitInput;
    default: return kExitMethod;
  }
}

int report(const Error& e) {
  std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
  return exit_code_for(e.kind());
}

void print_matrix(std::ostream& os, const char* label, const Matrix<double>& m) {
  os << label << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      os << (c ? " " : "") << bench::format_real(m(r, c));
    }
    os << '\n';
  }
}

std::string diag_value(double v) {
  return std::isnan(v) ? "n/a" : bench::format_real(v);
}

struct DiscretizeArgs {
  std::string file;
  double t = 1.0;
  std::string method = "proposed";
  bool f32 = false;
};

template <typename Real>
MethodReport<Real> run_at(const ContinuousModel<double>& model, Method method, double t) {
  if constexpr (std::is_same_v<Real, double>) {
    return discretize(model, method, t);
  } else {
    return discretize(model.cast<Real>(), method, static_cast<Real>(t));
  }
}

int cmd_discretize(const DiscretizeArgs& args) {
  const auto method = parse_method(args.method);
  if (!method) {
    std::cerr << "error[parse]: unknown method '" << args.method << "'\n";
    return kExitInput;
  }
  io::SystemFile file;
  std::optional<ContinuousModel<double>> model;
  try {
    file = io::read_system_file(args.file);
    model.emplace(file.model());
  } catch (const Error& e) {
    std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
    return kExitInput;
  }
  log(1, "discretize " + args.file + " (n = " + std::to_string(model->dim()) + ") with " +
             args.method + (args.f32 ? " at f32" : " at f64"));

  Matrix<double> f, q;
  Diagnostics diagnostics;
  try {
    if (args.f32) {
      auto r = run_at<float>(*model, *method, args.t);
      f = r.model.f.cast<double>();
      q = r.model.q.cast<double>();
      diagnostics = std::move(r.diagnostics);
    } else {
      auto r = run_at<double>(*model, *method, args.t);
      f = std::move(r.model.f);
      q = std::move(r.model.q);
      diagnostics = std::move(r.diagnostics);
    }
  } catch (const Error& e) {
    return report(e);
  }

  std::cout << "method " << method_name(*method) << '\n'
            << "width " << (args.f32 ? "f32" : "f64") << '\n'
            << "t " << bench::format_real(args.t) << '\n';
  if (!file.name.empty()) std::cout << "name " << file.name << '\n';
  print_matrix(std::cout, "F", f);
  print_matrix(std::cout, "Q", q);
  std::cout << "diagnostics\n";
  for (const auto& [key, value] : diagnostics) {
    std::cout << "  " << key << ' ' << diag_value(value) << '\n';
  }
  return 0;
}

struct CheckArgs {
  std::string file;
  double t = 1.0;
  double tol = 1e-8;
};

int cmd_check(const CheckArgs& args) {
  std::optional<ContinuousModel<double>> model;
  try {
    model.emplace(io::read_system_file(args.file).model());
  } catch (const Error& e) {
    std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
    return kExitInput;
  }

  bool flagged = false;
  std::printf("%-10s %-24s %-24s %s\n", "method", "lemma2_residual", "semigroup_residual",
              "status");
  for (Method m : all_methods()) {
    const bool exact = is_exact(m);
    std::string lemma2 = "-", semigroup = "-", status;
    try {
      const double l2 = discretize(*model, m, args.t).diagnostics.at("lemma2_residual");
      const double sg = semigroup_residual<double>(*model, m, args.t / 2, args.t / 2);
      lemma2 = bench::format_real(l2);
      semigroup = bench::format_real(sg);
      const bool over = !(l2 <= args.tol) || !(sg <= args.tol);
      if (over) {
        status = exact ? "FLAGGED" : "above-tol (informational)";
        flagged = flagged || exact;
      } else {
        status = "ok";
      }
    } catch (const Error& e) {
      status = std::string(error_kind_name(e.kind()));
      if (e.kind() == ErrorKind::not_applicable || e.kind() == ErrorKind::unsupported_spectrum) {
        status = "not-applicable";
      }
      log(1, std::string(method_name(m)) + ": " + e.what());
    }
    std::printf("%-10s %-24s %-24s %s\n", std::string(method_name(m)).c_str(), lemma2.c_str(),
                semigroup.c_str(), status.c_str());
  }
  return flagged ? kExitFlagged : 0;
}

struct BenchArgs {
  std::string config;
  std::string out = ".";
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::vector<std::string> methods;
  bool f32 = false;
  bool f64 = false;
  unsigned threads = 0;
};

bench::BenchConfig load_bench_config(const BenchArgs& args) {
  bench::BenchConfig cfg;
  if (!args.config.empty()) {
    std::ifstream is(args.config);
    if (!is) throw Error(ErrorKind::parse, "cannot open config " + args.config);
    nlohmann::json j;
    try {
      is >> j;
      auto& e = cfg.ensemble;
      e.n = j.value("n", e.n);
      e.m = j.value("m", e.m);
      e.p = j.value("p", e.p);
      e.seed = j.value("seed", e.seed);
      e.pole_real_min = j.value("pole_real_min", e.pole_real_min);
      e.pole_real_max = j.value("pole_real_max", e.pole_real_max);
      e.coupling_scale = j.value("coupling_scale", e.coupling_scale);
      cfg.runs = j.value("runs", cfg.runs);
      cfg.oracle_tol = j.value("oracle_tol", cfg.oracle_tol);
      cfg.threads = j.value("threads", cfg.threads);
      if (j.contains("t_grid")) cfg.t_grid = j.at("t_grid").get<std::vector<double>>();
      if (j.contains("width")) {
        const auto w = j.at("width").get<std::string>();
        if (w != "f32" && w != "f64") throw Error(ErrorKind::parse, "width must be f32 or f64");
        cfg.width = w == "f32" ? bench::Width::f32 : bench::Width::f64;
      }
      if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& name : j.at("methods").get<std::vector<std::string>>()) {
          const auto m = parse_method(name);
          if (!m) throw Error(ErrorKind::parse, "unknown method '" + name + "'");
          cfg.methods.push_back(*m);
        }
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::parse, std::string("bench config: ") + ex.what());
    }
  }
  if (args.runs) cfg.runs = *args.runs;
  if (args.seed) cfg.ensemble.seed = *args.seed;
  if (args.tol) cfg.oracle_tol = *args.tol;
  if (args.threads) cfg.threads = args.threads;
  if (args.f32) cfg.width = bench::Width::f32;
  if (args.f64) cfg.width = bench::Width::f64;
  if (!args.methods.empty()) {
    cfg.methods.clear();
    for (const auto& name : args.methods) {
      const auto m = parse_method(name);
      if (!m) throw Error(ErrorKind::parse, "unknown method '" + name + "'");
      cfg.methods.push_back(*m);
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, e.what());
  }
  return cfg;
}

int cmd_bench(const BenchArgs& args) {
  bench::BenchConfig cfg;
  try {
    cfg = load_bench_config(args);
  } catch (const Error& e) {
    std::cerr << "error[parse]: " << e.what() << '\n';
    return kExitInput;
  }

  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path records_path = dir / "records.csv";
  const fs::path summary_path = dir / "summary.csv";
  std::ofstream records_os(records_path, std::ios::binary);
  std::ofstream summary_os(summary_path, std::ios::binary);
  if (!records_os || !summary_os) {
    std::cerr << "error[parse]: cannot write to output directory " << dir.string() << '\n';
    return kExitInput;
  }

  log(1, "bench: " + std::to_string(cfg.runs) + " systems x " +
             std::to_string(cfg.t_grid.size()) + " times x " + std::to_string(cfg.methods.size()) +
             " methods at " + std::string(bench::width_name(cfg.width)));
  const auto records = bench::run_benchmark(cfg);
  bench::write_records_csv(records_os, records);
  if (records.empty()) {
    summary_os << "method,t,median_eps,q1,q3,fail_rate\n";
    std::cout << "no records (empty method set or time grid)\n";
    return 0;
  }
  const auto rows = bench::summarize(records);
  bench::write_summary_csv(summary_os, rows);
  if (!records_os.flush() || !summary_os.flush()) {
    std::cerr << "error[parse]: write failed in " << dir.string() << '\n';
    return kExitInput;
  }

  std::cout << "wrote " << records.size() << " records to " << records_path.string() << '\n'
            << "wrote " << rows.size() << " summary rows to " << summary_path.string() << '\n';
  if (!cfg.t_grid.empty()) {
    const double t_max = cfg.t_grid.back();
    std::cout << "median eps at t = " << bench::format_real(t_max) << ':';
    for (Method m : cfg.methods) {
      const auto* row = bench::find_row(rows, m, t_max);
      std::cout << ' ' << method_name(m) << '=';
      if (row && row->median) {
        std::cout << bench::format_real(*row->median);
      } else {
        std::cout << "n/a";
      }
      if (row && row->fail_rate > 0) std::cout << " (fail " << row->fail_rate << ')';
    }
    std::cout << '\n';
  }
  return 0;
}

struct GenArgs {
  std::string fixture;
  std::string out;
  std::string name;
  modelgen::EnsembleSpec spec;
  std::uint64_t index = 0;
};

int cmd_gen(const GenArgs& args) {
  io::SystemFile file;
  try {
    if (args.fixture.empty()) {
      auto model = modelgen::gen_random_system(args.spec, args.index);
      file.name = args.name.empty() ? "random-n" + std::to_string(args.spec.n) + "-m" +
                                          std::to_string(args.spec.m) + "-p" +
                                          std::to_string(args.spec.p) + "-seed" +
                                          std::to_string(args.spec.seed) + "-" +
                                          std::to_string(args.index)
                                    : args.name;
      file.a = model.a();
      file.s = model.s();
    } else if (args.fixture == "constant-velocity") {
      auto model = modelgen::constant_velocity<double>();
      file = {"constant-velocity", model.a(), model.s()};
    } else if (args.fixture == "scalar") {
      file = {"scalar", Matrix<double>::Constant(1, 1, -1.0), Matrix<double>::Constant(1, 1, 2.0)};
    } else {
      std::cerr << "error[parse]: unknown fixture '" << args.fixture
                << "' (constant-velocity, scalar)\n";
      return kExitInput;
    }
    if (!args.name.empty()) file.name = args.name;
  } catch (const Error& e) {
    std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
    return kExitInput;
  }

  if (args.out.empty() || args.out == "-") {
    io::write_system(std::cout, file);
    return 0;
  }
  try {
    io::write_system_file(args.out, file);
  } catch (const Error& e) {
    std::cerr << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact discretization of linear stochastic differential equations"};
  app.require_subcommand(1);

  DiscretizeArgs dargs;
  auto* disc = app.add_subcommand("discretize", "Print F and Q for a system file");
  disc->add_option("file", dargs.file, "System file")->required();
  disc->add_option("--t", dargs.t, "Sampling time")->check(CLI::NonNegativeNumber);
  disc->add_option("--method", dargs.method,
                   "lyap-p | lyap-q | proposed | vanloan | naive-a | naive-b | oracle");
  auto* d32 = disc->add_flag("--f32", dargs.f32, "Run the kernels in single precision");
  disc->add_flag("--f64", "Run the kernels in double precision (default)")->excludes(d32);

  CheckArgs cargs;
  auto* check = app.add_subcommand("check", "Residual table across all methods");
  check->add_option("file", cargs.file, "System file")->required();
  check->add_option("--t", cargs.t, "Sampling time")->check(CLI::PositiveNumber);
  check->add_option("--tol", cargs.tol, "Flag residuals above this value");

  BenchArgs bargs;
  auto* bench_cmd = app.add_subcommand("bench", "Single-precision benchmark against the oracle");
  bench_cmd->add_option("--config", bargs.config, "JSON config file");
  bench_cmd->add_option("--out", bargs.out, "Output directory for records.csv and summary.csv");
  bench_cmd->add_option("--runs", bargs.runs, "Number of systems");
  bench_cmd->add_option("--seed", bargs.seed, "Ensemble seed");
  bench_cmd->add_option("--tol", bargs.tol, "Oracle relative tolerance");
  bench_cmd->add_option("--method", bargs.methods, "Methods to run (repeatable)");
  bench_cmd->add_option("--threads", bargs.threads, "Worker threads (0: hardware)");
  auto* b32 = bench_cmd->add_flag("--f32", bargs.f32, "Methods in single precision");
  bench_cmd->add_flag("--f64", bargs.f64, "Methods in double precision")->excludes(b32);

  GenArgs gargs;
  auto* gen = app.add_subcommand("gen", "Write a system file");
  gen->add_option("--fixture", gargs.fixture, "constant-velocity | scalar");
  gen->add_option("--out", gargs.out, "Output path (default stdout)");
  gen->add_option("--name", gargs.name, "Name recorded in the file");
  gen->add_option("--n", gargs.spec.n, "State dimension");
  gen->add_option("--m", gargs.spec.m, "Number of non-zero poles");
  gen->add_option("--p", gargs.spec.p, "Number of integrators");
  gen->add_option("--seed", gargs.spec.seed, "Ensemble seed");
  gen->add_option("--index", gargs.index, "System index within the ensemble");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  if (*disc) return cmd_discretize(dargs);
  if (*check) return cmd_check(cargs);
  if (*bench_cmd) return cmd_bench(bargs);
  if (*gen) {
    if (gargs.fixture.empty() && gargs.spec.n != gargs.spec.m + gargs.spec.p) {
      // --n alone: keep the default integrator count where it fits
      if (gargs.spec.p <= gargs.spec.n) gargs.spec.m = gargs.spec.n - gargs.spec.p;
    }
    return cmd_gen(gargs);
  }
  return kExitInput;
}
