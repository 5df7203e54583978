#include "stochdisc/system_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochdisc/bench.hpp"
#include "stochdisc/errors.hpp"

namespace stochdisc::io {

namespace {

constexpr std::string_view kFormat = "stochdisc-system";

[[noreturn]] void fail(int line, const std::string& what) {
  throw Error(ErrorKind::parse, "system file line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(std::string_view tok, int line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) fail(line, "non-finite value");
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(is_, raw)) {
      ++line_;
      out = trim(raw);
      if (!out.empty() && out.front() != '#') return true;
    }
    return false;
  }

  int line() const { return line_; }

 private:
  std::istream& is_;
  int line_ = 0;
};

Matrix<double> read_block(LineReader& in, Index n, const char* label) {
  Matrix<double> m(n, n);
  std::string text;
  for (Index r = 0; r < n; ++r) {
    if (!in.next(text)) fail(in.line(), std::string("unexpected end of input in block ") + label);
    std::istringstream row(text);
    std::string tok;
    Index c = 0;
    while (row >> tok) {
      if (c == n) fail(in.line(), std::string("too many entries in a row of ") + label);
      m(r, c++) = parse_real(tok, in.line());
    }
    if (c != n) fail(in.line(), std::string("too few entries in a row of ") + label);
  }
  return m;
}

}  // namespace

SystemFile parse_system(std::istream& is) {
  LineReader in(is);
  SystemFile file;
  Index n = -1;
  std::string text;
  bool have_a = false, have_s = false;

  while (in.next(text)) {
    std::istringstream ls(text);
    std::string key;
    ls >> key;
    std::string rest;
    std::getline(ls, rest);
    rest = trim(rest);

    if (key == "format") {
      if (rest != std::string(kFormat) + " 1") fail(in.line(), "unsupported format '" + rest + "'");
    } else if (key == "name") {
      file.name = rest;
    } else if (key == "n") {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || v < 1) {
        fail(in.line(), "n must be a positive integer");
      }
      if (n != -1) fail(in.line(), "duplicate n");
      n = static_cast<Index>(v);
    } else if (key == "A" || key == "A:" || key == "S" || key == "S:") {
      if (!rest.empty()) fail(in.line(), "matrix header must be on its own line");
      if (n < 0) fail(in.line(), "n must precede the matrix blocks");
      const bool is_a = key.front() == 'A';
      if (is_a ? have_a : have_s) fail(in.line(), "duplicate block " + key.substr(0, 1));
      (is_a ? file.a : file.s) = read_block(in, n, is_a ? "A" : "S");
      (is_a ? have_a : have_s) = true;
    } else {
      fail(in.line(), "unknown key '" + key + "'");
    }
  }
  if (!have_a || !have_s) fail(in.line(), "both A and S blocks are required");

  const double asym = (file.s - file.s.transpose()).norm();
  if (asym > 1e-12 * file.s.norm()) {
    fail(in.line(), "S is not symmetric (||S - S^T||_F = " + bench::format_real(asym) + ")");
  }
  return file;
}

SystemFile read_system_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::parse, "cannot open system file " + path.string());
  return parse_system(is);
}

void write_system(std::ostream& os, const SystemFile& file) {
  const Index n = file.a.rows();
  if (file.a.cols() != n || file.s.rows() != n || file.s.cols() != n) {
    throw Error(ErrorKind::dimension, "write_system: A and S must both be n x n");
  }
  os << "format " << kFormat << " 1\n";
  if (!file.name.empty()) os << "name " << file.name << '\n';
  os << "n " << n << '\n';
  auto block = [&](const char* label, const Matrix<double>& m) {
    os << label << '\n';
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) os << (c ? " " : "") << bench::format_real(m(r, c));
      os << '\n';
    }
  };
  block("A", file.a);
  block("S", file.s);
}

void write_system_file(const std::filesystem::path& path, const SystemFile& file) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::parse, "cannot write " + path.string());
  write_system(os, file);
  if (!os.flush()) throw Error(ErrorKind::parse, "write failed: " + path.string());
}

}  // namespace stochdisc::io
