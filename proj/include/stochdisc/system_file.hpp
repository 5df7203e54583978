#pragma once

// Plain-text system files:
//
//   # comments and blank lines are ignored
//   format stochdisc-system 1
//   name constant-velocity
//   n 2
//   A
//   0 1
//   0 0
//   S
//   0 0
//   0 1
//
// Values are written with 17 significant digits, so a write/read cycle is
// bit-exact.

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>

#include "stochdisc/discretize.hpp"

namespace stochdisc::io {

struct SystemFile {
  std::string name;
  Matrix<double> a;
  Matrix<double> s;

  ContinuousModel<double> model() const { return ContinuousModel<double>(a, s); }
};

/// Throws ErrorKind::parse with a line number on malformed input, wrong
/// block sizes, non-finite entries, or S asymmetric beyond 1e-12 relative.
SystemFile parse_system(std::istream& is);
SystemFile read_system_file(const std::filesystem::path& path);

void write_system(std::ostream& os, const SystemFile& file);
/// Throws ErrorKind::parse when the path cannot be written.
void write_system_file(const std::filesystem::path& path, const SystemFile& file);

}  // namespace stochdisc::io
