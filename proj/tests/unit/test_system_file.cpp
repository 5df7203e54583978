#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "stochdisc/errors.hpp"
#include "stochdisc/modelgen.hpp"
#include "stochdisc/system_file.hpp"

using namespace stochdisc;
using namespace stochdisc::io;
using Mat = Matrix<double>;

namespace {

ErrorKind parse_kind(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_system(is);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted:\n" << text;
  return ErrorKind::precondition;
}

}  // namespace

TEST(SystemFile, ParsesCommentsAndBlankLines) {
  std::istringstream is(
      "# constant velocity\n\nformat stochdisc-system 1\nname cv\nn 2\nA\n0 1\n0 0\n"
      "\nS\n0 0\n  0   1  \n");
  const auto f = parse_system(is);
  EXPECT_EQ(f.name, "cv");
  const auto cv = modelgen::constant_velocity<double>();
  EXPECT_EQ(f.a, cv.a());
  EXPECT_EQ(f.s, cv.s());
}

TEST(SystemFile, BitExactRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1e3);
  SystemFile f{"random", Mat(4, 4), Mat(4, 4)};
  for (Index i = 0; i < 16; ++i) f.a.data()[i] = nd(rng) * std::pow(10.0, (i % 7) - 3);
  Mat g(4, 4);
  for (Index i = 0; i < 16; ++i) g.data()[i] = nd(rng);
  f.s = g * g.transpose();
  f.s = (f.s + Mat(f.s.transpose())) / 2;
  std::ostringstream os;
  write_system(os, f);
  std::istringstream is(os.str());
  const auto back = parse_system(is);
  EXPECT_EQ(back.name, f.name);
  EXPECT_EQ(back.a, f.a);
  EXPECT_EQ(back.s, f.s);
}

TEST(SystemFile, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "stochdisc_roundtrip.sys";
  const auto m = modelgen::gen_random_system(modelgen::EnsembleSpec{}, 3);
  write_system_file(path, {"ens", m.a(), m.s()});
  const auto back = read_system_file(path);
  EXPECT_EQ(back.a, m.a());
  EXPECT_EQ(back.s, m.s());
  std::filesystem::remove(path);
}

TEST(SystemFile, Rejections) {
  EXPECT_EQ(parse_kind("n 2\nA\n0 1\n0 0\n"), ErrorKind::parse);                  // no S
  EXPECT_EQ(parse_kind("A\n0\nS\n1\n"), ErrorKind::parse);                        // no n
  EXPECT_EQ(parse_kind("n 2\nA\n0 1\n0\nS\n1 0\n0 1\n"), ErrorKind::parse);       // short row
  EXPECT_EQ(parse_kind("n 1\nA\n0 1\nS\n1\n"), ErrorKind::parse);                 // long row
  EXPECT_EQ(parse_kind("n 1\nA\nx\nS\n1\n"), ErrorKind::parse);                   // not a number
  EXPECT_EQ(parse_kind("n 1\nA\ninf\nS\n1\n"), ErrorKind::parse);                 // non-finite
  EXPECT_EQ(parse_kind("n 0\n"), ErrorKind::parse);
  EXPECT_EQ(parse_kind("format other 1\nn 1\nA\n0\nS\n1\n"), ErrorKind::parse);
  EXPECT_EQ(parse_kind("n 1\nfoo 3\nA\n0\nS\n1\n"), ErrorKind::parse);
  EXPECT_EQ(parse_kind("n 2\nA\n0 1\n0 0\nS\n1 0.5\n0.4 1\n"), ErrorKind::parse);  // asymmetric
  EXPECT_EQ(parse_kind("n 1\nA\n0\nA\n0\nS\n1\n"), ErrorKind::parse);
}

TEST(SystemFile, TinyAsymmetryAccepted) {
  std::istringstream is("n 2\nA\n0 1\n0 0\nS\n1 0.5\n0.50000000000000011 1\n");
  EXPECT_NO_THROW(parse_system(is));
}

TEST(SystemFile, ErrorMentionsLine) {
  std::istringstream is("n 2\nA\n0 1\n0 zz\nS\n1 0\n0 1\n");
  try {
    parse_system(is);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(SystemFile, UnwritablePath) {
  EXPECT_THROW(write_system_file("/nonexistent-dir/x.sys", {"", Mat::Zero(1, 1), Mat::Zero(1, 1)}),
               Error);
  EXPECT_THROW(read_system_file("/nonexistent-dir/x.sys"), Error);
}
