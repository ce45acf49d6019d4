#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.h"
#include "slq/errors.h"
#include "slq/problem_io.h"
#include "slq/reference_problems.h"

namespace slq {
namespace {

using nlohmann::json;

TEST(ProblemIo, OmittedBlocksAreZero) {
  const LQProblem p = ProblemFromJson(json::parse(
      R"({"n":1,"m":1,"B":[[1]],"C":[[1]],"Q":[[2]],"R":[[1]],"q":[2]})"));
  const LQProblem ref = NoisyIntegrator();
  EXPECT_EQ(p.A, ref.A);
  EXPECT_EQ(p.B, ref.B);
  EXPECT_EQ(p.C, ref.C);
  EXPECT_EQ(p.D, ref.D);
  EXPECT_EQ(p.S, ref.S);
  EXPECT_EQ(p.sigma, ref.sigma);
  EXPECT_EQ(p.r, ref.r);
  EXPECT_EQ(p.q, ref.q);
}

TEST(ProblemIo, MatricesAreRowMajor) {
  const LQProblem p = ProblemFromJson(json::parse(
      R"({"n":2,"m":1,"A":[[1,2],[3,4]],"B":[[5],[6]],"Q":[[1,0],[0,1]],"R":[[1]]})"));
  EXPECT_EQ(p.A(0, 1), 2.0);
  EXPECT_EQ(p.A(1, 0), 3.0);
  EXPECT_EQ(p.B(1, 0), 6.0);
}

TEST(ProblemIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const LQProblem p = testing::RandomStabilizableProblem(rng, 3, 2, true);
    const std::string text = ProblemToJson(p).dump();
    const LQProblem back = ProblemFromJson(json::parse(text));
    EXPECT_EQ(back.A, p.A);
    EXPECT_EQ(back.B, p.B);
    EXPECT_EQ(back.C, p.C);
    EXPECT_EQ(back.D, p.D);
    EXPECT_EQ(back.b, p.b);
    EXPECT_EQ(back.sigma, p.sigma);
    EXPECT_EQ(back.Q, p.Q);
    EXPECT_EQ(back.S, p.S);
    EXPECT_EQ(back.R, p.R);
    EXPECT_EQ(back.q, p.q);
    EXPECT_EQ(back.r, p.r);
    EXPECT_EQ(ProblemToJson(back).dump(), text);
  }
}

TEST(ProblemIo, Errors) {
  EXPECT_THROW(ProblemFromJson(json::parse(R"({"n":1,"m":1,"Z":[1]})")),
               FormatError);
  EXPECT_THROW(ProblemFromJson(json::parse(R"({"m":1})")), FormatError);
  EXPECT_THROW(ProblemFromJson(json::parse(R"({"n":0,"m":1})")),
               DimensionError);
  EXPECT_THROW(
      ProblemFromJson(json::parse(R"({"n":2,"m":1,"A":[[1,2]]})")),
      DimensionError);
  EXPECT_THROW(ProblemFromJson(json::parse(R"({"n":1,"m":1,"b":[1,2]})")),
               DimensionError);
  EXPECT_THROW(ProblemFromJson(json::parse(R"({"n":1,"m":1,"b":["x"]})")),
               FormatError);
  EXPECT_THROW(ProblemFromJson(json::parse("[1]")), FormatError);
}

TEST(ProblemIo, LoadProblemFile) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "slq_io_good.json";
  const auto bad = dir / "slq_io_bad.json";
  std::ofstream(good) << ProblemToJson(CoupledDriftDiffusion()).dump();
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(LoadProblem(good).b(0), 1.0);
  EXPECT_THROW(LoadProblem(bad), FormatError);
  EXPECT_THROW(LoadProblem(dir / "slq_io_missing.json"), FormatError);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

}  // namespace
}  // namespace slq
