#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "nlsys/io.hpp"

using namespace nlsys;

namespace {

const Solution& sample_solution() {
  static const Solution sol = solve(Params{1, 2.0, 1.3, -0.2}, make_grid(1, 15.0, 300));
  return sol;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nlsys_io_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(SolutionFile, RoundTripIsBitExact) {
  const Solution& sol = sample_solution();
  const std::string text = serialize_solution(sol, "2000-01-01T00:00:00Z");
  const Solution back = deserialize_solution(text);
  EXPECT_EQ(serialize_solution(back, "2000-01-01T00:00:00Z"), text);
  EXPECT_EQ(back.pair.u().values, sol.pair.u().values);
  EXPECT_EQ(back.pair.v().values, sol.pair.v().values);
  EXPECT_EQ(back.kappa, sol.kappa);
  EXPECT_EQ(back.params.b, sol.params.b);
  EXPECT_EQ(back.grid()->m, sol.grid()->m);
  EXPECT_EQ(back.hamiltonian_residual.has_value(), sol.hamiltonian_residual.has_value());
}

TEST(SolutionFile, RecomputedQuantitiesAgree) {
  const Solution& sol = sample_solution();
  const Solution back = deserialize_solution(serialize_solution(sol));
  EXPECT_NEAR(energy(back.pair, back.params), sol.kappa, 1e-12 * sol.kappa);
  EXPECT_EQ(el_residual(back), el_residual(sol));
  EXPECT_EQ(el_residual(back), back.el_residual);
}

TEST(SolutionFile, StoreAndLoad) {
  const auto path = temp_path("store.sol");
  store(sample_solution(), path.string());
  const Solution back = load(path.string());
  EXPECT_EQ(back.kappa, sample_solution().kappa);
  std::filesystem::remove(path);
  EXPECT_THROW(load(path.string()), IoError);
  EXPECT_THROW(store(sample_solution(), "/nonexistent-dir/x/y.sol"), IoError);
}

TEST(SolutionFile, TruncationDetected) {
  const std::string text = serialize_solution(sample_solution());
  EXPECT_THROW(deserialize_solution(text.substr(0, text.size() / 2)), FormatError);
  EXPECT_THROW(deserialize_solution(text.substr(0, text.size() - 3)), FormatError);
  EXPECT_THROW(deserialize_solution(""), FormatError);
}

TEST(SolutionFile, CorruptionDetected) {
  std::string text = serialize_solution(sample_solution());
  const auto pos = text.find("kappa: ") + 8;
  text[pos] = text[pos] == '1' ? '2' : '1';
  EXPECT_THROW(deserialize_solution(text), FormatError);
}

TEST(SolutionFile, FutureVersionRejected) {
  std::string body = serialize_solution(sample_solution());
  body = body.substr(0, body.rfind("checksum: "));
  body.replace(body.find("format_version: 1"), 17, "format_version: 2");
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016" PRIx64, fnv1a64(body));
  const std::string text = body + "checksum: " + sum + "\n";
  try {
    deserialize_solution(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
  }
}

TEST(Csv, DeterministicAndParsable) {
  std::vector<SweepRecord> records{{-1.0, 2.5, 0.3, 0.3, 10, {}}, {-10.0, 3.1, 0.01, 0.1, 20, {}}};
  const std::string a = sweep_table(records).str();
  const std::string b = sweep_table(records).str();
  EXPECT_EQ(a, b);
  const auto t = parse_csv(a);
  ASSERT_EQ(t.columns().size(), 5u);
  EXPECT_EQ(t.columns()[0], "b");
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(std::stod(t.rows()[1][1]), 3.1);
  EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), FormatError);
  EXPECT_THROW(parse_csv(""), FormatError);
}

TEST(Csv, FailedRecordsOmitted) {
  std::vector<DomainRecord> records{{10.0, 999, 4.0, 5, {}}, {20.0, 1999, 0.0, 0, std::string("failed")}};
  const auto t = parse_csv(domain_table(records).str());
  EXPECT_EQ(t.rows().size(), 1u);
}

TEST(Hash, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}
