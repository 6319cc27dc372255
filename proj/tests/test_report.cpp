#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "meanfield/config.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/report.hpp"
#include "support.hpp"

namespace meanfield {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json sample_report() {
  GapReport rep;
  rep.seed = 12345678901234ull;
  rep.agents = 16;
  rep.paths = 400;
  rep.baseline_mean = 1.0 / 3.0;
  rep.baseline_std_error = 2e-17;
  rep.gaps = {{"zero-control", 0.1, 0.01}, {"scaled(0.5)", -1e-300, 3.0}};
  return to_json(rep);
}

TEST(CanonicalJson, SortedKeysAndFullPrecision) {
  const Json doc{{"b", 1}, {"a", 0.1}, {"c", Json::array({1.0, 2.5})}};
  const std::string text = canonical_json(doc);
  EXPECT_LT(text.find("\"a\""), text.find("\"b\""));
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(text.find("1.0"), std::string::npos);  // floats stay floats
  EXPECT_NE(text.find("\"b\": 1,"), std::string::npos);  // integers stay integers
}

TEST(CanonicalJson, RejectsNonFinite) {
  EXPECT_THROW(canonical_json(Json{{"x", std::nan("")}}), std::domain_error);
}

TEST(EmitReport, ByteIdenticalAndRoundTrips) {
  const fs::path dir = fs::path(::testing::TempDir()) / "meanfield_report";
  fs::create_directories(dir);
  const Json doc = sample_report();
  emit_report(doc, dir / "a.json");
  emit_report(doc, dir / "b.json");
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  const Json back = Json::parse(slurp(dir / "a.json"));
  EXPECT_EQ(back, doc);
  EXPECT_EQ(back["gaps"][1]["mean"].get<double>(), -1e-300);
  EXPECT_EQ(back["seed"].get<std::uint64_t>(), 12345678901234ull);
}

TEST(EmitReport, ErrorNamesPath) {
  const fs::path bad = fs::path(::testing::TempDir()) / "no_such_dir" / "x" / "r.json";
  try {
    emit_report(Json::object(), bad);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(bad.string()), std::string::npos);
  }
}

TEST(Fnv1a, ReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
  EXPECT_NE(fnv1a64("{\"a\": 1}"), fnv1a64("{\"a\": 2}"));
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(ReportJson, GapReportKeys) {
  const Json j = sample_report();
  for (const char* key : {"experiment", "seed", "N", "paths", "gaps"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["gaps"][0]["deviation"], "zero-control");
  EXPECT_TRUE(j["gaps"][0].contains("stderr"));
}

TEST(ReportJson, ScalingReportWithAndWithoutFit) {
  ScalingReport rep;
  rep.points = {{8, 0.1, 0.01}, {16, 0.05, 0.01}};
  rep.fit.slope = -1.0;
  rep.slope_ci_low = -1.1;
  rep.slope_ci_high = -0.9;
  Json j = to_json(rep);
  EXPECT_EQ(j["slope"].get<double>(), -1.0);
  EXPECT_EQ(j["slope_ci"].size(), 2u);
  EXPECT_EQ(scaling_csv(rep), "N,eps_hat,stderr\n8,0.10000000000000001,0.01\n16,0.050000000000000003,0.01\n");
  rep.insufficient_signal = true;
  j = to_json(rep);
  EXPECT_TRUE(j["slope"].is_null());
}

TEST(ReportCsv, SystemicRiskColumns) {
  const sr::SrParams p;
  const TimeGrid grid(1.0, 10);
  const std::string csv = sr_solution_csv(sr::solve_direct(p, 4, grid), sr::solve_master(p, grid));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,pi1,pi2,Pd,P,Lambda,H,r");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
}

TEST(Overrides, DottedPaths) {
  const Json base = testing::load_fixture("sr.json");
  const Json doc = apply_overrides(base, {"simulation.N=64", "experiment.N_list=[8,16,32,64]",
                                          "output=runs/a", "model.sigma=0"});
  EXPECT_EQ(doc["simulation"]["N"], 64);
  EXPECT_EQ(doc["experiment"]["N_list"].size(), 4u);
  EXPECT_EQ(doc["output"], "runs/a");
  const RunConfig cfg = parse_config(doc);
  EXPECT_EQ(cfg.simulation.agents, 64);
  EXPECT_EQ(cfg.sr.sigma, 0.0);
  EXPECT_THROW(apply_overrides(base, {"simulation.N"}), ConfigError);
  EXPECT_THROW(apply_overrides(base, {"model.sigma.x=1"}), ConfigError);
}

TEST(ParseConfig, FixturesAndDefaults) {
  const RunConfig lq = testing::fixture_config("lq2.json");
  EXPECT_EQ(lq.kind, RunConfig::ModelKind::kLq);
  EXPECT_EQ(lq.lq.state_dim(), 2);
  EXPECT_EQ(lq.lq.control_dim(), 1);
  EXPECT_EQ(lq.simulation.initial.kind, InitialDistribution::Kind::kGaussian);
  const RunConfig empty = parse_config(Json::object());
  EXPECT_EQ(empty.kind, RunConfig::ModelKind::kSystemicRisk);
  EXPECT_EQ(empty.grid_steps, 2000);
  EXPECT_EQ(empty.sr.eps0, 2.0);
}

TEST(ParseConfig, StrictKeys) {
  EXPECT_THROW(parse_config(Json{{"modle", Json::object()}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"simulation", {{"agents", 4}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"model", {{"kind", "lq"}, {"A", 1}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"model", {{"kind", "heat"}}}}), ConfigError);
  EXPECT_THROW(parse_config(Json{{"simulation", {{"N", 1}}}}), ConfigError);
}

TEST(ParseMenu, Entries) {
  bool exact = false;
  const auto menu = parse_menu({"zero", "scaled:0.5", "constant:-1", "exact"}, 2, &exact);
  ASSERT_EQ(menu.size(), 3u);
  EXPECT_TRUE(exact);
  EXPECT_EQ(menu[1].label(), "scaled(0.5)");
  EXPECT_EQ(menu[2].label(), "constant(-1,-1)");
  EXPECT_THROW(parse_menu({"scaled:abc"}, 1), ConfigError);
  EXPECT_THROW(parse_menu({"exact"}, 1), ConfigError);
  EXPECT_THROW(parse_menu({"teleport"}, 1), ConfigError);
}

}  // namespace
}  // namespace meanfield
