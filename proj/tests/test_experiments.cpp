#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "igw/experiments.hpp"

using namespace igw;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("igw_test_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

nlohmann::json without_timing(nlohmann::json j) {
  j.erase("seconds");
  return j;
}

ExperimentSpec spec_for(const std::string& name) {
  auto s = default_spec(name);
  s.threads = 1;
  return s;
}

}  // namespace

TEST(Spec, JsonRoundTrip) {
  auto s = default_spec("attractor-mc");
  s.thresholds = {0.5, 1.5};
  s.p_targets = {0.2};
  s.expected = 0.6;
  s.out_dir = "x";
  const auto back = ExperimentSpec::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
  auto plain = default_spec("verify-height");
  EXPECT_TRUE(std::isnan(ExperimentSpec::from_json(plain.to_json()).expected));
}

TEST(Registry, EveryExperimentHasDefaults) {
  for (const auto& [name, fn] : experiment_registry()) EXPECT_EQ(default_spec(name).name, name);
  auto bad = default_spec("nope");
  EXPECT_THROW(run_experiment(bad), std::invalid_argument);
}

TEST(Deterministic, IdentitiesPass) {
  for (const char* name : {"height-ode", "length-series", "length-tail", "size-exact", "size-tail", "lagrange"}) {
    const auto rep = run_experiment(spec_for(name));
    EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
    const auto again = run_experiment(spec_for(name));
    EXPECT_EQ(without_timing(rep.to_json()), without_timing(again.to_json()));
  }
}

TEST(AttractorGf, ZipfGeometricSubcritical) {
  auto s = spec_for("attractor-gf");
  s.dist = "zipf:1.5";
  auto rep = run_experiment(s);
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.table.back()["g0"].get<double>(), 2.0 / 3.0, 0.02);

  s.dist = "geometric";
  rep = run_experiment(s);
  EXPECT_TRUE(rep.pass());
  EXPECT_NEAR(rep.table.back()["g0"].get<double>(), 0.5, 0.02);

  s.dist = "table:[0.6,0,0.4]";
  s.tolerance = 1e-3;
  rep = run_experiment(s);
  EXPECT_TRUE(rep.pass());
  EXPECT_GT(rep.table.back()["g0"].get<double>(), 0.999);
}

TEST(VerifyHeight, SmallRunAndPower) {
  auto s = spec_for("verify-height");
  s.replicates = 20000;
  s.tolerance = 0.02;
  const auto rep = run_experiment(s);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
  EXPECT_TRUE(rep.check("power_wrong_q").pass);
  EXPECT_TRUE(rep.check("closed_form_q_half").pass);
}

TEST(VerifyHeight, ReproducibleFromSpecAndSeed) {
  auto s = spec_for("verify-height");
  s.dist = "igw:2/3";
  s.replicates = 3000;
  s.tolerance = 0.05;
  const auto a = run_experiment(s);
  auto s4 = s;
  s4.threads = 4;
  const auto b = run_experiment(s4);
  auto ja = without_timing(a.to_json()), jb = without_timing(b.to_json());
  ja["spec"].erase("threads");
  jb["spec"].erase("threads");
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(ja["code_version"], code_version);
  EXPECT_EQ(ja["seed"], s.seed);
  s.seed += 1;
  EXPECT_NE(without_timing(run_experiment(s).to_json())["checks"], ja["checks"]);
}

TEST(VerifyHeight, RejectsNonIgw) {
  auto s = spec_for("verify-height");
  s.dist = "zipf:1.5";
  s.replicates = 100;
  EXPECT_THROW(run_experiment(s), std::invalid_argument);
}

TEST(Semigroup, ArchivesCounterexample) {
  auto s = spec_for("semigroup");
  s.replicates = 100;
  s.out_dir = temp_dir("semigroup");
  const auto rep = run_experiment(s);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump(2);
  std::ifstream in(s.out_dir + "/semigroup_length_counterexample.nwk");
  ASSERT_TRUE(in);
  const auto trees = read_newick(in);
  ASSERT_EQ(trees.size(), 1u);
  EXPECT_FALSE(semigroup_check(trees[0], PhiFunctional::length(), 1.0, 1.0).equal);
  EXPECT_TRUE(std::filesystem::exists(s.out_dir + "/semigroup.json"));
  EXPECT_TRUE(std::filesystem::exists(s.out_dir + "/semigroup.csv"));
}

TEST(Report, FilesAndCsv) {
  auto s = spec_for("lagrange");
  s.out_dir = temp_dir("report");
  const auto rep = run_experiment(s);
  std::ifstream j(s.out_dir + "/lagrange.json");
  const auto parsed = nlohmann::json::parse(j);
  EXPECT_EQ(parsed["verdict"], "pass");
  EXPECT_EQ(parsed["name"], "lagrange");
  std::ifstream c(s.out_dir + "/lagrange.csv");
  std::string header;
  std::getline(c, header);
  EXPECT_EQ(header, "q,residual");
  const auto csv = rep.table_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Report, EmptyChecksFail) {
  ExperimentReport r;
  EXPECT_FALSE(r.pass());
  r.checks.push_back(check_true("a", true));
  EXPECT_TRUE(r.pass());
  r.checks.push_back(check_at_most("b", 2.0, 1.0));
  EXPECT_FALSE(r.pass());
  EXPECT_THROW(r.check("c"), std::out_of_range);
}

TEST(Helpers, MajorityReport) {
  std::vector<GofReport> runs{check_at_most("x", 0.1, 0.2), check_at_most("x", 0.3, 0.2), check_at_most("x", 0.15, 0.2)};
  const auto m = majority_report("ks", runs);
  EXPECT_TRUE(m.pass);
  EXPECT_DOUBLE_EQ(m.statistic, 0.15);
  EXPECT_EQ(m.details["runs"].size(), 3u);
  runs[2] = check_at_most("x", 0.25, 0.2);
  EXPECT_FALSE(majority_report("ks", runs).pass);
  EXPECT_THROW(majority_report("ks", {}), std::invalid_argument);
}

TEST(Helpers, ChiSquareReportDirections) {
  const std::vector<double> pmf{0.5, 0.5};
  EXPECT_TRUE(chi_square_report("fit", {500, 500}, pmf, 1000).pass);
  EXPECT_FALSE(chi_square_report("fit", {600, 400}, pmf, 1000).pass);
  EXPECT_TRUE(chi_square_report("reject", {600, 400}, pmf, 1000, true).pass);
}

TEST(Helpers, TailBuckets) {
  const auto d = OffspringDistribution::igw(0.6);
  const auto p = pmf_with_tail([&](long k) { return d.pmf(k); }, 10);
  ASSERT_EQ(p.size(), 12u);
  double s = 0.0;
  for (double v : p) s += v;
  EXPECT_NEAR(s, 1.0, 1e-15);
  const auto h = histogram_with_tail({1, 0, 2, 3, 4}, 2);
  EXPECT_EQ(h, (std::vector<double>{1, 0, 2, 7}));
}
