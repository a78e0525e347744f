#include <gtest/gtest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "levylan/experiments.hpp"

namespace {
using namespace levylan;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

class ExperimentsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("levylan_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  Scenario small(const std::string& out) const {
    Scenario s = parse_scenario("theta0 = 1, 1, 1.5\nn = 100\nreps = 3\nseed = 77\n");
    s.outputs = (root_ / out).string();
    return s;
  }

  fs::path root_;
};

TEST_F(ExperimentsTest, SimulateWritesFilesAndManifest) {
  const Scenario s = small("sim");
  cmd_simulate(s);
  int paths = 0;
  for (const auto& e : fs::directory_iterator(s.outputs)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("path_", 0) != 0) continue;
    ++paths;
    const PathFile f = read_path_file(e.path().string());
    EXPECT_EQ(f.path.n, 100);
    EXPECT_EQ(f.path.increments.size(), 100u);
    EXPECT_EQ(f.scenario, scenario_hash(s));
    EXPECT_EQ(f.path.seed, rep_seed(s.seed, 100, f.rep));
  }
  EXPECT_EQ(paths, 3);

  std::istringstream manifest(slurp(fs::path(s.outputs) / "manifest.txt"));
  std::string hash, name;
  int lines = 0;
  while (manifest >> hash >> name) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(slurp(fs::path(s.outputs) / name))));
    EXPECT_EQ(hash, buf) << name;
    ++lines;
  }
  EXPECT_EQ(lines, 4);
}

TEST_F(ExperimentsTest, SimulateIsByteIdentical) {
  const Scenario a = small("a"), b = small("b");
  cmd_simulate(a);
  cmd_simulate(b);
  for (const auto& e : fs::directory_iterator(a.outputs))
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(b.outputs) / e.path().filename())) << e.path();
}

TEST_F(ExperimentsTest, PathFileRoundTrip) {
  Rng rng(3);
  const PathSample p = sample_sde_path(default_sde_model(), Theta(1, 0.5, 1.2), TemperingSpec::exponential(1, 1), 50,
                                       4, rng, 0.25, 123);
  const std::string file = (root_ / "p.txt").string();
  write_path_file(file, p, 9, "abc", true);
  const PathFile f = read_path_file(file);
  EXPECT_EQ(f.rep, 9);
  EXPECT_EQ(f.scenario, "abc");
  EXPECT_EQ(f.path.seed, 123u);
  EXPECT_EQ(f.path.increments, p.increments);
  EXPECT_EQ(f.path.values, p.values);
}

TEST_F(ExperimentsTest, ZeroReplicationsRejected) {
  Scenario s = small("z");
  s.reps = 0;
  EXPECT_THROW(cmd_estimate(s), BadScenario);
}

TEST_F(ExperimentsTest, EstimateFromFilesReproducesRun) {
  const Scenario s = small("sim");
  cmd_simulate(s);
  Scenario e = small("est");
  cmd_estimate(e);
  std::vector<std::string> files;
  for (const auto& f : fs::directory_iterator(s.outputs))
    if (f.path().filename().string().rfind("path_", 0) == 0) files.push_back(f.path().string());
  Scenario r = small("refit");
  cmd_estimate(r, files);
  for (const char* name : {"estimate_rows.csv", "estimate_summary.json", "manifest.txt"})
    EXPECT_EQ(slurp(fs::path(e.outputs) / name), slurp(fs::path(r.outputs) / name)) << name;
}

TEST_F(ExperimentsTest, AggregatesRecomputableFromRows) {
  Scenario s = small("x");
  s.reps = 4;
  const EstimateRecord rec = run_estimate(s);
  ASSERT_EQ(rec.rows.size(), 4u);
  const auto again = aggregate_rows(s, parse_rows_csv(rows_csv(rec.rows)));
  ASSERT_EQ(again.size(), rec.aggregates.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].converged, rec.aggregates[i].converged);
    EXPECT_EQ(again[i].cov_err, rec.aggregates[i].cov_err);
    EXPECT_EQ(again[i].mean_stud, rec.aggregates[i].mean_stud);
  }
}

TEST_F(ExperimentsTest, WorkersAndShardsGiveSameBytes) {
  Scenario serial = small("serial");
  serial.reps = 4;
  cmd_estimate(serial);
  Scenario par = serial;
  par.outputs = (root_ / "par").string();
  par.workers = 2;
  cmd_estimate(par);
  std::vector<std::string> dirs;
  for (int k = 0; k < 3; ++k) {
    Scenario sh = serial;
    sh.shard_index = k;
    sh.shard_count = 3;
    sh.outputs = (root_ / ("shard" + std::to_string(k))).string();
    cmd_estimate(sh);
    dirs.push_back(sh.outputs);
  }
  Scenario merged = serial;
  merged.outputs = (root_ / "merged").string();
  cmd_merge(merged, dirs);
  for (const char* name : {"scenario.txt", "estimate_rows.csv", "estimate_summary.json", "manifest.txt"}) {
    const std::string ref = slurp(fs::path(serial.outputs) / name);
    EXPECT_EQ(ref, slurp(fs::path(par.outputs) / name)) << name;
    EXPECT_EQ(ref, slurp(fs::path(merged.outputs) / name)) << name;
  }
  EXPECT_THROW(cmd_merge(merged, {dirs[0], dirs[0]}), Error);
  EXPECT_THROW(cmd_merge(merged, {dirs[0], dirs[1]}), Error);
}

TEST_F(ExperimentsTest, LanZeroDirection) {
  Scenario s = small("lan");
  s.h_list = {Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 1, 1)};
  const LanRecord rec = run_lan_check(s);
  for (const auto& r : rec.rows)
    if (r.h_index == 0) EXPECT_EQ(r.remainder, 0.0);
  ASSERT_FALSE(rec.score.empty());
  EXPECT_EQ(rec.score[0].reps, 3);
}

TEST(ParallelForTest, CoversEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hit(100);
  parallel_for(100, 3, [&](long i) { hit[static_cast<std::size_t>(i)]++; });
  for (const auto& h : hit) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 2,
                            [](long i) {
                              if (i == 7) throw std::runtime_error("x");
                            }),
               std::runtime_error);
}

TEST(SeedTest, CounterConstruction) {
  EXPECT_EQ(rep_seed(5, 100, 2), replication_seed(5, (100ull << 32) | 2ull));
  EXPECT_NE(rep_seed(5, 100, 2), rep_seed(5, 1000, 2));
}

TEST(DensityCheckTest, StandardPoint) {
  const DensityCheck c = density_check(1.5, 0.1);
  EXPECT_TRUE(c.pass);
  EXPECT_LE(c.norm_error, 1e-6);
  EXPECT_GT(c.envelope_lo, 0.0);
}

}  // namespace
