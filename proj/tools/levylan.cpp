// levylan: command line front-end of the Monte Carlo studies.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "levylan/experiments.hpp"

using namespace levylan;

namespace {

struct Overrides {
  std::string scenario_file;
  std::string out, theta, n, shard;
  std::uint64_t seed = 0;
  int workers = 0;
  long reps = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario_file, "scenario file (key = value lines)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t v) { o.seed = v, o.seed_set = true; }, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--n", o.n, "comma separated sample sizes");
  cmd->add_option("--reps", o.reps, "replications");
  cmd->add_option("--theta", o.theta, "\"sigma,delta,alpha\"");
  cmd->add_option("--shard", o.shard, "INDEX/COUNT of the replications to run");
}

Scenario build(const Overrides& o) {
  Scenario s = o.scenario_file.empty() ? parse_scenario("") : load_scenario(o.scenario_file);
  std::string extra;
  if (!o.theta.empty()) extra += "theta0 = " + o.theta + "\n";
  if (!o.n.empty()) extra += "n = " + o.n + "\n";
  if (o.reps) extra += "reps = " + std::to_string(o.reps) + "\n";
  if (o.seed_set) extra += "seed = " + std::to_string(o.seed) + "\n";
  if (!o.out.empty()) extra += "outputs = " + o.out + "\n";
  if (o.workers) extra += "workers = " + std::to_string(o.workers) + "\n";
  if (!o.shard.empty()) extra += "shard = " + o.shard + "\n";
  return extra.empty() ? s : parse_scenario(serialize(s) + extra);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint estimation of (sigma, delta, alpha) for Levy processes and Levy-driven SDEs"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<std::string> data, shards;

  auto* sim = app.add_subcommand("simulate", "write one increments file per replication plus a manifest");
  auto* est = app.add_subcommand("estimate", "fit every replication and write rows and aggregates");
  est->add_option("--data", data, "estimate these path files instead of simulating");
  auto* merge = app.add_subcommand("merge", "join estimate_rows.csv of shard directories");
  merge->add_option("dirs", shards, "shard output directories")->required();
  auto* lan = app.add_subcommand("lan-check", "LAN remainder and score moments");
  auto* dens = app.add_subcommand("density-validate", "normalization, score means and envelopes of f");
  auto* tout = app.add_subcommand("tout-check", "jump-score integrals against their large-n limits");
  auto* tv = app.add_subcommand("tv-study", "kernel-density L1 distance of locally stable vs stable");
  for (auto* c : {sim, est, merge, lan, dens, tout, tv}) add_common(c, o);

  CLI11_PARSE(app, argc, argv);
  try {
    const Scenario s = build(o);
    if (sim->parsed()) cmd_simulate(s);
    if (est->parsed()) cmd_estimate(s, data);
    if (merge->parsed()) cmd_merge(s, shards);
    if (lan->parsed()) cmd_lan_check(s);
    bool ok = true;
    if (dens->parsed()) ok = cmd_density_validate(s);
    if (tout->parsed()) ok = cmd_tout_check(s);
    if (tv->parsed()) ok = cmd_tv_study(s);
    std::printf("wrote %s\n", s.outputs.c_str());
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "levylan: %s\n", e.what());
    return 1;
  }
}
