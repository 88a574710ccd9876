// brt-sched: episode runner, Monte-Carlo batch driver and verifier for the
// single-loop BRT speed-scheduling model.
//
// Exit codes: 0 success, 1 validation error, 2 episode invariant violation,
// 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "brt/io.hpp"
#include "brt/verify.hpp"

namespace fs = std::filesystem;

namespace {

brt::Scenario load_or_default(const std::string& path) {
  if (path.empty()) return brt::default_scenario();
  return brt::load_scenario(path);
}

// BRT_SCHED_OUT overrides --out when set.
std::string resolve_out_dir(const std::string& cli_out) {
  if (const char* env = std::getenv("BRT_SCHED_OUT"); env && *env) return env;
  return cli_out;
}

// BRT_SCHED_THREADS overrides --threads when set.
int resolve_threads(int cli_threads) {
  if (const char* env = std::getenv("BRT_SCHED_THREADS"); env && *env)
    return std::stoi(env);
  return cli_threads;
}

std::vector<int> parse_la_range(const std::string& spec) {
  std::vector<int> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  } else {
    for (const auto& part : brt::detail::split(spec, ','))
      out.push_back(std::stoi(part));
  }
  if (out.empty()) throw brt::validation_error("la", "empty look-ahead list");
  return out;
}

int cmd_run(const std::string& scenario_path, const std::string& policy_name,
            int la, std::uint64_t seed, const std::string& out_dir,
            const std::string& format) {
  const brt::Scenario sc = load_or_default(scenario_path);
  brt::PolicySpec policy;
  if (policy_name == "baseline") {
    policy = {brt::PolicySpec::Kind::baseline, 0};
  } else if (policy_name == "dp") {
    policy = {brt::PolicySpec::Kind::dp, la};
  } else {
    throw brt::validation_error("policy", "expected baseline or dp");
  }

  const brt::EpisodeResult res = brt::run_episode(sc, policy, seed);
  fs::create_directories(out_dir);
  const std::string stem =
      out_dir + "/episode_" + policy.name() + "_seed" + std::to_string(seed);
  if (format == "csv")
    brt::write_trace_csv(res, sc.network.stop_count(), stem + ".csv");
  else
    brt::write_trace_jsonl(res, stem + ".jsonl");
  brt::write_summary_jsonl({brt::summarize(res, policy)},
                           stem + ".summary.jsonl");

  std::cout << policy.name() << " seed " << seed << ": steps "
            << res.final_clock() << ", termination "
            << (res.termination == brt::EpisodeResult::Termination::returned
                    ? "returned"
                    : "horizon-exhausted")
            << ", areas [";
  for (std::size_t i = 0; i < res.per_stop_area.size(); ++i)
    std::cout << (i ? ", " : "") << res.per_stop_area[i];
  std::cout << "], total cost " << res.total_cost << "\n";
  return 0;
}

int cmd_batch(const std::string& scenario_path, const std::string& la_spec,
              int runs, std::uint64_t base_seed, const std::string& out_dir,
              int threads) {
  const brt::Scenario sc = load_or_default(scenario_path);
  const std::vector<int> las = parse_la_range(la_spec);
  const brt::BatchSummary bs =
      brt::run_batch(sc, las, runs, base_seed, {}, threads);

  fs::create_directories(out_dir);
  brt::write_summary_jsonl(bs.rows, out_dir + "/summary.jsonl");

  std::cout << "batch: " << runs << " paired runs, base seed " << base_seed
            << "\n";
  auto print_areas = [](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      std::cout << (i ? ", " : "[") << v[i];
    std::cout << "]";
  };
  std::cout << "baseline mean areas ";
  print_areas(bs.baseline_area_mean);
  std::cout << "\n";
  for (const auto& agg : bs.per_la) {
    std::cout << "dp la=" << agg.lookahead << " mean areas ";
    print_areas(agg.area_mean);
    std::cout << " improvement% ";
    print_areas(agg.improvement_mean_pct);
    std::cout << " solve us mean " << agg.mean_solve_us << " max "
              << agg.max_solve_us << " nodes " << agg.mean_expanded_nodes
              << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& scenario_path, int instances, int fuzz_pairs,
               std::uint64_t base_seed) {
  int failures = 0;
  std::cout << "oracle equivalence on " << instances << " tiny instances:\n";
  for (int i = 0; i < instances; ++i) {
    const brt::Scenario tiny =
        brt::make_tiny_scenario(base_seed + static_cast<std::uint64_t>(i));
    const brt::OracleCheck chk = brt::check_oracle_equivalence(tiny);
    if (!chk.passed) {
      ++failures;
      std::cout << "  instance " << i << " FAIL: " << chk.detail << "\n";
    }
  }
  std::cout << (failures == 0 ? "  all matched\n" : "");

  const brt::Scenario sc = load_or_default(scenario_path);
  const brt::FuzzReport rep = brt::fuzz_invariants(sc, fuzz_pairs, base_seed);
  std::cout << "invariant fuzz: " << rep.episodes << " episodes, "
            << rep.violations << " violations\n";
  for (const auto& msg : rep.messages) std::cout << "  " << msg << "\n";

  if (failures > 0 || rep.violations > 0) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single-loop BRT vehicle-scheduling toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", format = "csv";
  std::string policy = "dp", la_spec = "4..9";
  int la = 5, runs = 20, instances = 25, fuzz_pairs = 10, threads = 1;
  std::uint64_t seed = 1, base_seed = 1;

  auto* run = app.add_subcommand("run", "run one episode");
  run->add_option("--scenario", scenario_path, "scenario file (default built-in)");
  run->add_option("--policy", policy, "baseline | dp")->check(CLI::IsMember({"baseline", "dp"}));
  run->add_option("--la", la, "look-ahead steps for dp");
  run->add_option("--seed", seed, "disturbance seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* batch = app.add_subcommand("batch", "paired baseline/dp batch");
  batch->add_option("--scenario", scenario_path, "scenario file (default built-in)");
  batch->add_option("--la", la_spec, "look-ahead list, e.g. 4..9 or 5,7");
  batch->add_option("--runs", runs, "paired runs per look-ahead");
  batch->add_option("--base-seed", base_seed, "first seed");
  batch->add_option("--out", out_dir, "output directory");
  batch->add_option("--threads", threads, "episodes run in parallel");

  auto* verify = app.add_subcommand("verify", "oracle-equivalence and invariant suites");
  verify->add_option("--scenario", scenario_path, "scenario for the fuzz half");
  verify->add_option("--instances", instances, "tiny oracle instances");
  verify->add_option("--fuzz-pairs", fuzz_pairs, "paired fuzz episodes");
  verify->add_option("--base-seed", base_seed, "first seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(scenario_path, policy, la, seed, resolve_out_dir(out_dir),
                     format);
    if (batch->parsed())
      return cmd_batch(scenario_path, la_spec, runs, base_seed,
                       resolve_out_dir(out_dir), resolve_threads(threads));
    return cmd_verify(scenario_path, instances, fuzz_pairs, base_seed);
  } catch (const brt::episode_error& e) {
    std::cerr << "episode invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const brt::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const brt::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
