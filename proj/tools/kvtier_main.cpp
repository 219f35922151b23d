// kvtier: run placement scenarios, compare policies, check the greedy
// solver against the exact one, and generate synthetic workloads.
// Exit codes: 0 ok, 1 runtime failure, 2 usage/config error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "kvtier/core.hpp"
#include "kvtier/placement.hpp"
#include "kvtier/simulate.hpp"
#include "kvtier/utility.hpp"
#include "kvtier/workload.hpp"

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Shared flags that rewrite the scenario document before interpretation.
struct ScenarioArgs {
  std::string scenario_path;
  std::string policy;
  double alpha = 0.0;
  bool has_alpha = false;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::string> sets;

  void attach(CLI::App& cmd, bool scenario_required = true) {
    auto* s = cmd.add_option("--scenario", scenario_path, "Scenario JSON file");
    if (scenario_required) s->required();
    cmd.add_option("--policy", policy,
                   "joint | joint-qargmax | lru | fixed:<method>:<ratio> | "
                   "impress:<fraction> | prefill");
    cmd.add_option("--alpha", alpha, "Quality weight of the placement score")
        ->check(CLI::NonNegativeNumber)
        ->trigger_on_parse()
        ->each([this](const std::string&) { has_alpha = true; });
    cmd.add_option("--seed", seed, "Scenario seed")
        ->trigger_on_parse()
        ->each([this](const std::string&) { has_seed = true; });
    cmd.add_option("--set", sets,
                   "Dotted-path override into the scenario JSON, e.g. "
                   "drift.threshold=0.25 or tiers.0.capacity_gb=12")
        ->take_all();
  }

  std::vector<std::string> overrides() const {
    std::vector<std::string> out = sets;
    if (!policy.empty()) out.push_back("policy=" + policy);
    if (has_alpha) out.push_back("alpha=" + fmt(alpha));
    if (has_seed) out.push_back("seed=" + std::to_string(seed));
    return out;
  }
};

void write_requests_csv(const std::string& path,
                        const std::vector<kvtier::RequestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw kvtier::ValidationError("cannot write file: " + path);
  out << "t,context,outcome,tier,method,ratio,ttft,quality\n";
  for (const auto& r : records) {
    out << fmt(r.request.t) << ',' << r.request.context << ','
        << kvtier::to_string(r.outcome) << ',';
    if (r.outcome == kvtier::Outcome::Hit) {
      out << r.tier << ',' << r.config.method << ',' << fmt(r.config.ratio);
    } else {
      out << ",,";
    }
    out << ',' << fmt(r.ttft) << ',' << fmt(r.quality) << '\n';
  }
}

json summary_json(const kvtier::Policy& policy, const kvtier::Scenario& scenario,
                  const kvtier::ReplayResult& result) {
  const auto& m = result.metrics;
  json j;
  j["policy"] = policy.label();
  j["alpha"] = scenario.params.alpha;
  j["seed"] = scenario.seed;
  j["n_requests"] = m.n_requests;
  j["sum_ttft"] = m.sum_ttft;
  j["mean_ttft"] = m.mean_ttft;
  j["p50_ttft"] = m.p50_ttft;
  j["p90_ttft"] = m.p90_ttft;
  j["p99_ttft"] = m.p99_ttft;
  j["mean_quality"] = m.mean_quality;
  j["miss_fraction"] = m.miss_fraction;
  json hits = json::object();
  for (const auto& [tier, share] : m.hit_fraction_by_tier) {
    hits["tier" + std::to_string(tier)] = share;
  }
  j["hit_fraction_by_tier"] = hits;
  j["reprofile_count"] = result.reprofile_count;
  json windows = json::array();
  for (const auto& w : result.profiling_windows) {
    windows.push_back({{"start", w.start}, {"duration", w.duration},
                       {"penalty", w.penalty}});
  }
  j["profiling_windows"] = windows;
  j["final_placements"] = result.final_placements;
  return j;
}

int cmd_simulate(const ScenarioArgs& args, const std::string& out_dir) {
  kvtier::LoadedScenario loaded =
      kvtier::load_scenario_file(args.scenario_path, args.overrides());
  print_warnings(loaded.warnings);

  const kvtier::ReplayResult result =
      kvtier::replay(loaded.trace, loaded.policy, loaded.scenario);
  const auto& m = result.metrics;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_requests_csv((dir / "requests.csv").string(), result.records);
    std::ofstream out(dir / "summary.json", std::ios::trunc);
    if (!out) {
      throw kvtier::ValidationError("cannot write file: " +
                                    (dir / "summary.json").string());
    }
    out << summary_json(loaded.policy, loaded.scenario, result).dump(2) << '\n';
  }

  std::cout << "policy=" << loaded.policy.label()
            << " alpha=" << fmt(loaded.scenario.params.alpha)
            << " requests=" << m.n_requests << " sum_ttft=" << fmt(m.sum_ttft)
            << " mean_ttft=" << fmt(m.mean_ttft) << " p99_ttft=" << fmt(m.p99_ttft)
            << " mean_quality=" << fmt(m.mean_quality)
            << " miss_fraction=" << fmt(m.miss_fraction)
            << " reprofiles=" << result.reprofile_count << "\n";
  return 0;
}

struct CompareRow {
  std::string policy;
  double alpha = 0.0;
  kvtier::ReplayMetrics metrics;
  std::size_t reprofiles = 0;
};

int cmd_compare(const ScenarioArgs& args, const std::string& policies_csv,
                const std::string& alphas_csv, unsigned jobs,
                const std::string& out_file) {
  std::vector<std::string> policies;
  {
    std::istringstream in(policies_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) policies.push_back(tok);
    }
  }
  std::vector<double> alphas;
  {
    std::istringstream in(alphas_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (tok.empty()) continue;
      try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        alphas.push_back(v);
      } catch (const std::exception&) {
        throw kvtier::ValidationError("bad alpha value: " + tok);
      }
    }
  }
  if (policies.empty()) throw kvtier::ValidationError("policy grid is empty");
  if (alphas.empty()) throw kvtier::ValidationError("alpha grid is empty");
  // Policy strings must parse before burning replay time on the grid.
  for (const auto& p : policies) (void)kvtier::Policy::parse(p);

  struct Point {
    std::string policy;
    double alpha;
  };
  std::vector<Point> grid;
  for (const auto& p : policies) {
    for (double a : alphas) grid.push_back({p, a});
  }

  std::vector<CompareRow> rows(grid.size());
  std::vector<std::string> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      try {
        ScenarioArgs point = args;
        point.policy = grid[i].policy;
        point.alpha = grid[i].alpha;
        point.has_alpha = true;
        kvtier::LoadedScenario loaded =
            kvtier::load_scenario_file(point.scenario_path, point.overrides());
        const kvtier::ReplayResult result =
            kvtier::replay(loaded.trace, loaded.policy, loaded.scenario);
        rows[i] = {loaded.policy.label(), grid[i].alpha, result.metrics,
                   result.reprofile_count};
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!errors[i].empty()) {
      throw kvtier::ValidationError("grid point (" + grid[i].policy + ", alpha=" +
                                    fmt(grid[i].alpha) + "): " + errors[i]);
    }
  }

  // Tier ids must agree across runs; take them from the first row.
  std::vector<int> tier_ids;
  for (const auto& [tier, share] : rows.front().metrics.hit_fraction_by_tier) {
    tier_ids.push_back(tier);
  }

  // Ascending TTFT with quality as tie-break reads as a Pareto front.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CompareRow& a, const CompareRow& b) {
                     if (a.metrics.mean_ttft != b.metrics.mean_ttft) {
                       return a.metrics.mean_ttft < b.metrics.mean_ttft;
                     }
                     return a.metrics.mean_quality > b.metrics.mean_quality;
                   });

  std::ostringstream csv;
  csv << "policy,alpha,mean_ttft,p50_ttft,p90_ttft,p99_ttft,mean_quality,"
         "miss_fraction,reprofiles";
  for (int tier : tier_ids) csv << ",hit_tier" << tier;
  csv << '\n';
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    csv << row.policy << ',' << fmt(row.alpha) << ',' << fmt(m.mean_ttft) << ','
        << fmt(m.p50_ttft) << ',' << fmt(m.p90_ttft) << ',' << fmt(m.p99_ttft) << ','
        << fmt(m.mean_quality) << ',' << fmt(m.miss_fraction) << ','
        << row.reprofiles;
    for (int tier : tier_ids) {
      const auto it = m.hit_fraction_by_tier.find(tier);
      csv << ',' << fmt(it == m.hit_fraction_by_tier.end() ? 0.0 : it->second);
    }
    csv << '\n';
  }

  if (out_file.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_file, std::ios::trunc);
    if (!out) throw kvtier::ValidationError("cannot write file: " + out_file);
    out << csv.str();
    std::cout << "wrote " << rows.size() << " rows to " << out_file << "\n";
  }
  return 0;
}

int cmd_oracle_gap(std::uint64_t seed, int n_instances) {
  if (n_instances < 0) throw kvtier::ValidationError("n must be >= 0");
  std::cout << "instance,seed,contexts,greedy_utility,oracle_utility,gap\n";
  std::vector<double> gaps;
  double max_gap = 0.0;
  for (int i = 0; i < n_instances; ++i) {
    const std::uint64_t inst_seed = seed + static_cast<std::uint64_t>(i);
    const kvtier::OracleInstance inst = kvtier::gen_oracle_instance(inst_seed);

    kvtier::ProfileMap profiles;
    for (const auto& p : inst.profiles) profiles.emplace(p.context, p);

    // Greedy: highest standalone utility first, same as a rearrange.
    std::vector<const kvtier::ContextProfile*> order;
    for (const auto& p : inst.profiles) order.push_back(&p);
    std::vector<std::pair<double, const kvtier::ContextProfile*>> keyed;
    for (const auto* p : order) {
      keyed.push_back({kvtier::best_config(*p, inst.tiers, inst.space, inst.params)
                           .utility,
                       p});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second->context < b.second->context;
    });

    kvtier::StoreState store(inst.tiers);
    std::int64_t stamp = 0;
    for (const auto& [u, p] : keyed) {
      kvtier::insert_joint(store, p->context, profiles, inst.space, inst.params, 0,
                           stamp++);
    }
    if (store.first_over_capacity().has_value()) {
      std::cerr << "error: greedy left a tier over capacity (seed " << inst_seed
                << ")\n";
      return 1;
    }
    const double greedy = kvtier::placement_utility(store, profiles,
                                                    inst.space.methods(), inst.params);
    const kvtier::OracleResult oracle =
        kvtier::oracle_mckp(inst.profiles, inst.tiers, inst.space, inst.params);
    const double gap = oracle.total_utility - greedy;
    if (gap < -1e-9) {
      std::cerr << "error: greedy exceeded the exact optimum (seed " << inst_seed
                << ", gap " << fmt(gap) << ")\n";
      return 1;
    }
    gaps.push_back(std::max(0.0, gap));
    max_gap = std::max(max_gap, gaps.back());
    std::cout << i << ',' << inst_seed << ',' << inst.profiles.size() << ','
              << fmt(greedy) << ',' << fmt(oracle.total_utility) << ','
              << fmt(gaps.back()) << '\n';
  }

  double median = 0.0;
  if (!gaps.empty()) {
    std::vector<double> sorted = gaps;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  std::cout << "n=" << gaps.size() << " median_gap=" << fmt(median)
            << " max_gap=" << fmt(max_gap) << " greedy_le_oracle=ok\n";
  return 0;
}

void write_or_print(const std::string& out_file, const std::string& content) {
  if (out_file.empty()) {
    std::cout << content;
  } else {
    std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw kvtier::ValidationError("cannot write file: " + out_file);
    out << content;
  }
}

int cmd_gen_profiles(const std::string& preset, int n, std::uint64_t seed,
                     double mean_tokens, double std_tokens, double frequency,
                     const std::string& id_prefix, bool include_truth,
                     const std::string& out_file) {
  kvtier::ContextBlock block;
  block.preset = preset;
  block.n = n;
  block.mean_tokens = mean_tokens;
  block.std_tokens = std_tokens;
  block.frequency = frequency;
  block.id_prefix = id_prefix;
  const auto contexts = kvtier::gen_contexts(
      seed, block, kvtier::UtilityParams{}, kvtier::MethodSet::default_set(),
      kvtier::CandidateSpace::default_ratio_grid());
  std::ostringstream buf;
  for (const auto& ctx : contexts) {
    buf << kvtier::profile_to_json(ctx.profile, include_truth ? &ctx.truth : nullptr)
        << '\n';
  }
  write_or_print(out_file, buf.str());
  if (!out_file.empty()) {
    std::cout << "wrote " << contexts.size() << " profiles to " << out_file << "\n";
  }
  return 0;
}

int cmd_gen_trace(const std::string& profiles_file, int n_contexts, double rate,
                  double duration, double zipf, std::int64_t n_new_tokens,
                  std::uint64_t seed, const std::string& out_file) {
  std::vector<kvtier::ContextId> ids;
  if (!profiles_file.empty()) {
    for (const auto& ctx : kvtier::read_profiles_file(profiles_file)) {
      ids.push_back(ctx.profile.context);
    }
  } else if (n_contexts > 0) {
    const int digits = static_cast<int>(std::to_string(n_contexts - 1).size());
    for (int i = 0; i < n_contexts; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "ctx-%0*d", digits, i);
      ids.push_back(buf);
    }
  } else {
    throw kvtier::ValidationError("gen trace needs --profiles or --contexts");
  }
  kvtier::TraceGenParams params;
  params.arrival_rate = rate;
  params.duration = duration;
  params.zipf_exponent = zipf;
  params.n_new_tokens = n_new_tokens;
  const auto trace = kvtier::gen_trace(seed, ids, params);
  write_or_print(out_file, kvtier::serialize_trace(trace));
  if (!out_file.empty()) {
    std::cout << "wrote " << trace.size() << " requests to " << out_file << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kvtier: tiered KV-cache placement simulator"};
  app.require_subcommand(1);

  ScenarioArgs sim_args;
  std::string sim_out;
  auto* sim = app.add_subcommand(
      "simulate", "Replay one scenario; write requests.csv and summary.json");
  sim_args.attach(*sim);
  sim->add_option("--out", sim_out, "Output directory for requests.csv/summary.json");

  ScenarioArgs cmp_args;
  std::string cmp_policies = "joint,joint-qargmax,lru,prefill";
  std::string cmp_alphas = "1";
  std::string cmp_out;
  unsigned cmp_jobs = 1;
  auto* cmp = app.add_subcommand(
      "compare", "Replay a policy x alpha grid and print a CSV table");
  cmp_args.attach(*cmp);
  cmp->add_option("--policies", cmp_policies, "Comma-separated policy list");
  cmp->add_option("--alphas", cmp_alphas, "Comma-separated alpha list");
  cmp->add_option("--jobs", cmp_jobs, "Worker threads for grid points")
      ->check(CLI::PositiveNumber);
  cmp->add_option("--out", cmp_out, "CSV output file (default stdout)");

  std::uint64_t gap_seed = 1;
  int gap_n = 200;
  auto* gap = app.add_subcommand(
      "oracle-gap", "Greedy vs exact placement utility on random small instances");
  gap->add_option("--seed", gap_seed, "Base seed; instance i uses seed+i");
  gap->add_option("--n", gap_n, "Number of instances");

  auto* gen = app.add_subcommand("gen", "Generate synthetic profiles or traces");
  gen->require_subcommand(1);

  std::string gp_preset = "narrativeqa";
  int gp_n = 50;
  std::uint64_t gp_seed = 1;
  double gp_mean_tokens = 0.0;
  double gp_std_tokens = -1.0;
  double gp_frequency = 1.0;
  std::string gp_prefix;
  bool gp_truth = false;
  std::string gp_out;
  auto* gen_profiles = gen->add_subcommand("profiles", "Profile JSONL from a preset");
  gen_profiles->add_option("--preset", gp_preset,
                           "Dataset preset (" + kvtier::preset_names() + ")");
  gen_profiles->add_option("--n", gp_n, "Contexts to generate")
      ->check(CLI::PositiveNumber);
  gen_profiles->add_option("--seed", gp_seed, "Generator seed");
  gen_profiles->add_option("--mean-tokens", gp_mean_tokens,
                           "Override the preset's mean context length");
  gen_profiles->add_option("--std-tokens", gp_std_tokens,
                           "Override the preset's length stddev");
  gen_profiles->add_option("--frequency", gp_frequency, "Per-context frequency");
  gen_profiles->add_option("--id-prefix", gp_prefix, "Context id prefix");
  gen_profiles->add_flag("--include-truth", gp_truth,
                         "Emit the ground-truth curves alongside each profile");
  gen_profiles->add_option("--out", gp_out, "Output file (default stdout)");

  std::string gt_profiles;
  int gt_contexts = 0;
  double gt_rate = 1.0;
  double gt_duration = 100.0;
  double gt_zipf = 1.0;
  std::int64_t gt_new_tokens = 0;
  std::uint64_t gt_seed = 1;
  std::string gt_out;
  auto* gen_trace = gen->add_subcommand(
      "trace", "Poisson/Zipf request trace JSONL over a context population");
  gen_trace->add_option("--profiles", gt_profiles,
                        "Take context ids from this profile JSONL file");
  gen_trace->add_option("--contexts", gt_contexts,
                        "Or generate ids ctx-0..ctx-N-1");
  gen_trace->add_option("--rate", gt_rate, "Mean arrivals per second")
      ->check(CLI::PositiveNumber);
  gen_trace->add_option("--duration", gt_duration, "Trace length in seconds")
      ->check(CLI::PositiveNumber);
  gen_trace->add_option("--zipf", gt_zipf, "Popularity skew exponent");
  gen_trace->add_option("--n-new-tokens", gt_new_tokens, "Query suffix tokens");
  gen_trace->add_option("--seed", gt_seed, "Generator seed");
  gen_trace->add_option("--out", gt_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args, sim_out);
    if (cmp->parsed()) {
      return cmd_compare(cmp_args, cmp_policies, cmp_alphas, cmp_jobs, cmp_out);
    }
    if (gap->parsed()) return cmd_oracle_gap(gap_seed, gap_n);
    if (gen->parsed()) {
      if (gen_profiles->parsed()) {
        return cmd_gen_profiles(gp_preset, gp_n, gp_seed, gp_mean_tokens,
                                gp_std_tokens, gp_frequency, gp_prefix, gp_truth,
                                gp_out);
      }
      if (gen_trace->parsed()) {
        return cmd_gen_trace(gt_profiles, gt_contexts, gt_rate, gt_duration, gt_zipf,
                             gt_new_tokens, gt_seed, gt_out);
      }
    }
  } catch (const kvtier::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const kvtier::TraceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
