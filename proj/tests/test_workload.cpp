#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "kvtier/core.hpp"
#include "kvtier/quality.hpp"
#include "kvtier/simulate.hpp"
#include "kvtier/workload.hpp"

using namespace kvtier;

namespace {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double norm_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Mean of a normal(mu, sigma) conditioned on [lo, hi].
double truncated_mean(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  return mu + sigma * (norm_pdf(a) - norm_pdf(b)) / (norm_cdf(b) - norm_cdf(a));
}

std::string minimal_scenario_json() {
  return R"({
    "seed": 3,
    "tiers": [
      {"name": "fast", "capacity_gb": 8, "read_bandwidth_gbps": 20},
      {"name": "slow", "read_bandwidth_gbps": 2}
    ],
    "profiles": {"inline": [
      {"context_id": "ctx1", "size_bytes": 4000000000, "frequency": 1.0,
       "grid": [0.05, 1.0], "methods": {"keydiff": {"0.05": 1.0, "1": 1.0}}},
      {"context_id": "ctx2", "size_bytes": 8000000000, "frequency": 1.0,
       "grid": [0.05, 0.9, 1.0],
       "methods": {"keydiff": {"0.05": 0.5, "0.9": 0.5, "1": 1.0}}}
    ]},
    "trace": {"inline": [
      {"t": 1.0, "context_id": "ctx1"},
      {"t": 2.0, "context_id": "ctx2"}
    ]}
  })";
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("kvtier-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("dataset presets carry the published statistics") {
  const auto& presets = dataset_presets();
  CHECK(presets.size() == 12);

  const DatasetPreset& nqa = preset_by_name("narrativeqa");
  CHECK(nqa.mean_tokens == doctest::Approx(108e3));
  CHECK(nqa.std_tokens == doctest::Approx(55e3));
  CHECK(nqa.has_sensitivity);
  CHECK(nqa.sensitivity_median == doctest::Approx(0.340));

  CHECK(preset_by_name("samsum").sensitivity_median == doctest::Approx(0.676));
  CHECK(preset_by_name("triviaqa").sensitivity_median == doctest::Approx(0.392));
  CHECK(preset_by_name("multi_news").sensitivity_median == doctest::Approx(0.738));
  CHECK(preset_by_name("2wikimqa").sensitivity_median == doctest::Approx(0.681));
  CHECK(preset_by_name("qasper").sensitivity_median == doctest::Approx(0.759));

  // datasets without a published sensitivity fall back to the prior
  CHECK_FALSE(preset_by_name("hotpotqa").has_sensitivity);
  CHECK_FALSE(preset_by_name("gov_report").has_sensitivity);
  CHECK(preset_by_name("gov_report").mean_tokens == doctest::Approx(54e3));

  CHECK(find_preset("qmsum") != nullptr);
  CHECK(find_preset("nope") == nullptr);
  CHECK_THROWS_WITH_AS(preset_by_name("nope"),
                       doctest::Contains("samsum"), ValidationError);
}

TEST_CASE("generated context sizes follow the truncated token normal") {
  ContextBlock block;
  block.preset = "narrativeqa";
  block.n = 4000;
  UtilityParams params;
  const auto contexts = gen_contexts(17, block, params, MethodSet::default_set(),
                                     CandidateSpace::default_ratio_grid());
  REQUIRE(contexts.size() == 4000);

  double sum_tokens = 0.0;
  for (const auto& c : contexts) {
    const double tokens =
        static_cast<double>(c.profile.original_size_bytes) / params.bytes_per_token;
    CHECK(tokens >= kMinTokens - 1.0);
    CHECK(tokens <= kMaxTokens + 1.0);
    CHECK(c.profile.context.rfind("narrativeqa-", 0) == 0);
    CHECK_NOTHROW(validate_profile(c.profile));
    CHECK_FALSE(c.truth.empty());
    sum_tokens += tokens;
  }
  const double analytic = truncated_mean(108e3, 55e3, kMinTokens, kMaxTokens);
  const double se = 55e3 / std::sqrt(4000.0);  // upper bound on the SE
  CHECK(std::abs(sum_tokens / 4000.0 - analytic) < 5.0 * se);
}

TEST_CASE("zero token spread pins every context to the mean") {
  ContextBlock block;
  block.n = 5;
  block.mean_tokens = 50'000;
  block.std_tokens = 0.0;
  block.id_prefix = "c";
  UtilityParams params;
  const auto contexts = gen_contexts(1, block, params, MethodSet::default_set(),
                                     CandidateSpace::default_ratio_grid());
  for (const auto& c : contexts) {
    CHECK(c.profile.original_size_bytes == 6'000'000'000);
  }
  CHECK(contexts[0].profile.context == "c-0");

  SUBCASE("a custom block needs a mean") {
    ContextBlock bare;
    bare.n = 3;
    CHECK_THROWS_AS(gen_contexts(1, bare, params, MethodSet::default_set(),
                                 CandidateSpace::default_ratio_grid()),
                    ValidationError);
  }
  SUBCASE("unknown presets are rejected by name") {
    ContextBlock bad;
    bad.preset = "nope";
    bad.n = 3;
    CHECK_THROWS_AS(gen_contexts(1, bad, params, MethodSet::default_set(),
                                 CandidateSpace::default_ratio_grid()),
                    ValidationError);
  }
}

TEST_CASE("preset sensitivity medians survive generation") {
  UtilityParams params;
  auto median_truth = [&](const std::string& preset, std::uint64_t seed) {
    ContextBlock block;
    block.preset = preset;
    block.n = 500;
    const auto contexts = gen_contexts(seed, block, params, MethodSet::default_set(),
                                       CandidateSpace::default_ratio_grid());
    std::vector<double> s;
    for (const auto& c : contexts) {
      s.push_back(c.truth.per_method.at("keydiff").sensitivity);
    }
    std::sort(s.begin(), s.end());
    return s[s.size() / 2];
  };
  CHECK(median_truth("narrativeqa", 5) == doctest::Approx(0.340).epsilon(0.15));
  CHECK(median_truth("2wikimqa", 6) == doctest::Approx(0.681).epsilon(0.08));
  CHECK(median_truth("samsum", 7) == doctest::Approx(0.676).epsilon(0.08));
}

TEST_CASE("drifted sensitivity leaves the profile stale") {
  ContextBlock block;
  block.n = 4;
  block.mean_tokens = 30'000;
  block.std_tokens = 0.0;
  block.sensitivity = SensitivityDist::uniform(0.0, 0.0);          // believed lossless
  block.drifted_sensitivity = SensitivityDist::uniform(0.5, 0.5);  // world says otherwise
  UtilityParams params;
  const auto contexts = gen_contexts(9, block, params, MethodSet::default_set(),
                                     CandidateSpace::default_ratio_grid());
  for (const auto& c : contexts) {
    CHECK(quality_of(c.profile, {"keydiff", 0.9}) == doctest::Approx(1.0));
    CHECK(c.truth.per_method.at("keydiff").sensitivity == doctest::Approx(0.5));
    CHECK(c.truth.quality_at({"keydiff", 0.9}) == doctest::Approx(0.5));
  }
}

TEST_CASE("trace generation is a Poisson process over Zipf picks") {
  std::vector<ContextId> contexts;
  for (int i = 0; i < 16; ++i) contexts.push_back("c" + std::to_string(i));

  SUBCASE("deterministic per seed") {
    TraceGenParams p;
    p.arrival_rate = 2.0;
    p.duration = 50.0;
    const auto a = gen_trace(42, contexts, p);
    const auto b = gen_trace(42, contexts, p);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].t == b[i].t);
      CHECK(a[i].context == b[i].context);
    }
    const auto c = gen_trace(43, contexts, p);
    CHECK(a.size() != c.size());  // overwhelmingly likely for Poisson(100)
  }

  SUBCASE("arrival count matches the rate") {
    TraceGenParams p;
    p.arrival_rate = 2.0;
    p.duration = 100.0;
    const auto trace = gen_trace(7, contexts, p);
    CHECK(trace.size() > 200 - 45);  // lambda = 200, +/- 3 sigma
    CHECK(trace.size() < 200 + 45);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i].t >= trace[i - 1].t);
    }
    CHECK(trace.back().t <= 100.0);
  }

  SUBCASE("exponent zero spreads uniformly") {
    TraceGenParams p;
    p.arrival_rate = 40.0;
    p.duration = 100.0;
    p.zipf_exponent = 0.0;
    const auto trace = gen_trace(11, contexts, p);
    std::map<ContextId, int> counts;
    for (const auto& r : trace) ++counts[r.context];
    const double expect = static_cast<double>(trace.size()) / 16.0;
    const double sigma = std::sqrt(expect * (1.0 - 1.0 / 16.0));
    for (const auto& [id, n] : counts) {
      CHECK(std::abs(n - expect) < 6.0 * sigma);
    }
  }

  SUBCASE("exponent one gives a -1 log-log popularity slope") {
    TraceGenParams p;
    p.arrival_rate = 50.0;
    p.duration = 400.0;
    p.zipf_exponent = 1.0;
    p.shuffle_ranks = false;  // listed order = rank order
    const auto trace = gen_trace(13, contexts, p);
    std::map<ContextId, int> counts;
    for (const auto& r : trace) ++counts[r.context];

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 16; ++i) {
      const double x = std::log(i + 1.0);
      const double y = std::log(static_cast<double>(counts["c" + std::to_string(i)]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (16 * sxy - sx * sy) / (16 * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.15));
  }

  SUBCASE("generator parameters are validated") {
    TraceGenParams p;
    p.arrival_rate = 0.0;
    CHECK_THROWS_AS(gen_trace(1, contexts, p), ValidationError);
    p.arrival_rate = 1.0;
    p.duration = 0.0;
    CHECK_THROWS_AS(gen_trace(1, contexts, p), ValidationError);
  }
}

TEST_CASE("assigned frequencies predict the trace counts") {
  ContextBlock block;
  block.n = 8;
  block.mean_tokens = 10'000;
  block.std_tokens = 0.0;
  UtilityParams params;
  auto contexts = gen_contexts(3, block, params, MethodSet::default_set(),
                               CandidateSpace::default_ratio_grid());

  TraceGenParams p;
  p.arrival_rate = 3.0;
  p.duration = 200.0;
  p.zipf_exponent = 1.0;
  assign_zipf_frequencies(77, contexts, p);

  double total_rate = 0.0;
  for (const auto& c : contexts) total_rate += c.profile.frequency;
  CHECK(total_rate == doctest::Approx(3.0).epsilon(1e-9));

  std::vector<ContextId> ids;
  for (const auto& c : contexts) ids.push_back(c.profile.context);
  const auto trace = gen_trace(77, ids, p);

  std::map<ContextId, int> counts;
  for (const auto& r : trace) ++counts[r.context];
  for (const auto& c : contexts) {
    const double lambda = c.profile.frequency * p.duration;
    CHECK(std::abs(counts[c.profile.context] - lambda) <=
          5.0 * std::sqrt(lambda) + 5.0);
  }
}

TEST_CASE("traces serialize to JSONL and back") {
  const std::vector<Request> trace{{0.5, "a", 0}, {1.25, "b", 42}, {3.0, "a", 0}};
  const std::string text = serialize_trace(trace);

  // the zero-suffix convention keeps lines minimal
  CHECK(text.find("n_new_tokens") != std::string::npos);
  CHECK(text.substr(0, text.find('\n')).find("n_new_tokens") == std::string::npos);

  const auto parsed = parse_trace(text);
  REQUIRE(parsed.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(parsed[i].t == trace[i].t);
    CHECK(parsed[i].context == trace[i].context);
    CHECK(parsed[i].n_new_tokens == trace[i].n_new_tokens);
  }

  SUBCASE("blank lines are ignored") {
    const auto padded = parse_trace("\n" + text + "\n\n");
    CHECK(padded.size() == 3);
  }
}

TEST_CASE("trace parsing reports malformed lines by number") {
  CHECK_THROWS_WITH_AS(
      parse_trace("{\"t\": 1.0, \"context_id\": \"a\"}\n{oops\n"),
      doctest::Contains("line 2"), TraceError);
  CHECK_THROWS_WITH_AS(parse_trace("{\"t\": 1.0}\n"), doctest::Contains("line 1"),
                       TraceError);
  CHECK_THROWS_AS(
      parse_trace("{\"t\": 1.0, \"context_id\": \"a\", \"n_new_tokens\": -3}\n"),
      TraceError);
  CHECK_THROWS_AS(parse_trace("{\"t\": 1.0, \"context_id\": \"\"}\n"), TraceError);

  SUBCASE("out-of-order timestamps sort with a warning") {
    std::vector<std::string> warnings;
    const auto trace = parse_trace(
        "{\"t\": 2.0, \"context_id\": \"a\"}\n{\"t\": 1.0, \"context_id\": \"b\"}\n",
        &warnings);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0].t == 1.0);
    CHECK(trace[1].t == 2.0);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("out of order") != std::string::npos);
  }
}

TEST_CASE("trace and profile files round-trip on disk") {
  const TempDir tmp;

  SUBCASE("traces") {
    const std::vector<Request> trace{{0.5, "a", 0}, {1.5, "b", 7}};
    write_trace_file(tmp.file("t.jsonl"), trace);
    const auto back = read_trace_file(tmp.file("t.jsonl"));
    REQUIRE(back.size() == 2);
    CHECK(back[1].n_new_tokens == 7);
  }

  SUBCASE("profiles with truth curves") {
    ContextBlock block;
    block.n = 3;
    block.mean_tokens = 20'000;
    block.std_tokens = 5'000;
    block.id_prefix = "p";
    const auto contexts = gen_contexts(5, block, UtilityParams{},
                                       MethodSet::default_set(),
                                       CandidateSpace::default_ratio_grid());
    write_profiles_file(tmp.file("p.jsonl"), contexts, /*include_truth=*/true);
    const auto back = read_profiles_file(tmp.file("p.jsonl"));
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].profile.context == contexts[i].profile.context);
      CHECK(back[i].profile.original_size_bytes ==
            contexts[i].profile.original_size_bytes);
      CHECK(back[i].truth.per_method.at("keydiff").sensitivity ==
            doctest::Approx(contexts[i].truth.per_method.at("keydiff").sensitivity));
    }
  }

  SUBCASE("missing files are reported") {
    CHECK_THROWS_WITH_AS(read_trace_file(tmp.file("absent.jsonl")),
                         doctest::Contains("cannot open"), ValidationError);
    CHECK_THROWS_AS(read_profiles_file(tmp.file("absent.jsonl")), ValidationError);
  }

  SUBCASE("profile parse errors carry line numbers") {
    {
      std::ofstream out(tmp.file("bad.jsonl"));
      out << R"({"context_id": "ok", "size_bytes": 1000, "grid": [1.0],)"
          << R"( "methods": {"m": {"1": 1.0}}})" << "\n";
      out << "{nope\n";
    }
    CHECK_THROWS_WITH_AS(read_profiles_file(tmp.file("bad.jsonl")),
                         doctest::Contains("line 2"), ValidationError);
  }
}

TEST_CASE("scenario files load with defaults") {
  const auto loaded = load_scenario_text(minimal_scenario_json(), ".");
  CHECK(loaded.policy.kind == Policy::Kind::Joint);
  CHECK(loaded.scenario.seed == 3);
  CHECK(loaded.scenario.params.alpha == 1.0);
  CHECK_FALSE(loaded.scenario.warm_start);
  CHECK_FALSE(loaded.scenario.drift.enabled);
  REQUIRE(loaded.scenario.tiers.size() == 2);
  CHECK(loaded.scenario.tiers[0].name == "fast");
  CHECK(*loaded.scenario.tiers[0].capacity_bytes == 8'000'000'000);
  CHECK(loaded.scenario.tiers[0].read_bandwidth == doctest::Approx(20e9));
  CHECK(loaded.scenario.tiers[1].unlimited());
  CHECK(loaded.scenario.profiles.size() == 2);
  CHECK(loaded.trace.size() == 2);
  CHECK(loaded.scenario.order ==
        std::vector<ContextId>{"ctx1", "ctx2"});
  // default candidate grid, held in descending enumeration order
  CHECK(loaded.scenario.space.ratios().size() ==
        CandidateSpace::default_ratio_grid().size());
  CHECK(loaded.scenario.space.ratios().front() == 1.0);
  CHECK(loaded.scenario.space.ratios().back() == doctest::Approx(0.05));
}

TEST_CASE("scenario overrides rewrite the document before parsing") {
  const std::string text = minimal_scenario_json();

  SUBCASE("top-level scalars") {
    const auto loaded =
        load_scenario_text(text, ".", {"alpha=2.5", "seed=9", "policy=lru"});
    CHECK(loaded.scenario.params.alpha == doctest::Approx(2.5));
    CHECK(loaded.scenario.seed == 9);
    CHECK(loaded.policy.kind == Policy::Kind::Lru);
  }

  SUBCASE("array elements by numeric segment") {
    const auto loaded =
        load_scenario_text(text, ".", {"tiers.1.read_bandwidth_gbps=4"});
    CHECK(loaded.scenario.tiers[1].read_bandwidth == doctest::Approx(4e9));
  }

  SUBCASE("auto-created sections") {
    const auto loaded = load_scenario_text(text, ".", {"drift.threshold=0.2"});
    CHECK(loaded.scenario.drift.enabled);  // present implies enabled
    CHECK(loaded.scenario.drift.threshold == doctest::Approx(0.2));
  }

  SUBCASE("bad overrides are rejected") {
    CHECK_THROWS_AS(load_scenario_text(text, ".", {"noequals"}), ValidationError);
    CHECK_THROWS_AS(load_scenario_text(text, ".", {"=5"}), ValidationError);
    CHECK_THROWS_AS(load_scenario_text(text, ".", {"tiers.5.capacity_gb=1"}),
                    ValidationError);
    CHECK_THROWS_AS(load_scenario_text(text, ".", {"policy.kind=joint"}),
                    ValidationError);
  }
}

TEST_CASE("scenario structural errors are caught") {
  CHECK_THROWS_WITH_AS(load_scenario_text("{not json", "."),
                       doctest::Contains("bad scenario JSON"), ValidationError);
  CHECK_THROWS_AS(load_scenario_text("{}", "."), ValidationError);

  // drop each required section in turn
  const std::string text = minimal_scenario_json();
  CHECK_THROWS_WITH_AS(load_scenario_text(text, ".", {"tiers=[]"}),
                       doctest::Contains("tiers"), ValidationError);
  CHECK_THROWS_WITH_AS(load_scenario_text(text, ".", {"profiles={}"}),
                       doctest::Contains("profiles"), ValidationError);
  CHECK_THROWS_WITH_AS(load_scenario_text(text, ".", {"trace={}"}),
                       doctest::Contains("trace"), ValidationError);

  SUBCASE("duplicate context ids") {
    std::string dup = text;
    const std::string needle = "\"context_id\": \"ctx2\"";
    dup.replace(dup.find(needle), needle.size(), "\"context_id\": \"ctx1\"");
    // also retarget the trace so it stays referentially valid
    const std::string tneedle = "{\"t\": 2.0, \"context_id\": \"ctx2\"}";
    CHECK_THROWS_WITH_AS(load_scenario_text(dup, "."),
                         doctest::Contains("duplicate context id"), ValidationError);
    (void)tneedle;
  }

  SUBCASE("trace referencing an unknown context") {
    CHECK_THROWS_WITH_AS(
        load_scenario_text(
            text, ".", {"trace.inline.0.context_id=ghost"}),
        doctest::Contains("ghost"), ValidationError);
  }

  SUBCASE("a loaded scenario replays end to end") {
    const auto loaded = load_scenario_text(text, ".", {"warm_start=true"});
    const auto r = replay(loaded.trace, loaded.policy, loaded.scenario);
    CHECK(r.metrics.sum_ttft == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("generated scenarios wire frequencies into the profiles") {
  const std::string text = R"({
    "seed": 11,
    "tiers": [
      {"capacity_gb": 50, "read_bandwidth_gbps": 20},
      {"read_bandwidth_gbps": 2}
    ],
    "profiles": {"generate": [{"preset": "samsum", "n": 10}]},
    "trace": {"generate": {"arrival_rate": 2, "duration": 50, "zipf_exponent": 1.0}}
  })";

  const auto loaded = load_scenario_text(text, ".");
  CHECK(loaded.scenario.profiles.size() == 10);
  CHECK(loaded.scenario.truth.size() == 10);
  for (const auto& [id, profile] : loaded.scenario.profiles) {
    CHECK(id.rfind("samsum-", 0) == 0);
    CHECK(profile.frequency > 0.0);
  }
  double total_rate = 0.0;
  for (const auto& [id, profile] : loaded.scenario.profiles) {
    total_rate += profile.frequency;
  }
  CHECK(total_rate == doctest::Approx(2.0).epsilon(1e-9));

  // Poisson(100) bounds
  CHECK(loaded.trace.size() > 100 - 32);
  CHECK(loaded.trace.size() < 100 + 32);
  for (const auto& r : loaded.trace) {
    CHECK(loaded.scenario.profiles.count(r.context) == 1);
  }

  SUBCASE("reloading is bit-stable, reseeding is not") {
    const auto again = load_scenario_text(text, ".");
    CHECK(again.trace.size() == loaded.trace.size());
    for (std::size_t i = 0; i < again.trace.size(); ++i) {
      CHECK(again.trace[i].t == loaded.trace[i].t);
      CHECK(again.trace[i].context == loaded.trace[i].context);
    }
    const auto other = load_scenario_text(text, ".", {"seed=12"});
    bool same_sizes = other.trace.size() == loaded.trace.size();
    if (same_sizes) {
      bool all_equal = true;
      for (std::size_t i = 0; i < other.trace.size(); ++i) {
        if (other.trace[i].t != loaded.trace[i].t) all_equal = false;
      }
      CHECK_FALSE(all_equal);
    }
  }
}

TEST_CASE("random exact-solver instances respect the guard") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const OracleInstance inst = gen_oracle_instance(seed);
    CHECK(inst.profiles.size() >= 2);
    CHECK(inst.profiles.size() <= 6);
    REQUIRE(inst.tiers.size() == 2);
    CHECK_FALSE(inst.tiers[0].unlimited());
    CHECK(inst.tiers[1].unlimited());
    CHECK(inst.params.alpha >= 0.2);
    CHECK(inst.params.alpha <= 3.0);

    const double per_context = static_cast<double>(
        inst.space.methods().methods().size() * inst.space.ratios().size() *
        inst.tiers.size());
    CHECK(std::pow(per_context, static_cast<double>(inst.profiles.size())) <= 1e7);

    for (const auto& p : inst.profiles) {
      CHECK_NOTHROW(validate_profile(p));
      CHECK(p.frequency > 0.0);
      CHECK(p.original_size_bytes > 0);
    }
  }

  SUBCASE("deterministic per seed") {
    const OracleInstance a = gen_oracle_instance(23);
    const OracleInstance b = gen_oracle_instance(23);
    REQUIRE(a.profiles.size() == b.profiles.size());
    for (std::size_t i = 0; i < a.profiles.size(); ++i) {
      CHECK(a.profiles[i].original_size_bytes == b.profiles[i].original_size_bytes);
      CHECK(a.profiles[i].frequency == b.profiles[i].frequency);
    }
    CHECK(a.params.alpha == b.params.alpha);
  }
}
