#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvtier/core.hpp"
#include "kvtier/placement.hpp"
#include "kvtier/quality.hpp"
#include "kvtier/simulate.hpp"

// Workload construction: built-in dataset presets (context length and
// compression-sensitivity statistics), synthetic context and trace
// generators, and file ingestion for traces, profiles and scenarios.

namespace kvtier {

// Context-length statistics (tokens) per dataset, plus the median
// compression sensitivity where one is published; datasets without one
// fall back to a uniform sensitivity prior.
struct DatasetPreset {
  std::string name;
  double mean_tokens = 0.0;
  double std_tokens = 0.0;
  bool has_sensitivity = false;
  double sensitivity_median = 0.0;
};

const std::vector<DatasetPreset>& dataset_presets();
const DatasetPreset* find_preset(const std::string& name);
// Throws ValidationError listing the available presets.
const DatasetPreset& preset_by_name(const std::string& name);
std::string preset_names();

// Token counts are truncated to this range before sizing contexts.
inline constexpr double kMinTokens = 1e3;
inline constexpr double kMaxTokens = 2e5;

// One homogeneous group of generated contexts.
struct ContextBlock {
  std::string preset;     // empty = fully custom block
  int n = 0;
  std::string id_prefix;     // defaults to the preset name or "ctx"
  double mean_tokens = 0.0;  // 0 = take the preset's mean
  double std_tokens = -1.0;  // negative = take the preset's std (custom: 0)
  // Sensitivity of the profiled (believed) curves. When unset, the
  // preset median (cov-scaled normal) or the uniform prior is used.
  std::optional<SensitivityDist> sensitivity;
  // When set, the world's true curves are redrawn from this instead,
  // leaving the profile stale (drift).
  std::optional<SensitivityDist> drifted_sensitivity;
  double shape_k = 1.0;
  double cov = 0.2;
  double frequency = 1.0;
};

// Deterministic per seed. Sizes come from a truncated normal over
// tokens times bytes_per_token; quality tables from the sensitivity
// curves on `ratio_grid`.
std::vector<GeneratedContext> gen_contexts(std::uint64_t seed, const ContextBlock& block,
                                           const UtilityParams& params,
                                           const MethodSet& methods,
                                           const std::vector<double>& ratio_grid);

struct TraceGenParams {
  double arrival_rate = 1.0;  // requests per second
  double duration = 0.0;      // seconds
  double zipf_exponent = 1.0;
  std::int64_t n_new_tokens = 0;
  // Permute which context gets which popularity rank (otherwise listed
  // order = rank order).
  bool shuffle_ranks = true;
};

// Poisson arrivals, context picked by Zipf rank. Deterministic per seed.
std::vector<Request> gen_trace(std::uint64_t seed, const std::vector<ContextId>& contexts,
                               const TraceGenParams& params);

// Sets each context's expected accesses per second to match the trace
// generator's popularity for the same seed: rate x Zipf weight of rank.
void assign_zipf_frequencies(std::uint64_t seed, std::vector<GeneratedContext>& contexts,
                             const TraceGenParams& params);

// JSONL, one request per line: {"t": s, "context_id": id,
// "n_new_tokens": n?}. parse reports malformed lines by number and
// stable-sorts out-of-order timestamps (with a warning).
std::string serialize_trace(const std::vector<Request>& trace);
std::vector<Request> parse_trace(const std::string& text,
                                 std::vector<std::string>* warnings = nullptr);
std::vector<Request> read_trace_file(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr);
void write_trace_file(const std::string& path, const std::vector<Request>& trace);

// Profile files: one profile JSON object per line.
std::vector<GeneratedContext> read_profiles_file(const std::string& path);
void write_profiles_file(const std::string& path,
                         const std::vector<GeneratedContext>& contexts,
                         bool include_truth);

// A scenario file bundles everything one replay needs; see README for
// the schema. Trace and profiles may be inline generator blocks or
// paths relative to the scenario file.
struct LoadedScenario {
  Scenario scenario;
  std::vector<Request> trace;
  Policy policy;
  std::vector<std::string> warnings;
};

// `overrides` are dotted-path assignments applied to the JSON document
// before interpretation, e.g. "drift.threshold=0.25",
// "tiers.0.capacity_gb=12", "trace.generate.arrival_rate=3".
LoadedScenario load_scenario_text(const std::string& json_text,
                                  const std::string& base_dir,
                                  const std::vector<std::string>& overrides = {});
LoadedScenario load_scenario_file(const std::string& path,
                                  const std::vector<std::string>& overrides = {});

// Small random placement instance for greedy-vs-exact comparisons:
// 2 tiers (finite over unlimited), up to 6 contexts, and a candidate
// space kept within the exact solver's guard.
struct OracleInstance {
  std::vector<ContextProfile> profiles;
  std::vector<TierSpec> tiers;
  CandidateSpace space = CandidateSpace::default_space();
  UtilityParams params;
};

OracleInstance gen_oracle_instance(std::uint64_t seed);

}  // namespace kvtier
