#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "kvtier/core.hpp"
#include "kvtier/placement.hpp"
#include "kvtier/quality.hpp"
#include "kvtier/rng.hpp"
#include "kvtier/utility.hpp"

// Deterministic trace replay: serve every request against the store
// under a policy, computing per-request TTFT and answer quality, with
// the drift-triggered re-profiling loop interleaved. Aggregates the
// per-request records into summary metrics.

namespace kvtier {

struct Request {
  double t = 0.0;  // arrival, seconds; traces are time-ordered
  ContextId context;
  std::int64_t n_new_tokens = 0;  // query suffix appended to the context
};

enum class Outcome { Hit, Miss };
const char* to_string(Outcome outcome);

struct RequestRecord {
  Request request;
  Outcome outcome = Outcome::Miss;
  int tier = -1;             // serving tier id on a hit
  CompressionConfig config;  // resident configuration on a hit
  double ttft = 0.0;
  double quality = 1.0;      // achieved answer quality
};

struct ReplayMetrics {
  std::size_t n_requests = 0;
  double sum_ttft = 0.0;
  double mean_ttft = 0.0;
  double p50_ttft = 0.0;  // nearest-rank percentiles
  double p90_ttft = 0.0;
  double p99_ttft = 0.0;
  double mean_quality = 0.0;
  double miss_fraction = 0.0;
  std::map<int, double> hit_fraction_by_tier;  // tier_id -> share of requests
};

// Online re-profiling knobs. The GPU counts as busy when the arrivals
// inside the trailing `gpu_window` seconds reach `max_batch`.
struct DriftConfig {
  bool enabled = false;
  double threshold = 0.3;        // predicted-minus-achieved trigger gap
  std::int64_t min_samples = 10;
  std::size_t window_size = 0;   // 0 = cumulative means
  ReprofileConfig reprofile;
  double gpu_window = 1.0;
  int max_batch = 8;
};

// Everything replay needs besides the trace and the policy.
struct Scenario {
  std::vector<TierSpec> tiers;
  UtilityParams params;
  CandidateSpace space = CandidateSpace::default_space();
  ProfileMap profiles;
  std::map<ContextId, TrueCurve> truth;  // world curves; absent = profile is exact
  std::vector<ContextId> order;          // context order for warm start
  DriftConfig drift;
  bool warm_start = false;         // pre-insert every context before the trace
  bool miss_store_bottom = false;  // misses land on the bottom tier, then rearrange
  std::uint64_t seed = 0;
};

// Checks hierarchy, params, profiles and referential integrity of
// `order`; throws ValidationError on the first problem.
void validate_scenario(const Scenario& scenario);

struct ReplayResult {
  std::vector<RequestRecord> records;
  ReplayMetrics metrics;
  std::vector<ProfilingCost> profiling_windows;
  std::size_t reprofile_count = 0;
  // Final resident configurations, keyed "tier<k>:<method>@<ratio>".
  std::map<std::string, std::size_t> final_placements;
  std::vector<PlacementAction> actions;  // every placement step taken
};

struct LookupResult {
  Outcome outcome = Outcome::Miss;
  int tier = -1;
  const CacheEntry* entry = nullptr;
};

// Pure query; never mutates the store.
LookupResult lookup(const StoreState& store, const ContextId& context);

// Step-by-step replay driver. `replay` below is the one-shot form.
class Replayer {
 public:
  Replayer(Policy policy, Scenario scenario);

  // Serves one request: hits load the resident entry (no migration,
  // only access stats change); misses recompute and then store through
  // the policy. Active profiling windows add their penalty. Afterwards
  // the drift trigger may re-profile the context and rearrange.
  RequestRecord step(const Request& request);

  const StoreState& store() const { return store_; }
  const ProfileMap& profiles() const { return scenario_.profiles; }

  // Aggregates everything served so far into a ReplayResult.
  ReplayResult finish();

 private:
  Policy policy_;
  Scenario scenario_;
  StoreState store_;
  std::vector<RequestRecord> records_;
  std::vector<PlacementAction> actions_;
  std::vector<ProfilingCost> windows_;
  std::map<ContextId, DriftState> drift_states_;
  std::deque<double> arrivals_;
  Rng reprofile_rng_;
  std::int64_t stamp_ = 0;
  std::size_t reprofile_count_ = 0;
  double last_t_ = 0.0;
  bool saw_request_ = false;

  void warm_up();
  bool gpu_free(double now);
  double active_penalty(double now) const;
  void maybe_reprofile(const ContextId& context, double now);
};

// Replays the whole trace in order. Deterministic: identical
// (trace, policy, scenario) inputs give identical results.
ReplayResult replay(const std::vector<Request>& trace, const Policy& policy,
                    const Scenario& scenario);

// Means, nearest-rank TTFT percentiles, hit/miss shares.
ReplayMetrics aggregate(const std::vector<RequestRecord>& records);

}  // namespace kvtier
