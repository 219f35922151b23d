#pragma once

#include <cstdint>
#include <vector>

#include "kvtier/core.hpp"
#include "kvtier/quality.hpp"

// The placement score and the TTFT model: per-configuration load time,
// prefill cost, the (alpha * quality - ttft) * frequency score, and the
// enumeration of candidate (tier, method, ratio) configurations that
// placement chooses from.

namespace kvtier {

// One scored configuration option for a context.
struct ConfigCandidate {
  int tier_index = 0;  // position within the validated hierarchy
  int tier_id = 0;
  CompressionConfig config;
  std::int64_t size_bytes = 0;  // compressed size at this ratio
  double quality = 0.0;
  double ttft = 0.0;      // load time from this tier
  double frequency = 0.0; // the context's expected access rate
  double utility = 0.0;   // (alpha * quality - ttft) * frequency
};

// Scenario-level choice space: which methods and ratios placement may
// pick from. Ratios are kept unique and sorted descending, which is the
// enumeration order (gentler compression tried first).
class CandidateSpace {
 public:
  CandidateSpace(MethodSet methods, std::vector<double> ratio_grid);

  // Default methods and the ratio grid used throughout:
  // {0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0}.
  static CandidateSpace default_space();
  static std::vector<double> default_ratio_grid();

  const MethodSet& methods() const { return methods_; }
  const std::vector<double>& ratios() const { return ratios_; }

 private:
  MethodSet methods_;
  std::vector<double> ratios_;
};

// a*n + b*n^2 seconds to recompute n tokens from scratch.
double prefill_time(std::int64_t n_tokens, const UtilityParams& params);

// Seconds to fetch `size_bytes` from a tier and undo its compression:
// fixed latency + size / bandwidth + size * decompression overhead.
double load_time(std::int64_t size_bytes, const TierSpec& tier,
                 const CompressionMethod& method);

// The placement score. Higher is better; may be negative.
double utility_score(double quality, double ttft, double frequency, double alpha);

// Scores one (config, tier) option for a context: composes compressed
// size, profiled quality, load time and the utility score.
ConfigCandidate score_candidate(const ContextProfile& profile,
                                const CompressionConfig& config, const TierSpec& tier,
                                int tier_index, const MethodSet& methods,
                                const UtilityParams& params);

// Update options for a resident entry: methods x ratios x {current tier,
// every lower tier}. Same-tier options must strictly shrink the entry;
// lower-tier options may keep any ratio (moving down frees the entry's
// whole footprint regardless). The entry's current config paired with
// each lower tier is always included, even when it is off the grid.
// (method, ratio) pairs the profile cannot score are skipped.
std::vector<ConfigCandidate> enumerate_updates(const CacheEntry& entry,
                                               const ContextProfile& profile,
                                               const std::vector<TierSpec>& tiers,
                                               const CandidateSpace& space,
                                               const UtilityParams& params);

// Full cross product methods x ratios x all tiers, scored, no filter.
std::vector<ConfigCandidate> all_candidates(const ContextProfile& profile,
                                            const std::vector<TierSpec>& tiers,
                                            const CandidateSpace& space,
                                            const UtilityParams& params);

// How the initial configuration of a new entry is chosen. `Utility` is
// the policy default; `QualityFirst` maximizes quality before utility
// and exists for ablation runs.
enum class SelectionRule { Utility, QualityFirst };

// Deterministic preference order: utility, then quality, then faster
// tier, then larger ratio, then method name. Returns true when a wins.
bool candidate_preferred(const ConfigCandidate& a, const ConfigCandidate& b,
                         SelectionRule rule = SelectionRule::Utility);

// The preferred candidate of the full cross product. Throws when the
// profile cannot score any combination in the space.
ConfigCandidate best_config(const ContextProfile& profile,
                            const std::vector<TierSpec>& tiers,
                            const CandidateSpace& space, const UtilityParams& params,
                            SelectionRule rule = SelectionRule::Utility);

}  // namespace kvtier
