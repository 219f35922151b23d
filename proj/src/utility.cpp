#include "kvtier/utility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace kvtier {

namespace {

// True when the profile can score this (method, ratio) pair: the method
// is profiled and the ratio is not below the profile's grid.
bool scorable(const ContextProfile& profile, const std::string& method, double ratio) {
  auto it = profile.quality_table.find(method);
  if (it == profile.quality_table.end()) return false;
  return ratio >= profile.ratio_grid.front() - 1e-9;
}

}  // namespace

CandidateSpace::CandidateSpace(MethodSet methods, std::vector<double> ratio_grid)
    : methods_(std::move(methods)), ratios_(std::move(ratio_grid)) {
  if (ratios_.empty()) {
    throw ValidationError("candidate ratio grid must not be empty");
  }
  for (double r : ratios_) {
    if (!(r > 0.0) || r > 1.0 || !std::isfinite(r)) {
      throw ValidationError("candidate ratio out of (0, 1]");
    }
  }
  std::sort(ratios_.begin(), ratios_.end(), std::greater<double>());
  ratios_.erase(std::unique(ratios_.begin(), ratios_.end()), ratios_.end());
}

CandidateSpace CandidateSpace::default_space() {
  return CandidateSpace(MethodSet::default_set(), default_ratio_grid());
}

std::vector<double> CandidateSpace::default_ratio_grid() {
  return {0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0};
}

double prefill_time(std::int64_t n_tokens, const UtilityParams& params) {
  if (n_tokens < 0) {
    throw ValidationError("token count must be >= 0");
  }
  const double n = static_cast<double>(n_tokens);
  return params.prefill_a * n + params.prefill_b * n * n;
}

double load_time(std::int64_t size_bytes, const TierSpec& tier,
                 const CompressionMethod& method) {
  if (size_bytes < 0) {
    throw ValidationError("size must be >= 0");
  }
  const double s = static_cast<double>(size_bytes);
  return tier.fixed_access_latency + s / tier.read_bandwidth +
         s * method.decompression_overhead;
}

double utility_score(double quality, double ttft, double frequency, double alpha) {
  return (alpha * quality - ttft) * frequency;
}

ConfigCandidate score_candidate(const ContextProfile& profile,
                                const CompressionConfig& config, const TierSpec& tier,
                                int tier_index, const MethodSet& methods,
                                const UtilityParams& params) {
  ConfigCandidate c;
  c.tier_index = tier_index;
  c.tier_id = tier.tier_id;
  c.config = config;
  c.size_bytes = compressed_size(profile.original_size_bytes, config.ratio);
  c.quality = quality_of(profile, config);
  c.ttft = load_time(c.size_bytes, tier, methods.by_name(config.method));
  c.frequency = profile.frequency;
  c.utility = utility_score(c.quality, c.ttft, c.frequency, params.alpha);
  return c;
}

std::vector<ConfigCandidate> enumerate_updates(const CacheEntry& entry,
                                               const ContextProfile& profile,
                                               const std::vector<TierSpec>& tiers,
                                               const CandidateSpace& space,
                                               const UtilityParams& params) {
  std::size_t current = tiers.size();
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    if (tiers[i].tier_id == entry.tier) {
      current = i;
      break;
    }
  }
  if (current == tiers.size()) {
    throw ValidationError("entry for context " + entry.context +
                          " sits on a tier that is not in the hierarchy");
  }
  const std::int64_t current_bytes = entry.compressed_bytes();

  std::vector<ConfigCandidate> out;
  for (std::size_t ti = current; ti < tiers.size(); ++ti) {
    bool keep_config_covered = false;
    for (const auto& method : space.methods().methods()) {
      for (double ratio : space.ratios()) {
        if (!scorable(profile, method.name, ratio)) continue;
        const CompressionConfig config{method.name, ratio};
        if (ti == current) {
          if (compressed_size(entry.original_size_bytes, ratio) >= current_bytes) {
            continue;  // same tier: must strictly save space
          }
        } else if (config == entry.config) {
          keep_config_covered = true;
        }
        out.push_back(score_candidate(profile, config, tiers[ti],
                                      static_cast<int>(ti), space.methods(), params));
      }
    }
    // Pure eviction with the configuration kept as-is is always an
    // option, even when the current ratio is not on the grid.
    if (ti != current && !keep_config_covered &&
        space.methods().contains(entry.config.method) &&
        scorable(profile, entry.config.method, entry.config.ratio)) {
      out.push_back(score_candidate(profile, entry.config, tiers[ti],
                                    static_cast<int>(ti), space.methods(), params));
    }
  }
  return out;
}

std::vector<ConfigCandidate> all_candidates(const ContextProfile& profile,
                                            const std::vector<TierSpec>& tiers,
                                            const CandidateSpace& space,
                                            const UtilityParams& params) {
  std::vector<ConfigCandidate> out;
  out.reserve(tiers.size() * space.methods().methods().size() * space.ratios().size());
  for (std::size_t ti = 0; ti < tiers.size(); ++ti) {
    for (const auto& method : space.methods().methods()) {
      for (double ratio : space.ratios()) {
        if (!scorable(profile, method.name, ratio)) continue;
        out.push_back(score_candidate(profile, {method.name, ratio}, tiers[ti],
                                      static_cast<int>(ti), space.methods(), params));
      }
    }
  }
  return out;
}

bool candidate_preferred(const ConfigCandidate& a, const ConfigCandidate& b,
                         SelectionRule rule) {
  if (rule == SelectionRule::QualityFirst && a.quality != b.quality) {
    return a.quality > b.quality;
  }
  if (a.utility != b.utility) return a.utility > b.utility;
  if (a.quality != b.quality) return a.quality > b.quality;
  if (a.tier_id != b.tier_id) return a.tier_id < b.tier_id;
  if (a.config.ratio != b.config.ratio) return a.config.ratio > b.config.ratio;
  return a.config.method < b.config.method;
}

ConfigCandidate best_config(const ContextProfile& profile,
                            const std::vector<TierSpec>& tiers,
                            const CandidateSpace& space, const UtilityParams& params,
                            SelectionRule rule) {
  const auto candidates = all_candidates(profile, tiers, space, params);
  if (candidates.empty()) {
    throw ValidationError("no scorable configuration for context " + profile.context);
  }
  const ConfigCandidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (candidate_preferred(c, *best, rule)) best = &c;
  }
  return *best;
}

}  // namespace kvtier
