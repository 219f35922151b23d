#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kvtier/core.hpp"
#include "kvtier/quality.hpp"
#include "kvtier/utility.hpp"

// Placement policies over the tier hierarchy: the greedy joint
// compression+eviction policy (insert at the best configuration, resolve
// overflow by least-utility-drop updates, cascade downward), global
// rearrangement, an exact small-instance solver for validation, and the
// baseline policies used for comparison.

namespace kvtier {

using ProfileMap = std::map<ContextId, ContextProfile>;

// Lookup that reports the missing context by name.
const ContextProfile& profile_for(const ProfileMap& profiles, const ContextId& context);

// What currently lives on every tier. Entries are kept per tier in
// arrival order; occupancy is maintained incrementally and checked
// against capacity by the policies.
class StoreState {
 public:
  explicit StoreState(std::vector<TierSpec> tiers);

  const std::vector<TierSpec>& tiers() const { return tiers_; }
  std::size_t tier_count() const { return tiers_.size(); }
  const TierSpec& tier(std::size_t tier_index) const { return tiers_[tier_index]; }

  const std::vector<CacheEntry>& residents(std::size_t tier_index) const {
    return residents_[tier_index];
  }
  std::int64_t occupancy(std::size_t tier_index) const { return occupancy_[tier_index]; }
  bool over_capacity(std::size_t tier_index) const;
  // Topmost tier whose occupancy exceeds its capacity, if any.
  std::optional<std::size_t> first_over_capacity() const;

  bool contains(const ContextId& context) const;
  const CacheEntry* find(const ContextId& context) const;
  std::size_t tier_index_of(const ContextId& context) const;

  // Appends the entry to its tier (entry.tier must name a real tier).
  void add(CacheEntry entry);
  // Removes and returns the entry; throws if absent.
  CacheEntry remove(const ContextId& context);
  // Changes the entry's configuration in place on its current tier.
  void reconfigure(const ContextId& context, const CompressionConfig& config);
  // Bumps the access stats of a resident entry.
  void touch(const ContextId& context, std::int64_t stamp);
  void clear();

  std::size_t size() const;
  // Every resident context, tier by tier in arrival order.
  std::vector<ContextId> contexts() const;

 private:
  std::vector<TierSpec> tiers_;
  std::vector<std::vector<CacheEntry>> residents_;
  std::vector<std::int64_t> occupancy_;
  std::map<ContextId, std::size_t> tier_of_;

  CacheEntry* find_mutable(const ContextId& context);
};

// One overflow-resolution step: change `context` to `target` (same tier
// = recompress, lower tier = evict), dropping this much utility and
// freeing this many bytes on the over-full tier.
struct UpdateCandidate {
  ContextId context;
  PlacementAction::Kind kind = PlacementAction::Kind::Recompress;
  ConfigCandidate target;
  double utility_drop = 0.0;  // negative when the change improves utility
  std::int64_t bytes_freed = 0;
};

// The cheapest update on an over-full tier: minimum utility drop over
// every resident's options; ties prefer more bytes freed, then the
// smaller context id, then enumeration order. Throws when no resident
// has any space-saving option (possible only without a lower tier).
UpdateCandidate least_drop_update(const StoreState& store, std::size_t tier_index,
                                  const ProfileMap& profiles,
                                  const CandidateSpace& space,
                                  const UtilityParams& params);

// Applies least-drop updates until no finite tier is over capacity,
// top tier first; appends one action per step.
void resolve_overflow(StoreState& store, const ProfileMap& profiles,
                      const CandidateSpace& space, const UtilityParams& params,
                      std::vector<PlacementAction>& actions);

// Joint policy insert: place the context at its preferred configuration
// and tier, then resolve overflow. `frequency`/`stamp` seed the entry's
// access stats. Returns the action list in application order.
std::vector<PlacementAction> insert_joint(StoreState& store, const ContextId& context,
                                          const ProfileMap& profiles,
                                          const CandidateSpace& space,
                                          const UtilityParams& params,
                                          std::int64_t frequency, std::int64_t stamp,
                                          SelectionRule rule = SelectionRule::Utility);

// Drops every placement and reinserts all resident contexts in order of
// descending preferred-configuration utility, keeping their access
// stats. Used after profiles change.
std::vector<PlacementAction> rearrange(StoreState& store, const ProfileMap& profiles,
                                       const CandidateSpace& space,
                                       const UtilityParams& params,
                                       SelectionRule rule = SelectionRule::Utility);

// Sum of the resident entries' utility scores under the given profiles.
double placement_utility(const StoreState& store, const ProfileMap& profiles,
                         const MethodSet& methods, const UtilityParams& params);

// Exact reference solver: picks one (tier, method, ratio) per context,
// maximizing total utility subject to every finite tier's capacity.
struct OracleResult {
  double total_utility = 0.0;
  std::map<ContextId, ConfigCandidate> assignment;
};

// Depth-first search with an optimistic-bound prune. Refuses instances
// whose assignment space exceeds `max_assignments` (default 1e7).
OracleResult oracle_mckp(const std::vector<ContextProfile>& profiles,
                         const std::vector<TierSpec>& tiers,
                         const CandidateSpace& space, const UtilityParams& params,
                         double max_assignments = 1e7);

// Eviction-only baseline: store uncompressed at the top tier; overflow
// evicts the least-recently-used entry one tier down, cascading.
// `method_name` only labels the entry (ratio 1.0 means uncompressed).
std::vector<PlacementAction> insert_lru(StoreState& store, const ContextId& context,
                                        std::int64_t original_size_bytes,
                                        const std::string& method_name,
                                        std::int64_t frequency, std::int64_t stamp);

// Fixed-compression baseline: like LRU but every entry is stored at one
// (method, ratio) chosen up front.
std::vector<PlacementAction> insert_fixed(StoreState& store, const ContextId& context,
                                          std::int64_t original_size_bytes,
                                          const CompressionConfig& config,
                                          std::int64_t frequency, std::int64_t stamp);

// Which policy serves and stores entries, plus its parameters.
struct Policy {
  enum class Kind { Joint, Lru, Fixed, Impress, Prefill };

  Kind kind = Kind::Joint;
  SelectionRule rule = SelectionRule::Utility;  // Joint ablation switch
  CompressionConfig fixed;                      // Fixed
  double keep_fraction = 1.0;                   // Impress: retained token share
  double chunk_overhead = 1.3;                  // Impress: load-time multiplier

  // "joint", "joint-qargmax", "lru", "fixed:<method>:<ratio>",
  // "impress:<fraction>", "prefill".
  static Policy parse(const std::string& text);
  std::string label() const;
};

// Dispatches one miss-driven store to the policy (no-op for Prefill).
// The impress baseline stores at (first method, keep_fraction).
std::vector<PlacementAction> policy_insert(StoreState& store, const Policy& policy,
                                           const ContextId& context,
                                           const ProfileMap& profiles,
                                           const CandidateSpace& space,
                                           const UtilityParams& params,
                                           std::int64_t frequency, std::int64_t stamp);

}  // namespace kvtier
