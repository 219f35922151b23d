#include "kvtier/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace kvtier {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) {
      throw ValidationError("trailing characters in " + what + ": '" + text + "'");
    }
    return value;
  } catch (const std::invalid_argument&) {
    throw ValidationError("not a number for " + what + ": '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ValidationError("out-of-range number for " + what + ": '" + text + "'");
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const ContextProfile& profile_for(const ProfileMap& profiles, const ContextId& context) {
  auto it = profiles.find(context);
  if (it == profiles.end()) {
    throw ValidationError("no profile for context " + context);
  }
  return it->second;
}

StoreState::StoreState(std::vector<TierSpec> tiers)
    : tiers_(validate_hierarchy(std::move(tiers))),
      residents_(tiers_.size()),
      occupancy_(tiers_.size(), 0) {}

bool StoreState::over_capacity(std::size_t tier_index) const {
  const TierSpec& t = tiers_[tier_index];
  return !t.unlimited() && occupancy_[tier_index] > *t.capacity_bytes;
}

std::optional<std::size_t> StoreState::first_over_capacity() const {
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (over_capacity(i)) return i;
  }
  return std::nullopt;
}

bool StoreState::contains(const ContextId& context) const {
  return tier_of_.count(context) != 0;
}

const CacheEntry* StoreState::find(const ContextId& context) const {
  auto it = tier_of_.find(context);
  if (it == tier_of_.end()) return nullptr;
  for (const auto& e : residents_[it->second]) {
    if (e.context == context) return &e;
  }
  return nullptr;
}

CacheEntry* StoreState::find_mutable(const ContextId& context) {
  auto it = tier_of_.find(context);
  if (it == tier_of_.end()) return nullptr;
  for (auto& e : residents_[it->second]) {
    if (e.context == context) return &e;
  }
  return nullptr;
}

std::size_t StoreState::tier_index_of(const ContextId& context) const {
  auto it = tier_of_.find(context);
  if (it == tier_of_.end()) {
    throw ValidationError("context " + context + " is not resident");
  }
  return it->second;
}

void StoreState::add(CacheEntry entry) {
  if (contains(entry.context)) {
    throw ValidationError("context " + entry.context + " is already resident");
  }
  std::size_t index = tiers_.size();
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (tiers_[i].tier_id == entry.tier) {
      index = i;
      break;
    }
  }
  if (index == tiers_.size()) {
    throw ValidationError("unknown tier_id " + std::to_string(entry.tier));
  }
  occupancy_[index] += entry.compressed_bytes();
  tier_of_[entry.context] = index;
  residents_[index].push_back(std::move(entry));
}

CacheEntry StoreState::remove(const ContextId& context) {
  const std::size_t index = tier_index_of(context);
  auto& tier = residents_[index];
  for (auto it = tier.begin(); it != tier.end(); ++it) {
    if (it->context == context) {
      // `context` may alias it->context (callers pass references into the
      // store), so erase the map entry via the moved-out copy.
      CacheEntry out = std::move(*it);
      tier.erase(it);
      occupancy_[index] -= out.compressed_bytes();
      tier_of_.erase(out.context);
      return out;
    }
  }
  throw ValidationError("store index out of sync for context " + context);
}

void StoreState::reconfigure(const ContextId& context, const CompressionConfig& config) {
  const std::size_t index = tier_index_of(context);
  CacheEntry* e = find_mutable(context);
  occupancy_[index] -= e->compressed_bytes();
  e->config = config;
  occupancy_[index] += e->compressed_bytes();
}

void StoreState::touch(const ContextId& context, std::int64_t stamp) {
  CacheEntry* e = find_mutable(context);
  if (e == nullptr) {
    throw ValidationError("context " + context + " is not resident");
  }
  e->frequency += 1;
  e->last_access = stamp;
}

void StoreState::clear() {
  for (auto& tier : residents_) tier.clear();
  std::fill(occupancy_.begin(), occupancy_.end(), 0);
  tier_of_.clear();
}

std::size_t StoreState::size() const { return tier_of_.size(); }

std::vector<ContextId> StoreState::contexts() const {
  std::vector<ContextId> out;
  out.reserve(size());
  for (const auto& tier : residents_) {
    for (const auto& e : tier) out.push_back(e.context);
  }
  return out;
}

namespace {

// Preference among overflow updates: least utility drop, more bytes
// freed, smaller context id; earlier enumeration wins remaining ties.
bool update_preferred(const UpdateCandidate& a, const UpdateCandidate& b) {
  if (a.utility_drop != b.utility_drop) return a.utility_drop < b.utility_drop;
  if (a.bytes_freed != b.bytes_freed) return a.bytes_freed > b.bytes_freed;
  if (a.context != b.context) return a.context < b.context;
  return false;
}

}  // namespace

UpdateCandidate least_drop_update(const StoreState& store, std::size_t tier_index,
                                  const ProfileMap& profiles, const CandidateSpace& space,
                                  const UtilityParams& params) {
  const TierSpec& tier = store.tier(tier_index);
  std::optional<UpdateCandidate> best;
  for (const auto& entry : store.residents(tier_index)) {
    const ContextProfile& profile = profile_for(profiles, entry.context);
    const ConfigCandidate current =
        score_candidate(profile, entry.config, tier, static_cast<int>(tier_index),
                        space.methods(), params);
    for (const auto& option :
         enumerate_updates(entry, profile, store.tiers(), space, params)) {
      UpdateCandidate u;
      u.context = entry.context;
      u.kind = option.tier_index == static_cast<int>(tier_index)
                   ? PlacementAction::Kind::Recompress
                   : PlacementAction::Kind::Evict;
      u.target = option;
      u.utility_drop = current.utility - option.utility;
      u.bytes_freed = u.kind == PlacementAction::Kind::Recompress
                          ? current.size_bytes - option.size_bytes
                          : current.size_bytes;
      if (!best || update_preferred(u, *best)) best = u;
    }
  }
  if (!best) {
    throw ValidationError("tier " + tier.name +
                          " is over capacity and no resident has a space-saving option");
  }
  return *best;
}

void resolve_overflow(StoreState& store, const ProfileMap& profiles,
                      const CandidateSpace& space, const UtilityParams& params,
                      std::vector<PlacementAction>& actions) {
  // Updates move entries down or shrink them, never up, so clearing the
  // topmost over-full tier first makes the sweep terminate.
  while (auto over = store.first_over_capacity()) {
    const UpdateCandidate u = least_drop_update(store, *over, profiles, space, params);
    if (u.kind == PlacementAction::Kind::Recompress) {
      store.reconfigure(u.context, u.target.config);
    } else {
      CacheEntry moved = store.remove(u.context);
      moved.tier = u.target.tier_id;
      moved.config = u.target.config;
      store.add(std::move(moved));
    }
    actions.push_back({u.kind, u.context, u.target.tier_id, u.target.config});
  }
}

std::vector<PlacementAction> insert_joint(StoreState& store, const ContextId& context,
                                          const ProfileMap& profiles,
                                          const CandidateSpace& space,
                                          const UtilityParams& params,
                                          std::int64_t frequency, std::int64_t stamp,
                                          SelectionRule rule) {
  if (store.contains(context)) {
    throw ValidationError("context " + context + " is already resident");
  }
  const ContextProfile& profile = profile_for(profiles, context);
  const ConfigCandidate best = best_config(profile, store.tiers(), space, params, rule);

  CacheEntry entry;
  entry.context = context;
  entry.original_size_bytes = profile.original_size_bytes;
  entry.config = best.config;
  entry.tier = best.tier_id;
  entry.frequency = frequency;
  entry.last_access = stamp;
  store.add(std::move(entry));

  std::vector<PlacementAction> actions{
      {PlacementAction::Kind::Insert, context, best.tier_id, best.config}};
  resolve_overflow(store, profiles, space, params, actions);
  return actions;
}

std::vector<PlacementAction> rearrange(StoreState& store, const ProfileMap& profiles,
                                       const CandidateSpace& space,
                                       const UtilityParams& params, SelectionRule rule) {
  struct Saved {
    ContextId context;
    std::int64_t frequency;
    std::int64_t stamp;
    double utility;
  };
  std::vector<Saved> saved;
  saved.reserve(store.size());
  for (std::size_t ti = 0; ti < store.tier_count(); ++ti) {
    for (const auto& e : store.residents(ti)) {
      const ContextProfile& profile = profile_for(profiles, e.context);
      const ConfigCandidate best = best_config(profile, store.tiers(), space, params, rule);
      saved.push_back({e.context, e.frequency, e.last_access, best.utility});
    }
  }
  std::stable_sort(saved.begin(), saved.end(), [](const Saved& a, const Saved& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    return a.context < b.context;
  });

  store.clear();
  std::vector<PlacementAction> actions;
  for (const auto& s : saved) {
    auto steps = insert_joint(store, s.context, profiles, space, params, s.frequency,
                              s.stamp, rule);
    actions.insert(actions.end(), steps.begin(), steps.end());
  }
  return actions;
}

double placement_utility(const StoreState& store, const ProfileMap& profiles,
                         const MethodSet& methods, const UtilityParams& params) {
  double total = 0.0;
  for (std::size_t ti = 0; ti < store.tier_count(); ++ti) {
    for (const auto& e : store.residents(ti)) {
      const ContextProfile& profile = profile_for(profiles, e.context);
      const double q = quality_of(profile, e.config);
      const double t =
          load_time(e.compressed_bytes(), store.tier(ti), methods.by_name(e.config.method));
      total += utility_score(q, t, profile.frequency, params.alpha);
    }
  }
  return total;
}

OracleResult oracle_mckp(const std::vector<ContextProfile>& profiles,
                         const std::vector<TierSpec>& tiers, const CandidateSpace& space,
                         const UtilityParams& params, double max_assignments) {
  const auto hierarchy = validate_hierarchy(tiers);
  const std::size_t n = profiles.size();

  std::vector<std::vector<ConfigCandidate>> candidates(n);
  double assignments = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    candidates[i] = all_candidates(profiles[i], hierarchy, space, params);
    if (candidates[i].empty()) {
      throw ValidationError("no scorable configuration for context " +
                            profiles[i].context);
    }
    // Highest-utility options first: tightens the search bound early and
    // makes the first optimum found the preferred one.
    std::stable_sort(candidates[i].begin(), candidates[i].end(),
                     [](const ConfigCandidate& a, const ConfigCandidate& b) {
                       return candidate_preferred(a, b);
                     });
    assignments *= static_cast<double>(candidates[i].size());
    if (assignments > max_assignments) {
      throw ValidationError(
          "instance too large for the exact solver: assignment space exceeds " +
          format_number(max_assignments));
    }
  }

  // Optimistic completion bound: best remaining utility per context.
  std::vector<double> suffix_bound(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    suffix_bound[i] = suffix_bound[i + 1] + candidates[i].front().utility;
  }

  std::vector<std::int64_t> used(hierarchy.size(), 0);
  std::vector<std::size_t> choice(n, 0), best_choice;
  double best_total = -std::numeric_limits<double>::infinity();
  bool found = false;

  std::function<void(std::size_t, double)> dfs = [&](std::size_t i, double total) {
    if (found && total + suffix_bound[i] <= best_total) return;
    if (i == n) {
      best_total = total;
      best_choice = choice;
      found = true;
      return;
    }
    for (std::size_t k = 0; k < candidates[i].size(); ++k) {
      const ConfigCandidate& c = candidates[i][k];
      const TierSpec& tier = hierarchy[static_cast<std::size_t>(c.tier_index)];
      if (!tier.unlimited() &&
          used[static_cast<std::size_t>(c.tier_index)] + c.size_bytes >
              *tier.capacity_bytes) {
        continue;
      }
      used[static_cast<std::size_t>(c.tier_index)] += c.size_bytes;
      choice[i] = k;
      dfs(i + 1, total + c.utility);
      used[static_cast<std::size_t>(c.tier_index)] -= c.size_bytes;
    }
  };
  dfs(0, 0.0);

  if (!found) {
    throw ValidationError("no feasible one-config-per-context assignment exists");
  }
  OracleResult result;
  result.total_utility = best_total;
  for (std::size_t i = 0; i < n; ++i) {
    result.assignment.emplace(profiles[i].context, candidates[i][best_choice[i]]);
  }
  return result;
}

namespace {

// Shared LRU cascade: while a tier overflows, push its least-recently
// used entry one tier down, unchanged.
std::vector<PlacementAction> lru_insert_impl(StoreState& store, const ContextId& context,
                                             std::int64_t original_size_bytes,
                                             const CompressionConfig& config,
                                             std::int64_t frequency, std::int64_t stamp) {
  if (store.contains(context)) {
    throw ValidationError("context " + context + " is already resident");
  }
  if (original_size_bytes <= 0) {
    throw ValidationError("entry size must be > 0 for context " + context);
  }
  CacheEntry entry;
  entry.context = context;
  entry.original_size_bytes = original_size_bytes;
  entry.config = config;
  entry.tier = store.tier(0).tier_id;
  entry.frequency = frequency;
  entry.last_access = stamp;
  store.add(std::move(entry));

  std::vector<PlacementAction> actions{
      {PlacementAction::Kind::Insert, context, store.tier(0).tier_id, config}};
  for (std::size_t ti = 0; ti < store.tier_count(); ++ti) {
    while (store.over_capacity(ti)) {
      if (ti + 1 >= store.tier_count()) {
        throw ValidationError("tier " + store.tier(ti).name +
                              " overflows and there is no lower tier");
      }
      const CacheEntry* victim = nullptr;
      for (const auto& e : store.residents(ti)) {
        if (victim == nullptr || e.last_access < victim->last_access) victim = &e;
      }
      CacheEntry moved = store.remove(victim->context);
      moved.tier = store.tier(ti + 1).tier_id;
      actions.push_back({PlacementAction::Kind::Evict, moved.context, moved.tier,
                         moved.config});
      store.add(std::move(moved));
    }
  }
  return actions;
}

}  // namespace

std::vector<PlacementAction> insert_lru(StoreState& store, const ContextId& context,
                                        std::int64_t original_size_bytes,
                                        const std::string& method_name,
                                        std::int64_t frequency, std::int64_t stamp) {
  // Ratio 1.0 means uncompressed; the method only labels the entry.
  return lru_insert_impl(store, context, original_size_bytes, {method_name, 1.0},
                         frequency, stamp);
}

std::vector<PlacementAction> insert_fixed(StoreState& store, const ContextId& context,
                                          std::int64_t original_size_bytes,
                                          const CompressionConfig& config,
                                          std::int64_t frequency, std::int64_t stamp) {
  if (!(config.ratio > 0.0) || config.ratio > 1.0) {
    throw ValidationError("fixed compression ratio out of (0, 1]");
  }
  return lru_insert_impl(store, context, original_size_bytes, config, frequency, stamp);
}

Policy Policy::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t colon = text.find(':', begin);
    parts.push_back(text.substr(begin, colon - begin));
    if (colon == std::string::npos) break;
    begin = colon + 1;
  }

  Policy p;
  const std::string& head = parts.front();
  if (head == "joint" && parts.size() == 1) {
    return p;
  }
  if (head == "joint-qargmax" && parts.size() == 1) {
    p.rule = SelectionRule::QualityFirst;
    return p;
  }
  if (head == "lru" && parts.size() == 1) {
    p.kind = Kind::Lru;
    return p;
  }
  if (head == "fixed" && parts.size() == 3) {
    p.kind = Kind::Fixed;
    p.fixed.method = parts[1];
    p.fixed.ratio = parse_number(parts[2], "fixed ratio");
    if (p.fixed.method.empty()) {
      throw ValidationError("fixed policy needs a method name");
    }
    if (!(p.fixed.ratio > 0.0) || p.fixed.ratio > 1.0) {
      throw ValidationError("fixed ratio must be in (0, 1]");
    }
    return p;
  }
  if (head == "impress" && (parts.size() == 2 || parts.size() == 3)) {
    p.kind = Kind::Impress;
    p.keep_fraction = parse_number(parts[1], "impress keep fraction");
    if (!(p.keep_fraction > 0.0) || p.keep_fraction > 1.0) {
      throw ValidationError("impress keep fraction must be in (0, 1]");
    }
    if (parts.size() == 3) {
      p.chunk_overhead = parse_number(parts[2], "impress chunk overhead");
      if (!(p.chunk_overhead > 0.0)) {
        throw ValidationError("impress chunk overhead must be > 0");
      }
    }
    return p;
  }
  if (head == "prefill" && parts.size() == 1) {
    p.kind = Kind::Prefill;
    return p;
  }
  throw ValidationError("unknown policy '" + text +
                        "' (expected joint, joint-qargmax, lru, fixed:<method>:<ratio>, "
                        "impress:<fraction>[:<chunk-overhead>], or prefill)");
}

std::string Policy::label() const {
  switch (kind) {
    case Kind::Joint:
      return rule == SelectionRule::QualityFirst ? "joint-qargmax" : "joint";
    case Kind::Lru:
      return "lru";
    case Kind::Fixed:
      return "fixed:" + fixed.method + ":" + format_number(fixed.ratio);
    case Kind::Impress:
      return chunk_overhead == 1.3
                 ? "impress:" + format_number(keep_fraction)
                 : "impress:" + format_number(keep_fraction) + ":" +
                       format_number(chunk_overhead);
    case Kind::Prefill:
      return "prefill";
  }
  return "?";
}

std::vector<PlacementAction> policy_insert(StoreState& store, const Policy& policy,
                                           const ContextId& context,
                                           const ProfileMap& profiles,
                                           const CandidateSpace& space,
                                           const UtilityParams& params,
                                           std::int64_t frequency, std::int64_t stamp) {
  switch (policy.kind) {
    case Policy::Kind::Joint:
      return insert_joint(store, context, profiles, space, params, frequency, stamp,
                          policy.rule);
    case Policy::Kind::Lru:
      return insert_lru(store, context, profile_for(profiles, context).original_size_bytes,
                        space.methods().methods().front().name, frequency, stamp);
    case Policy::Kind::Fixed:
      if (!space.methods().contains(policy.fixed.method)) {
        throw ValidationError("fixed policy method " + policy.fixed.method +
                              " is not in the method set");
      }
      return insert_fixed(store, context,
                          profile_for(profiles, context).original_size_bytes, policy.fixed,
                          frequency, stamp);
    case Policy::Kind::Impress:
      return insert_fixed(store, context,
                          profile_for(profiles, context).original_size_bytes,
                          {space.methods().methods().front().name, policy.keep_fraction},
                          frequency, stamp);
    case Policy::Kind::Prefill:
      return {};
  }
  return {};
}

}  // namespace kvtier
