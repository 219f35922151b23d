#include "kvtier/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kvtier {

const char* to_string(Outcome outcome) {
  return outcome == Outcome::Hit ? "hit" : "miss";
}

void validate_scenario(const Scenario& scenario) {
  validate_hierarchy(scenario.tiers);
  validate_params(scenario.params);
  if (scenario.profiles.empty()) {
    throw ValidationError("scenario has no context profiles");
  }
  for (const auto& [context, profile] : scenario.profiles) {
    if (profile.context != context) {
      throw ValidationError("profile keyed " + context + " names context " +
                            profile.context);
    }
    validate_profile(profile);
  }
  for (const auto& context : scenario.order) {
    if (scenario.profiles.count(context) == 0) {
      throw ValidationError("context order names unknown context " + context);
    }
  }
  for (const auto& [context, curve] : scenario.truth) {
    if (scenario.profiles.count(context) == 0) {
      throw ValidationError("true curve for unknown context " + context);
    }
    (void)curve;
  }
  if (scenario.drift.threshold < 0.0 || scenario.drift.min_samples < 0) {
    throw ValidationError("invalid drift configuration");
  }
}

LookupResult lookup(const StoreState& store, const ContextId& context) {
  LookupResult r;
  const CacheEntry* entry = store.find(context);
  if (entry != nullptr) {
    r.outcome = Outcome::Hit;
    r.tier = entry->tier;
    r.entry = entry;
  }
  return r;
}

namespace {

std::vector<TierSpec> checked_tiers(const Scenario& scenario) {
  validate_scenario(scenario);
  return scenario.tiers;
}

}  // namespace

Replayer::Replayer(Policy policy, Scenario scenario)
    : policy_(std::move(policy)),
      scenario_(std::move(scenario)),
      store_(checked_tiers(scenario_)),
      reprofile_rng_(scenario_.seed ^ 0x9e3779b97f4a7c15ull) {
  scenario_.tiers = store_.tiers();  // keep the validated (sorted) order
  if (scenario_.warm_start) warm_up();
}

void Replayer::warm_up() {
  std::vector<ContextId> order = scenario_.order;
  if (order.empty()) {
    for (const auto& [context, profile] : scenario_.profiles) {
      (void)profile;
      order.push_back(context);
    }
  }
  for (const auto& context : order) {
    auto steps = policy_insert(store_, policy_, context, scenario_.profiles,
                               scenario_.space, scenario_.params, /*frequency=*/0,
                               stamp_++);
    actions_.insert(actions_.end(), steps.begin(), steps.end());
  }
}

bool Replayer::gpu_free(double now) {
  while (!arrivals_.empty() && arrivals_.front() <= now - scenario_.drift.gpu_window) {
    arrivals_.pop_front();
  }
  return static_cast<int>(arrivals_.size()) < scenario_.drift.max_batch;
}

double Replayer::active_penalty(double now) const {
  double penalty = 0.0;
  for (const auto& w : windows_) {
    if (now >= w.start && now < w.start + w.duration) penalty += w.penalty;
  }
  return penalty;
}

void Replayer::maybe_reprofile(const ContextId& context, double now) {
  if (!scenario_.drift.enabled || policy_.kind != Policy::Kind::Joint) return;
  auto state = drift_states_.find(context);
  if (state == drift_states_.end()) return;
  if (!should_reprofile(state->second, scenario_.drift.threshold, gpu_free(now),
                        scenario_.drift.min_samples)) {
    return;
  }
  auto truth = scenario_.truth.find(context);
  if (truth == scenario_.truth.end()) return;

  auto [fresh, cost] = reprofile(scenario_.profiles.at(context), truth->second,
                                 reprofile_rng_.next_u64(), now,
                                 scenario_.drift.reprofile);
  scenario_.profiles[context] = std::move(fresh);
  windows_.push_back(cost);
  ++reprofile_count_;

  DriftState reset;
  reset.context = context;
  reset.window_size = scenario_.drift.window_size;
  state->second = std::move(reset);

  auto steps = rearrange(store_, scenario_.profiles, scenario_.space, scenario_.params,
                         policy_.rule);
  actions_.insert(actions_.end(), steps.begin(), steps.end());
}

RequestRecord Replayer::step(const Request& request) {
  if (saw_request_ && request.t < last_t_) {
    throw TraceError("trace timestamps are not monotone (t=" +
                     std::to_string(request.t) + " after t=" + std::to_string(last_t_) +
                     ")");
  }
  if (request.n_new_tokens < 0) {
    throw TraceError("negative n_new_tokens for context " + request.context);
  }
  last_t_ = request.t;
  saw_request_ = true;
  arrivals_.push_back(request.t);

  const ContextProfile* profile_ptr = nullptr;
  {
    auto it = scenario_.profiles.find(request.context);
    if (it == scenario_.profiles.end()) {
      throw TraceError("trace names unknown context " + request.context);
    }
    profile_ptr = &it->second;
  }
  const ContextProfile& profile = *profile_ptr;
  const std::int64_t stamp = stamp_++;
  const double penalty = active_penalty(request.t);

  RequestRecord record;
  record.request = request;

  const LookupResult hit = lookup(store_, request.context);
  if (hit.outcome == Outcome::Hit) {
    const std::size_t tier_index = store_.tier_index_of(request.context);
    const TierSpec& tier = store_.tier(tier_index);
    double load = load_time(hit.entry->compressed_bytes(), tier,
                            scenario_.space.methods().by_name(hit.entry->config.method));
    if (policy_.kind == Policy::Kind::Impress) {
      load *= policy_.chunk_overhead;  // chunked reads amplify the fetch
    }
    record.outcome = Outcome::Hit;
    record.tier = hit.tier;
    record.config = hit.entry->config;
    record.ttft =
        load + prefill_time(request.n_new_tokens, scenario_.params) + penalty;

    const double predicted = quality_of(profile, hit.entry->config);
    auto truth = scenario_.truth.find(request.context);
    const double achieved =
        truth != scenario_.truth.end() ? truth->second.quality_at(hit.entry->config)
                                       : predicted;
    record.quality = achieved;
    store_.touch(request.context, stamp);

    // Drift bookkeeping compares the profile's promise against the
    // answers actually served from compressed entries.
    if (scenario_.drift.enabled && policy_.kind == Policy::Kind::Joint &&
        truth != scenario_.truth.end()) {
      auto [it, inserted] = drift_states_.try_emplace(request.context);
      if (inserted) {
        it->second.context = request.context;
        it->second.window_size = scenario_.drift.window_size;
      }
      record_observation(it->second, predicted, achieved);
    }
  } else {
    record.outcome = Outcome::Miss;
    const std::int64_t tokens =
        profile.token_count(scenario_.params) + request.n_new_tokens;
    record.ttft = prefill_time(tokens, scenario_.params) + penalty;
    record.quality = 1.0;  // full recompute is lossless

    if (policy_.kind != Policy::Kind::Prefill) {
      std::vector<PlacementAction> steps;
      if (scenario_.miss_store_bottom && policy_.kind == Policy::Kind::Joint) {
        CacheEntry entry;
        entry.context = request.context;
        entry.original_size_bytes = profile.original_size_bytes;
        entry.config = {scenario_.space.methods().methods().front().name, 1.0};
        entry.tier = store_.tier(store_.tier_count() - 1).tier_id;
        entry.frequency = 1;
        entry.last_access = stamp;
        store_.add(std::move(entry));
        steps.push_back({PlacementAction::Kind::Insert, request.context,
                         store_.tier(store_.tier_count() - 1).tier_id,
                         {scenario_.space.methods().methods().front().name, 1.0}});
        auto moves = rearrange(store_, scenario_.profiles, scenario_.space,
                               scenario_.params, policy_.rule);
        steps.insert(steps.end(), moves.begin(), moves.end());
      } else {
        steps = policy_insert(store_, policy_, request.context, scenario_.profiles,
                              scenario_.space, scenario_.params, /*frequency=*/1, stamp);
      }
      actions_.insert(actions_.end(), steps.begin(), steps.end());
    }
  }

  records_.push_back(record);
  maybe_reprofile(request.context, request.t);
  return record;
}

ReplayResult Replayer::finish() {
  ReplayResult result;
  result.records = records_;
  result.metrics = aggregate(records_);
  result.profiling_windows = windows_;
  result.reprofile_count = reprofile_count_;
  result.actions = actions_;
  for (std::size_t ti = 0; ti < store_.tier_count(); ++ti) {
    for (const auto& e : store_.residents(ti)) {
      char key[96];
      std::snprintf(key, sizeof(key), "tier%d:%s@%.6g", store_.tier(ti).tier_id,
                    e.config.method.c_str(), e.config.ratio);
      ++result.final_placements[key];
    }
  }
  return result;
}

ReplayResult replay(const std::vector<Request>& trace, const Policy& policy,
                    const Scenario& scenario) {
  Replayer replayer(policy, scenario);
  for (const auto& request : trace) replayer.step(request);
  return replayer.finish();
}

namespace {

double nearest_rank(const std::vector<double>& sorted, double percentile) {
  if (sorted.empty()) return 0.0;
  const double rank = std::ceil(percentile / 100.0 * static_cast<double>(sorted.size()));
  const std::size_t index =
      static_cast<std::size_t>(std::max(rank, 1.0)) - 1;
  return sorted[std::min(index, sorted.size() - 1)];
}

}  // namespace

ReplayMetrics aggregate(const std::vector<RequestRecord>& records) {
  ReplayMetrics m;
  m.n_requests = records.size();
  if (records.empty()) return m;

  std::vector<double> ttfts;
  ttfts.reserve(records.size());
  double quality_sum = 0.0;
  std::size_t misses = 0;
  std::map<int, std::size_t> hits_by_tier;
  for (const auto& r : records) {
    m.sum_ttft += r.ttft;
    ttfts.push_back(r.ttft);
    quality_sum += r.quality;
    if (r.outcome == Outcome::Miss) {
      ++misses;
    } else {
      ++hits_by_tier[r.tier];
    }
  }
  std::sort(ttfts.begin(), ttfts.end());
  const double n = static_cast<double>(records.size());
  m.mean_ttft = m.sum_ttft / n;
  m.p50_ttft = nearest_rank(ttfts, 50.0);
  m.p90_ttft = nearest_rank(ttfts, 90.0);
  m.p99_ttft = nearest_rank(ttfts, 99.0);
  m.mean_quality = quality_sum / n;
  m.miss_fraction = static_cast<double>(misses) / n;
  for (const auto& [tier, count] : hits_by_tier) {
    m.hit_fraction_by_tier[tier] = static_cast<double>(count) / n;
  }
  return m;
}

}  // namespace kvtier
