#include "kvtier/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kvtier {

MethodSet::MethodSet(std::vector<CompressionMethod> methods)
    : methods_(std::move(methods)) {
  if (methods_.empty()) {
    throw ValidationError("method set must not be empty");
  }
  std::set<std::string> seen;
  for (const auto& m : methods_) {
    if (m.name.empty()) {
      throw ValidationError("compression method name must not be empty");
    }
    if (!seen.insert(m.name).second) {
      throw ValidationError("duplicate compression method name: " + m.name);
    }
    if (m.decompression_overhead < 0.0) {
      throw ValidationError("negative decompression overhead for method " + m.name);
    }
  }
}

MethodSet MethodSet::default_set() {
  return MethodSet({{"keydiff", 0.0}, {"knorm", 0.0}, {"snapkv", 0.0}});
}

bool MethodSet::contains(const std::string& name) const {
  return std::any_of(methods_.begin(), methods_.end(),
                     [&](const CompressionMethod& m) { return m.name == name; });
}

const CompressionMethod& MethodSet::by_name(const std::string& name) const {
  for (const auto& m : methods_) {
    if (m.name == name) return m;
  }
  throw ValidationError("unknown compression method: " + name);
}

void validate_params(const UtilityParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.alpha) || p.alpha < 0.0) {
    throw ValidationError("alpha must be finite and >= 0");
  }
  if (!finite(p.prefill_a) || p.prefill_a < 0.0 || !finite(p.prefill_b) ||
      p.prefill_b < 0.0) {
    throw ValidationError("prefill coefficients must be finite and >= 0");
  }
  if (!finite(p.bytes_per_token) || p.bytes_per_token <= 0.0) {
    throw ValidationError("bytes_per_token must be finite and > 0");
  }
}

std::int64_t CacheEntry::compressed_bytes() const {
  return compressed_size(original_size_bytes, config.ratio);
}

const char* to_string(PlacementAction::Kind kind) {
  switch (kind) {
    case PlacementAction::Kind::Insert: return "insert";
    case PlacementAction::Kind::Recompress: return "recompress";
    case PlacementAction::Kind::Evict: return "evict";
  }
  return "?";
}

std::int64_t compressed_size(std::int64_t original_size_bytes, double ratio) {
  if (original_size_bytes <= 0) {
    throw ValidationError("original size must be > 0");
  }
  if (!(ratio > 0.0) || ratio > 1.0 || !std::isfinite(ratio)) {
    std::ostringstream msg;
    msg << "compression ratio must be in (0, 1], got " << ratio;
    throw ValidationError(msg.str());
  }
  const double scaled = static_cast<double>(original_size_bytes) * ratio;
  auto bytes = static_cast<std::int64_t>(std::floor(scaled + 0.5));
  return std::max<std::int64_t>(bytes, 1);
}

std::vector<TierSpec> validate_hierarchy(std::vector<TierSpec> tiers,
                                         std::vector<std::string>* warnings) {
  if (tiers.empty()) {
    throw ValidationError("hierarchy must have at least one tier");
  }
  std::stable_sort(tiers.begin(), tiers.end(),
                   [](const TierSpec& a, const TierSpec& b) { return a.tier_id < b.tier_id; });
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const TierSpec& t = tiers[i];
    if (i + 1 < tiers.size() && tiers[i + 1].tier_id == t.tier_id) {
      throw ValidationError("duplicate tier_id " + std::to_string(t.tier_id));
    }
    if (t.unlimited() && i + 1 != tiers.size()) {
      throw ValidationError("unlimited capacity is only allowed on the bottom tier (tier " +
                            std::to_string(t.tier_id) + ")");
    }
    if (!t.unlimited() && *t.capacity_bytes < 0) {
      throw ValidationError("negative capacity on tier " + std::to_string(t.tier_id));
    }
    if (!(t.read_bandwidth > 0.0) || !std::isfinite(t.read_bandwidth)) {
      throw ValidationError("read bandwidth must be > 0 on tier " + std::to_string(t.tier_id));
    }
    if (t.fixed_access_latency < 0.0 || !std::isfinite(t.fixed_access_latency)) {
      throw ValidationError("fixed access latency must be >= 0 on tier " +
                            std::to_string(t.tier_id));
    }
    if (i > 0 && tiers[i - 1].read_bandwidth <= t.read_bandwidth && warnings != nullptr) {
      std::ostringstream msg;
      msg << "tier " << t.tier_id << " bandwidth (" << t.read_bandwidth
          << " B/s) is not below tier " << tiers[i - 1].tier_id << " ("
          << tiers[i - 1].read_bandwidth << " B/s)";
      warnings->push_back(msg.str());
    }
  }
  return tiers;
}

}  // namespace kvtier
