#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types shared by every module: compression configurations,
// storage tiers, cache entries and placement actions, plus the size
// arithmetic and hierarchy validation everything else builds on.

namespace kvtier {

// Opaque, non-empty identifier for a context (one placement unit).
using ContextId = std::string;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A labeled lossy compression method. The kernel internals are out of
// scope here; a method is just a name plus its decompression cost.
struct CompressionMethod {
  std::string name;
  double decompression_overhead = 0.0;  // seconds per byte
};

// Validated, ordered set of methods. Names are unique, set is non-empty.
class MethodSet {
 public:
  explicit MethodSet(std::vector<CompressionMethod> methods);

  // Default set used throughout: keydiff, knorm, snapkv, zero overhead.
  static MethodSet default_set();

  const std::vector<CompressionMethod>& methods() const { return methods_; }
  bool contains(const std::string& name) const;
  const CompressionMethod& by_name(const std::string& name) const;

 private:
  std::vector<CompressionMethod> methods_;
};

// (method, ratio) pair. `ratio` is the retained-size fraction in (0, 1]:
// compressed_size / original_size. Ratio 1.0 means uncompressed.
struct CompressionConfig {
  std::string method;
  double ratio = 1.0;

  bool operator==(const CompressionConfig& o) const {
    return method == o.method && ratio == o.ratio;
  }
};

// One level of the storage hierarchy. tier_id 0 is the fastest tier.
// capacity_bytes == nullopt means unlimited (allowed only for the
// bottom tier).
struct TierSpec {
  int tier_id = 0;
  std::string name;
  std::optional<std::int64_t> capacity_bytes;
  double read_bandwidth = 0.0;       // bytes per second, > 0
  double fixed_access_latency = 0.0; // seconds

  bool unlimited() const { return !capacity_bytes.has_value(); }
};

// Knobs of the placement score and the TTFT model.
struct UtilityParams {
  double alpha = 1.0;            // quality weight in the utility score
  double prefill_a = 2e-5;       // seconds per token
  double prefill_b = 1e-10;      // seconds per token^2
  double bytes_per_token = 1.2e5; // 0.12 GB of KV cache per 1K tokens
};

void validate_params(const UtilityParams& p);

// One context's resident KV cache: where it lives and how it is stored.
struct CacheEntry {
  ContextId context;
  std::int64_t original_size_bytes = 0;
  CompressionConfig config;
  int tier = 0;
  std::int64_t frequency = 0;    // accesses observed so far
  std::int64_t last_access = 0;  // logical timestamp

  std::int64_t compressed_bytes() const;
};

// One step of a placement decision, serializable for audit.
struct PlacementAction {
  enum class Kind { Insert, Recompress, Evict };

  Kind kind = Kind::Insert;
  ContextId context;
  int tier = 0;              // target tier (current tier for Recompress)
  CompressionConfig config;  // resulting configuration
};

const char* to_string(PlacementAction::Kind kind);

// round(original * ratio), half up, floored at 1 byte.
// Throws ValidationError if the ratio is outside (0, 1].
std::int64_t compressed_size(std::int64_t original_size_bytes, double ratio);

// Sorts tiers by tier_id and checks hierarchy invariants: ids unique,
// only the bottom tier may be unlimited, bandwidths positive. A
// non-decreasing bandwidth going down the hierarchy is suspicious but
// legal; it is reported through `warnings` when provided.
std::vector<TierSpec> validate_hierarchy(std::vector<TierSpec> tiers,
                                         std::vector<std::string>* warnings = nullptr);

}  // namespace kvtier
