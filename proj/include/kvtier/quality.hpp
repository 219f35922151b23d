#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kvtier/core.hpp"

// Per-context quality profiles and the online drift / re-profiling
// machinery. A profile maps (method, ratio grid point) -> quality score;
// synthetic profiles come from sensitivity-anchored curves so the
// published per-dataset sensitivities plug in directly.

namespace kvtier {

// Quality predicted for each (method, grid ratio) of one context, plus
// the size and expected access frequency the placement score needs.
struct ContextProfile {
  ContextId context;
  std::int64_t original_size_bytes = 0;
  double frequency = 1.0;  // expected accesses per period
  std::vector<double> ratio_grid;  // ascending, last element 1.0
  // method name -> quality per grid point, parallel to ratio_grid.
  std::map<std::string, std::vector<double>> quality_table;

  std::int64_t token_count(const UtilityParams& params) const;
};

// Checks grid shape and value ranges. Returns a warning per method whose
// measured table is not monotone in ratio (accepted as-is).
std::vector<std::string> validate_profile(const ContextProfile& profile);

// Exact lookup on the grid, piecewise-linear interpolation between grid
// points. No extrapolation below the smallest grid ratio.
double quality_of(const ContextProfile& profile, const CompressionConfig& config);

// Sensitivity-anchored synthetic curve: quality at ratio r is
//   clamp(1 - s * ((1 - r) / 0.1)^k, 0, 1)
// so that the drop at ratio 0.9 equals s exactly.
double synth_quality(double sensitivity, double shape_k, double ratio);

// One method's ground-truth curve parameters.
struct SensitivityCurve {
  double sensitivity = 0.0;  // quality drop at ratio 0.9, in [0, 1]
  double shape_k = 1.0;      // curvature, > 0
};

// Simulation-world ground truth for one context: what quality a served
// configuration actually achieves, independent of what is profiled.
struct TrueCurve {
  std::map<std::string, SensitivityCurve> per_method;

  double quality_at(const CompressionConfig& config) const;
  bool empty() const { return per_method.empty(); }
};

// Running comparison of profile-predicted vs achieved quality for one
// context. window_size 0 keeps cumulative means; otherwise the means
// cover the most recent window_size observations.
struct DriftState {
  ContextId context;
  double observed_sum = 0.0;
  double profiled_sum = 0.0;
  std::int64_t n_observations = 0;
  std::size_t window_size = 0;
  std::vector<std::pair<double, double>> window;  // (predicted, observed)

  double observed_mean() const;
  double profiled_mean() const;
};

void record_observation(DriftState& state, double predicted_quality,
                        double true_quality);

// Re-profiling trigger: enough samples, predicted-minus-achieved gap
// above the threshold, and GPU cycles to spare.
bool should_reprofile(const DriftState& state, double threshold, bool gpu_free,
                      std::int64_t min_samples);

// Latency footprint of one profiling run; the simulator charges the
// penalty to every request whose arrival falls inside the window.
struct ProfilingCost {
  double start = 0.0;
  double duration = 0.0;
  double penalty = 0.0;  // added seconds per overlapped request
};

struct ReprofileConfig {
  double duration = 2.0;       // seconds of profiling work
  double penalty = 0.5;        // extra seconds per overlapped request
  double noise_amplitude = 0.0;  // uniform +/- noise on resampled quality
};

// Resamples the context's profile from the world's true curves on the
// existing grid (bounded noise, monotone, quality(1.0) == 1).
std::pair<ContextProfile, ProfilingCost> reprofile(const ContextProfile& old_profile,
                                                   const TrueCurve& truth,
                                                   std::uint64_t noise_seed,
                                                   double now,
                                                   const ReprofileConfig& config);

// How sensitivities are drawn for one method of one synthetic context.
struct SensitivityDist {
  enum class Kind { Normal, Uniform };
  Kind kind = Kind::Normal;
  double median = 0.5;  // Normal: mean; draws clamped to [0, 1]
  double cov = 0.2;     // Normal: stddev = cov * median
  double lo = 0.0;      // Uniform bounds
  double hi = 1.0;
  double shape_k = 1.0;

  static SensitivityDist normal(double median, double cov, double shape_k = 1.0);
  static SensitivityDist uniform(double lo, double hi, double shape_k = 1.0);
};

// One draw, clamped to [0, 1].
class Rng;
double draw_sensitivity(Rng& rng, const SensitivityDist& dist);

struct ProfileGenParams {
  int n_contexts = 0;
  std::string id_prefix = "ctx";
  // method name -> sensitivity distribution; one independent draw per method.
  std::map<std::string, SensitivityDist> sensitivity;
  // context sizes in bytes: truncated normal.
  double mean_size_bytes = 0.0;
  double std_size_bytes = 0.0;
  double min_size_bytes = 1.0;
  double max_size_bytes = 0.0;  // 0 = no upper bound beyond mean + 10 std
  // per-context frequency; constant only, popularity-shaped frequencies
  // are assigned by the workload layer.
  double frequency = 1.0;
  std::vector<double> ratio_grid;
};

struct GeneratedContext {
  ContextProfile profile;
  TrueCurve truth;
};

// Deterministic per seed. Each context draws a size and one sensitivity
// per method; the quality table is synth_quality evaluated on the grid.
std::vector<GeneratedContext> gen_profiles(std::uint64_t seed,
                                           const ProfileGenParams& params);

// JSON object form of a profile, one object per line for bulk files.
std::string profile_to_json(const ContextProfile& profile, const TrueCurve* truth);
GeneratedContext profile_from_json(const std::string& json_text);

}  // namespace kvtier
