#include "kvtier/quality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "kvtier/rng.hpp"

namespace kvtier {

namespace {

constexpr double kGridEps = 1e-9;

bool near(double a, double b) { return std::fabs(a - b) <= kGridEps; }

std::string format_ratio(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", ratio);
  return buf;
}

}  // namespace

std::int64_t ContextProfile::token_count(const UtilityParams& params) const {
  const double tokens = static_cast<double>(original_size_bytes) / params.bytes_per_token;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(tokens + 0.5)));
}

std::vector<std::string> validate_profile(const ContextProfile& profile) {
  if (profile.context.empty()) {
    throw ValidationError("profile context id must not be empty");
  }
  if (profile.original_size_bytes <= 0) {
    throw ValidationError("profile size must be > 0 for context " + profile.context);
  }
  if (profile.frequency < 0.0 || !std::isfinite(profile.frequency)) {
    throw ValidationError("profile frequency must be >= 0 for context " + profile.context);
  }
  const auto& grid = profile.ratio_grid;
  if (grid.empty()) {
    throw ValidationError("profile ratio grid is empty for context " + profile.context);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || grid[i] > 1.0 + kGridEps) {
      throw ValidationError("profile grid ratio out of (0,1] for context " + profile.context);
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw ValidationError("profile grid not strictly ascending for context " + profile.context);
    }
  }
  if (!near(grid.back(), 1.0)) {
    throw ValidationError("profile grid must include ratio 1.0 for context " + profile.context);
  }
  if (profile.quality_table.empty()) {
    throw ValidationError("profile has no methods for context " + profile.context);
  }
  std::vector<std::string> warnings;
  for (const auto& [method, values] : profile.quality_table) {
    if (values.size() != grid.size()) {
      throw ValidationError("quality row for method " + method + " does not match grid size");
    }
    bool monotone = true;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] < -kGridEps || values[i] > 1.0 + kGridEps) {
        throw ValidationError("quality out of [0,1] for method " + method + " in context " +
                              profile.context);
      }
      if (i > 0 && values[i] < values[i - 1] - kGridEps) monotone = false;
    }
    if (!near(values.back(), 1.0)) {
      throw ValidationError("quality at ratio 1.0 must be 1.0 for method " + method +
                            " in context " + profile.context);
    }
    if (!monotone) {
      warnings.push_back("quality not monotone in ratio for method " + method + " in context " +
                         profile.context);
    }
  }
  return warnings;
}

double quality_of(const ContextProfile& profile, const CompressionConfig& config) {
  if (!(config.ratio > 0.0) || config.ratio > 1.0 + kGridEps) {
    throw ValidationError("ratio out of (0,1]: " + format_ratio(config.ratio));
  }
  auto it = profile.quality_table.find(config.method);
  if (it == profile.quality_table.end()) {
    throw ValidationError("method " + config.method + " not profiled for context " +
                          profile.context);
  }
  const auto& grid = profile.ratio_grid;
  const auto& values = it->second;
  if (config.ratio < grid.front() - kGridEps) {
    throw ValidationError("ratio " + format_ratio(config.ratio) +
                          " below smallest profiled ratio " + format_ratio(grid.front()) +
                          " for context " + profile.context);
  }
  // Exact grid hit first, then linear interpolation on the bracketing pair.
  auto hi = std::lower_bound(grid.begin(), grid.end(), config.ratio - kGridEps);
  std::size_t i = static_cast<std::size_t>(hi - grid.begin());
  if (i >= grid.size()) i = grid.size() - 1;
  if (near(grid[i], config.ratio) || i == 0) {
    return values[i];
  }
  const double x0 = grid[i - 1], x1 = grid[i];
  const double y0 = values[i - 1], y1 = values[i];
  const double t = (config.ratio - x0) / (x1 - x0);
  return y0 + t * (y1 - y0);
}

double synth_quality(double sensitivity, double shape_k, double ratio) {
  if (sensitivity < 0.0 || !std::isfinite(sensitivity)) {
    throw ValidationError("sensitivity must be >= 0");
  }
  if (!(shape_k > 0.0)) {
    throw ValidationError("shape k must be > 0");
  }
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw ValidationError("ratio out of (0,1]");
  }
  const double drop = sensitivity * std::pow((1.0 - ratio) / 0.1, shape_k);
  return std::clamp(1.0 - drop, 0.0, 1.0);
}

double TrueCurve::quality_at(const CompressionConfig& config) const {
  auto it = per_method.find(config.method);
  if (it == per_method.end()) {
    throw ValidationError("method " + config.method + " has no true curve");
  }
  return synth_quality(it->second.sensitivity, it->second.shape_k, config.ratio);
}

namespace {

// Samples currently contributing to the sums: the window when one is
// kept, the whole history otherwise.
std::int64_t samples_in_means(const DriftState& s) {
  return s.window_size == 0 ? s.n_observations
                            : static_cast<std::int64_t>(s.window.size());
}

}  // namespace

double DriftState::observed_mean() const {
  const std::int64_t n = samples_in_means(*this);
  return n == 0 ? 0.0 : observed_sum / static_cast<double>(n);
}

double DriftState::profiled_mean() const {
  const std::int64_t n = samples_in_means(*this);
  return n == 0 ? 0.0 : profiled_sum / static_cast<double>(n);
}

void record_observation(DriftState& state, double predicted_quality, double true_quality) {
  if (predicted_quality < 0.0 || predicted_quality > 1.0 || true_quality < 0.0 ||
      true_quality > 1.0) {
    throw ValidationError("quality observations must be in [0,1]");
  }
  if (state.window_size == 0) {
    state.profiled_sum += predicted_quality;
    state.observed_sum += true_quality;
    ++state.n_observations;
    return;
  }
  state.window.emplace_back(predicted_quality, true_quality);
  if (state.window.size() > state.window_size) {
    state.window.erase(state.window.begin());
  }
  state.profiled_sum = 0.0;
  state.observed_sum = 0.0;
  for (const auto& [pred, obs] : state.window) {
    state.profiled_sum += pred;
    state.observed_sum += obs;
  }
  ++state.n_observations;  // lifetime count; the means cover the window
}

bool should_reprofile(const DriftState& state, double threshold, bool gpu_free,
                      std::int64_t min_samples) {
  if (threshold < 0.0) {
    throw ValidationError("reprofile threshold must be >= 0");
  }
  if (!gpu_free || state.n_observations < min_samples) return false;
  return (state.profiled_mean() - state.observed_mean()) > threshold;
}

std::pair<ContextProfile, ProfilingCost> reprofile(const ContextProfile& old_profile,
                                                   const TrueCurve& truth,
                                                   std::uint64_t noise_seed, double now,
                                                   const ReprofileConfig& config) {
  ContextProfile fresh = old_profile;
  Rng rng(noise_seed);
  for (auto& [method, values] : fresh.quality_table) {
    auto curve = truth.per_method.find(method);
    for (std::size_t i = 0; i < fresh.ratio_grid.size(); ++i) {
      double q;
      if (curve != truth.per_method.end()) {
        q = synth_quality(curve->second.sensitivity, curve->second.shape_k,
                          fresh.ratio_grid[i]);
      } else {
        q = values[i];  // no ground truth for this method, keep belief
      }
      if (config.noise_amplitude > 0.0) {
        q += rng.uniform(-config.noise_amplitude, config.noise_amplitude);
      }
      values[i] = std::clamp(q, 0.0, 1.0);
    }
    // Profiling on more retained data never reports lower quality.
    for (std::size_t i = 1; i < values.size(); ++i) {
      values[i] = std::max(values[i], values[i - 1]);
    }
    values.back() = 1.0;
  }
  ProfilingCost cost{now, config.duration, config.penalty};
  return {std::move(fresh), cost};
}

SensitivityDist SensitivityDist::normal(double median, double cov, double shape_k) {
  SensitivityDist d;
  d.kind = Kind::Normal;
  d.median = median;
  d.cov = cov;
  d.shape_k = shape_k;
  return d;
}

SensitivityDist SensitivityDist::uniform(double lo, double hi, double shape_k) {
  SensitivityDist d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  d.shape_k = shape_k;
  return d;
}

double draw_sensitivity(Rng& rng, const SensitivityDist& dist) {
  double s;
  if (dist.kind == SensitivityDist::Kind::Uniform) {
    s = rng.uniform(dist.lo, dist.hi);
  } else {
    s = rng.normal(dist.median, dist.cov * dist.median);
  }
  return std::clamp(s, 0.0, 1.0);
}

std::vector<GeneratedContext> gen_profiles(std::uint64_t seed, const ProfileGenParams& params) {
  if (params.n_contexts < 0) {
    throw ValidationError("n_contexts must be >= 0");
  }
  if (params.ratio_grid.empty()) {
    throw ValidationError("generator ratio grid is empty");
  }
  if (!near(params.ratio_grid.back(), 1.0)) {
    throw ValidationError("generator ratio grid must include 1.0");
  }
  if (params.sensitivity.empty()) {
    throw ValidationError("generator needs at least one method sensitivity distribution");
  }
  if (params.mean_size_bytes <= 0.0 || params.std_size_bytes < 0.0) {
    throw ValidationError("invalid size distribution");
  }

  const double max_size = params.max_size_bytes > 0.0
                              ? params.max_size_bytes
                              : params.mean_size_bytes + 10.0 * params.std_size_bytes;
  Rng rng(seed);

  std::vector<GeneratedContext> out;
  out.reserve(static_cast<std::size_t>(params.n_contexts));
  const int digits = params.n_contexts > 0
                         ? static_cast<int>(std::to_string(params.n_contexts - 1).size())
                         : 1;
  for (int i = 0; i < params.n_contexts; ++i) {
    GeneratedContext ctx;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s-%0*d", params.id_prefix.c_str(), digits, i);
    ctx.profile.context = buf;
    const double size =
        rng.truncated_normal(params.mean_size_bytes, params.std_size_bytes,
                             params.min_size_bytes, max_size);
    ctx.profile.original_size_bytes = std::max<std::int64_t>(1, static_cast<std::int64_t>(size));
    ctx.profile.frequency = params.frequency;
    ctx.profile.ratio_grid = params.ratio_grid;
    for (const auto& [method, dist] : params.sensitivity) {
      const double s = draw_sensitivity(rng, dist);
      ctx.truth.per_method[method] = SensitivityCurve{s, dist.shape_k};
      auto& row = ctx.profile.quality_table[method];
      row.reserve(params.ratio_grid.size());
      for (double r : params.ratio_grid) {
        row.push_back(synth_quality(s, dist.shape_k, r));
      }
    }
    out.push_back(std::move(ctx));
  }
  return out;
}

std::string profile_to_json(const ContextProfile& profile, const TrueCurve* truth) {
  nlohmann::json j;
  j["context_id"] = profile.context;
  j["size_bytes"] = profile.original_size_bytes;
  j["frequency"] = profile.frequency;
  j["grid"] = profile.ratio_grid;
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [method, values] : profile.quality_table) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t i = 0; i < values.size(); ++i) {
      row[format_ratio(profile.ratio_grid[i])] = values[i];
    }
    methods[method] = std::move(row);
  }
  j["methods"] = std::move(methods);
  if (truth != nullptr && !truth->empty()) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [method, curve] : truth->per_method) {
      t[method] = {{"s", curve.sensitivity}, {"k", curve.shape_k}};
    }
    j["truth"] = std::move(t);
  }
  return j.dump();
}

GeneratedContext profile_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw TraceError(std::string("bad profile JSON: ") + e.what());
  }
  GeneratedContext ctx;
  try {
    ctx.profile.context = j.at("context_id").get<std::string>();
    ctx.profile.original_size_bytes = j.at("size_bytes").get<std::int64_t>();
    ctx.profile.frequency = j.value("frequency", 1.0);
    ctx.profile.ratio_grid = j.at("grid").get<std::vector<double>>();
    for (const auto& [method, row] : j.at("methods").items()) {
      std::vector<double> values(ctx.profile.ratio_grid.size(), -1.0);
      for (const auto& [ratio_text, q] : row.items()) {
        const double ratio = std::stod(ratio_text);
        auto it = std::find_if(ctx.profile.ratio_grid.begin(), ctx.profile.ratio_grid.end(),
                               [&](double g) { return near(g, ratio); });
        if (it == ctx.profile.ratio_grid.end()) {
          throw TraceError("profile ratio " + ratio_text + " not on grid for context " +
                           ctx.profile.context);
        }
        values[static_cast<std::size_t>(it - ctx.profile.ratio_grid.begin())] = q.get<double>();
      }
      for (double v : values) {
        if (v < 0.0) {
          throw TraceError("method " + method + " missing a grid ratio for context " +
                           ctx.profile.context);
        }
      }
      ctx.profile.quality_table[method] = std::move(values);
    }
    if (j.contains("truth")) {
      for (const auto& [method, curve] : j.at("truth").items()) {
        ctx.truth.per_method[method] =
            SensitivityCurve{curve.at("s").get<double>(), curve.at("k").get<double>()};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw TraceError(std::string("bad profile JSON: ") + e.what());
  }
  return ctx;
}

}  // namespace kvtier
