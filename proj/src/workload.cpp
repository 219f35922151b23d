#include "kvtier/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "kvtier/rng.hpp"

namespace kvtier {

namespace {

using nlohmann::json;

// splitmix64-style stream splitter for deriving independent sub-seeds.
std::uint64_t mix64(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t kBlockStream = 0xb10c;
constexpr std::uint64_t kTraceStream = 0x7ace;
constexpr std::uint64_t kShuffleStream = 0x54f1;
constexpr std::uint64_t kDriftStream = 0xd21f;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw ValidationError("failed writing file: " + path);
  }
}

std::string join_path(const std::string& base, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute() || base.empty()) return rel;
  return (std::filesystem::path(base) / p).string();
}

// Which popularity rank each context gets; identity unless shuffled.
std::vector<std::size_t> rank_of_context(std::uint64_t seed, std::size_t n,
                                         bool shuffle) {
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = i;
  if (shuffle && n > 1) {
    Rng rng(mix64(seed, kShuffleStream));
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = rng.uniform_index(i);
      std::swap(rank[i - 1], rank[j]);
    }
  }
  return rank;
}

Request request_from_json(const json& j) {
  Request r;
  r.t = j.at("t").get<double>();
  r.context = j.at("context_id").get<std::string>();
  r.n_new_tokens = j.value("n_new_tokens", std::int64_t{0});
  if (r.context.empty()) {
    throw TraceError("empty context_id");
  }
  if (!std::isfinite(r.t)) {
    throw TraceError("non-finite timestamp");
  }
  if (r.n_new_tokens < 0) {
    throw TraceError("negative n_new_tokens");
  }
  return r;
}

void validate_trace_gen(const TraceGenParams& p) {
  if (!(p.arrival_rate > 0.0)) {
    throw ValidationError("trace arrival_rate must be > 0");
  }
  if (!(p.duration > 0.0)) {
    throw ValidationError("trace duration must be > 0");
  }
  if (p.zipf_exponent < 0.0) {
    throw ValidationError("zipf_exponent must be >= 0");
  }
  if (p.n_new_tokens < 0) {
    throw ValidationError("n_new_tokens must be >= 0");
  }
}

}  // namespace

const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets = {
      {"narrativeqa", 108e3, 55e3, true, 0.340},
      {"qasper", 24e3, 12e3, true, 0.759},
      {"multifieldqa_en", 29e3, 15e3, false, 0.0},
      {"hotpotqa", 57e3, 18e3, false, 0.0},
      {"2wikimqa", 30e3, 15e3, true, 0.681},
      {"musique", 69e3, 9e3, false, 0.0},
      {"gov_report", 54e3, 34e3, false, 0.0},
      {"qmsum", 57e3, 27e3, false, 0.0},
      {"multi_news", 12e3, 10e3, true, 0.738},
      {"trec", 30e3, 12e3, false, 0.0},
      {"triviaqa", 47e3, 25e3, true, 0.392},
      {"samsum", 34e3, 17e3, true, 0.676},
  };
  return presets;
}

const DatasetPreset* find_preset(const std::string& name) {
  for (const auto& p : dataset_presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string preset_names() {
  std::string out;
  for (const auto& p : dataset_presets()) {
    if (!out.empty()) out += ", ";
    out += p.name;
  }
  return out;
}

const DatasetPreset& preset_by_name(const std::string& name) {
  const DatasetPreset* p = find_preset(name);
  if (p == nullptr) {
    throw ValidationError("unknown dataset preset '" + name +
                          "' (available: " + preset_names() + ")");
  }
  return *p;
}

std::vector<GeneratedContext> gen_contexts(std::uint64_t seed, const ContextBlock& block,
                                           const UtilityParams& params,
                                           const MethodSet& methods,
                                           const std::vector<double>& ratio_grid) {
  ContextBlock b = block;
  if (!b.preset.empty()) {
    const DatasetPreset& preset = preset_by_name(b.preset);
    if (b.mean_tokens <= 0.0) b.mean_tokens = preset.mean_tokens;
    if (b.std_tokens < 0.0) b.std_tokens = preset.std_tokens;
    if (!b.sensitivity) {
      b.sensitivity = preset.has_sensitivity
                          ? SensitivityDist::normal(preset.sensitivity_median, b.cov,
                                                    b.shape_k)
                          : SensitivityDist::uniform(0.0, 1.0, b.shape_k);
    }
    if (b.id_prefix.empty()) b.id_prefix = preset.name;
  } else {
    if (b.mean_tokens <= 0.0) {
      throw ValidationError("custom context block needs mean_tokens > 0");
    }
    if (b.std_tokens < 0.0) b.std_tokens = 0.0;
    if (!b.sensitivity) b.sensitivity = SensitivityDist::uniform(0.0, 1.0, b.shape_k);
    if (b.id_prefix.empty()) b.id_prefix = "ctx";
  }

  ProfileGenParams gp;
  gp.n_contexts = b.n;
  gp.id_prefix = b.id_prefix;
  for (const auto& m : methods.methods()) {
    gp.sensitivity[m.name] = *b.sensitivity;
  }
  gp.mean_size_bytes = b.mean_tokens * params.bytes_per_token;
  gp.std_size_bytes = b.std_tokens * params.bytes_per_token;
  gp.min_size_bytes = kMinTokens * params.bytes_per_token;
  gp.max_size_bytes = kMaxTokens * params.bytes_per_token;
  gp.frequency = b.frequency;
  gp.ratio_grid = ratio_grid;
  std::sort(gp.ratio_grid.begin(), gp.ratio_grid.end());
  gp.ratio_grid.erase(std::unique(gp.ratio_grid.begin(), gp.ratio_grid.end()),
                      gp.ratio_grid.end());

  auto out = gen_profiles(seed, gp);

  // Drift: the world's true curves come from a different distribution
  // than the (now stale) profiled ones.
  if (b.drifted_sensitivity) {
    Rng rng(mix64(seed, kDriftStream));
    for (auto& ctx : out) {
      for (const auto& m : methods.methods()) {
        const double s = draw_sensitivity(rng, *b.drifted_sensitivity);
        ctx.truth.per_method[m.name] =
            SensitivityCurve{s, b.drifted_sensitivity->shape_k};
      }
    }
  }
  return out;
}

std::vector<Request> gen_trace(std::uint64_t seed, const std::vector<ContextId>& contexts,
                               const TraceGenParams& params) {
  validate_trace_gen(params);
  if (contexts.empty()) {
    throw ValidationError("trace generator needs at least one context");
  }
  const auto rank = rank_of_context(seed, contexts.size(), params.shuffle_ranks);
  std::vector<std::size_t> context_of_rank(contexts.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) context_of_rank[rank[i]] = i;

  Rng rng(seed);
  ZipfSampler zipf(contexts.size(), params.zipf_exponent);
  std::vector<Request> trace;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(params.arrival_rate);
    if (t > params.duration) break;
    trace.push_back(
        {t, contexts[context_of_rank[zipf.sample(rng)]], params.n_new_tokens});
  }
  return trace;
}

void assign_zipf_frequencies(std::uint64_t seed, std::vector<GeneratedContext>& contexts,
                             const TraceGenParams& params) {
  validate_trace_gen(params);
  if (contexts.empty()) return;
  const auto rank = rank_of_context(seed, contexts.size(), params.shuffle_ranks);
  ZipfSampler zipf(contexts.size(), params.zipf_exponent);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    contexts[i].profile.frequency = params.arrival_rate * zipf.weight(rank[i]);
  }
}

std::string serialize_trace(const std::vector<Request>& trace) {
  std::ostringstream out;
  for (const auto& r : trace) {
    json j;
    j["t"] = r.t;
    j["context_id"] = r.context;
    if (r.n_new_tokens != 0) j["n_new_tokens"] = r.n_new_tokens;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<Request> parse_trace(const std::string& text,
                                 std::vector<std::string>* warnings) {
  std::vector<Request> trace;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool sorted = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      Request r = request_from_json(j);
      if (!trace.empty() && r.t < trace.back().t) sorted = false;
      trace.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const TraceError& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!sorted) {
    if (warnings != nullptr) {
      warnings->push_back("trace timestamps were out of order; sorted by time");
    }
    std::stable_sort(trace.begin(), trace.end(),
                     [](const Request& a, const Request& b) { return a.t < b.t; });
  }
  return trace;
}

std::vector<Request> read_trace_file(const std::string& path,
                                     std::vector<std::string>* warnings) {
  return parse_trace(read_text_file(path), warnings);
}

void write_trace_file(const std::string& path, const std::vector<Request>& trace) {
  write_text_file(path, serialize_trace(trace));
}

std::vector<GeneratedContext> read_profiles_file(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<GeneratedContext> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(profile_from_json(line));
      validate_profile(out.back().profile);
    } catch (const std::runtime_error& e) {
      throw ValidationError("profiles line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return out;
}

void write_profiles_file(const std::string& path,
                         const std::vector<GeneratedContext>& contexts,
                         bool include_truth) {
  std::ostringstream out;
  for (const auto& ctx : contexts) {
    out << profile_to_json(ctx.profile, include_truth ? &ctx.truth : nullptr) << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

SensitivityDist parse_sensitivity(const json& j, double default_shape_k) {
  const std::string kind = j.value("kind", "normal");
  const double shape_k = j.value("shape_k", default_shape_k);
  if (kind == "normal") {
    return SensitivityDist::normal(j.at("median").get<double>(), j.value("cov", 0.2),
                                   shape_k);
  }
  if (kind == "uniform") {
    return SensitivityDist::uniform(j.value("lo", 0.0), j.value("hi", 1.0), shape_k);
  }
  throw ValidationError("unknown sensitivity kind '" + kind +
                        "' (expected normal or uniform)");
}

ContextBlock parse_block(const json& j) {
  ContextBlock b;
  b.preset = j.value("preset", "");
  b.n = j.value("n", 0);
  b.id_prefix = j.value("id_prefix", "");
  b.mean_tokens = j.value("mean_tokens", 0.0);
  b.std_tokens = j.value("std_tokens", -1.0);
  b.shape_k = j.value("shape_k", 1.0);
  b.cov = j.value("cov", 0.2);
  b.frequency = j.value("frequency", 1.0);
  if (j.contains("sensitivity")) {
    b.sensitivity = parse_sensitivity(j.at("sensitivity"), b.shape_k);
  }
  if (j.contains("drifted_sensitivity")) {
    b.drifted_sensitivity = parse_sensitivity(j.at("drifted_sensitivity"), b.shape_k);
  }
  return b;
}

MethodSet parse_methods(const json& doc) {
  if (!doc.contains("methods")) return MethodSet::default_set();
  std::vector<CompressionMethod> methods;
  for (const auto& m : doc.at("methods")) {
    if (m.is_string()) {
      methods.push_back({m.get<std::string>(), 0.0});
    } else {
      methods.push_back({m.at("name").get<std::string>(),
                         m.value("decompression_overhead", 0.0)});
    }
  }
  return MethodSet(std::move(methods));
}

std::vector<TierSpec> parse_tiers(const json& doc) {
  if (!doc.contains("tiers") || !doc.at("tiers").is_array() || doc.at("tiers").empty()) {
    throw ValidationError("scenario needs a non-empty tiers array");
  }
  std::vector<TierSpec> tiers;
  int index = 0;
  for (const auto& t : doc.at("tiers")) {
    TierSpec spec;
    spec.tier_id = t.value("tier_id", index);
    spec.name = t.value("name", "tier" + std::to_string(spec.tier_id));
    if (t.contains("capacity_bytes") && !t.at("capacity_bytes").is_null()) {
      spec.capacity_bytes =
          static_cast<std::int64_t>(std::llround(t.at("capacity_bytes").get<double>()));
    } else if (t.contains("capacity_gb") && !t.at("capacity_gb").is_null()) {
      spec.capacity_bytes =
          static_cast<std::int64_t>(std::llround(t.at("capacity_gb").get<double>() * 1e9));
    }
    if (t.contains("read_bandwidth")) {
      spec.read_bandwidth = t.at("read_bandwidth").get<double>();
    } else if (t.contains("read_bandwidth_gbps")) {
      spec.read_bandwidth = t.at("read_bandwidth_gbps").get<double>() * 1e9;
    } else {
      throw ValidationError("tier " + spec.name +
                            " needs read_bandwidth or read_bandwidth_gbps");
    }
    spec.fixed_access_latency = t.value("fixed_access_latency", 0.0);
    tiers.push_back(spec);
    ++index;
  }
  return tiers;
}

TraceGenParams parse_trace_gen(const json& j) {
  TraceGenParams p;
  p.arrival_rate = j.value("arrival_rate", 1.0);
  p.duration = j.value("duration", 0.0);
  p.zipf_exponent = j.value("zipf_exponent", 1.0);
  p.n_new_tokens = j.value("n_new_tokens", std::int64_t{0});
  p.shuffle_ranks = j.value("shuffle_ranks", true);
  return p;
}

DriftConfig parse_drift(const json& j) {
  DriftConfig d;
  d.enabled = j.value("enabled", true);
  d.threshold = j.value("threshold", 0.3);
  d.min_samples = j.value("min_samples", std::int64_t{10});
  d.window_size = j.value("window_size", std::size_t{0});
  d.reprofile.duration = j.value("duration", 2.0);
  d.reprofile.penalty = j.value("penalty", 0.5);
  d.reprofile.noise_amplitude = j.value("noise", 0.0);
  d.gpu_window = j.value("gpu_window", 1.0);
  d.max_batch = j.value("max_batch", 8);
  return d;
}

void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override must look like path.to.key=value: " + assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::exception&) {
    value = value_text;  // bare strings need no quotes
  }

  std::vector<std::string> keys;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    keys.push_back(path.substr(begin, dot - begin));
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }

  json* node = &doc;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& key = keys[i];
    if (key.empty()) {
      throw ValidationError("override has an empty path segment: " + assignment);
    }
    const bool last = i + 1 == keys.size();
    const bool numeric =
        std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); });
    if (numeric && node->is_array()) {
      const std::size_t idx = std::stoul(key);
      if (idx >= node->size()) {
        throw ValidationError("override index " + key + " out of range in: " + path);
      }
      if (last) {
        (*node)[idx] = value;
      } else {
        node = &(*node)[idx];
      }
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ValidationError("override path crosses a non-object value: " + path);
      }
      if (last) {
        (*node)[key] = value;
      } else {
        node = &(*node)[key];
      }
    }
  }
}

}  // namespace

LoadedScenario load_scenario_text(const std::string& json_text,
                                  const std::string& base_dir,
                                  const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad scenario JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);

  LoadedScenario out;
  Scenario& s = out.scenario;
  try {
    s.seed = doc.value("seed", std::uint64_t{0});

    UtilityParams params;
    if (doc.contains("params")) {
      const json& pj = doc.at("params");
      params.alpha = pj.value("alpha", params.alpha);
      params.prefill_a = pj.value("prefill_a", params.prefill_a);
      params.prefill_b = pj.value("prefill_b", params.prefill_b);
      params.bytes_per_token = pj.value("bytes_per_token", params.bytes_per_token);
    }
    if (doc.contains("alpha")) params.alpha = doc.at("alpha").get<double>();
    validate_params(params);
    s.params = params;

    MethodSet methods = parse_methods(doc);
    const std::vector<double> grid =
        doc.contains("ratio_grid") ? doc.at("ratio_grid").get<std::vector<double>>()
                                   : CandidateSpace::default_ratio_grid();
    s.space = CandidateSpace(methods, grid);
    s.tiers = validate_hierarchy(parse_tiers(doc), &out.warnings);

    if (!doc.contains("profiles")) {
      throw ValidationError("scenario needs a profiles section");
    }
    std::vector<GeneratedContext> contexts;
    const json& profiles = doc.at("profiles");
    if (profiles.contains("file")) {
      contexts = read_profiles_file(
          join_path(base_dir, profiles.at("file").get<std::string>()));
    } else if (profiles.contains("inline")) {
      for (const auto& pj : profiles.at("inline")) {
        contexts.push_back(profile_from_json(pj.dump()));
        validate_profile(contexts.back().profile);
      }
    } else if (profiles.contains("generate")) {
      std::size_t block_index = 0;
      for (const auto& bj : profiles.at("generate")) {
        const ContextBlock block = parse_block(bj);
        auto more = gen_contexts(mix64(s.seed, kBlockStream + block_index), block,
                                 s.params, methods, grid);
        contexts.insert(contexts.end(), std::make_move_iterator(more.begin()),
                        std::make_move_iterator(more.end()));
        ++block_index;
      }
    } else {
      throw ValidationError("profiles needs 'file', 'inline' or 'generate'");
    }
    if (contexts.empty()) {
      throw ValidationError("scenario produced no contexts");
    }

    if (!doc.contains("trace")) {
      throw ValidationError("scenario needs a trace section");
    }
    const json& trace = doc.at("trace");
    if (trace.contains("file")) {
      out.trace =
          read_trace_file(join_path(base_dir, trace.at("file").get<std::string>()),
                          &out.warnings);
    } else if (trace.contains("inline")) {
      bool sorted = true;
      for (const auto& rj : trace.at("inline")) {
        Request r = request_from_json(rj);
        if (!out.trace.empty() && r.t < out.trace.back().t) sorted = false;
        out.trace.push_back(std::move(r));
      }
      if (!sorted) {
        out.warnings.push_back("inline trace timestamps were out of order; sorted");
        std::stable_sort(out.trace.begin(), out.trace.end(),
                         [](const Request& a, const Request& b) { return a.t < b.t; });
      }
    } else if (trace.contains("generate")) {
      const TraceGenParams tp = parse_trace_gen(trace.at("generate"));
      const std::uint64_t trace_seed = mix64(s.seed, kTraceStream);
      assign_zipf_frequencies(trace_seed, contexts, tp);
      std::vector<ContextId> ids;
      ids.reserve(contexts.size());
      for (const auto& ctx : contexts) ids.push_back(ctx.profile.context);
      out.trace = gen_trace(trace_seed, ids, tp);
    } else {
      throw ValidationError("trace needs 'file', 'inline' or 'generate'");
    }

    for (auto& ctx : contexts) {
      const ContextId id = ctx.profile.context;
      if (!s.profiles.emplace(id, std::move(ctx.profile)).second) {
        throw ValidationError("duplicate context id " + id);
      }
      if (!ctx.truth.empty()) s.truth.emplace(id, std::move(ctx.truth));
      s.order.push_back(id);
    }

    if (doc.contains("drift")) s.drift = parse_drift(doc.at("drift"));
    s.warm_start = doc.value("warm_start", false);
    s.miss_store_bottom = doc.value("miss_store_bottom", false);
    out.policy = Policy::parse(doc.value("policy", std::string("joint")));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }

  for (const auto& r : out.trace) {
    if (out.scenario.profiles.count(r.context) == 0) {
      throw ValidationError("trace references unknown context " + r.context);
    }
  }
  validate_scenario(out.scenario);
  return out;
}

LoadedScenario load_scenario_file(const std::string& path,
                                  const std::vector<std::string>& overrides) {
  const std::string text = read_text_file(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return load_scenario_text(text, base, overrides);
}

OracleInstance gen_oracle_instance(std::uint64_t seed) {
  Rng rng(seed);

  const std::size_t n_methods = 1 + rng.uniform_index(2);
  std::vector<CompressionMethod> methods;
  for (std::size_t m = 0; m < n_methods; ++m) {
    const double overhead = rng.uniform01() < 0.3 ? 1e-11 : 0.0;
    methods.push_back({"m" + std::to_string(m), overhead});
  }

  const std::vector<double> pool = {0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9};
  const std::size_t n_extra = 1 + rng.uniform_index(3);  // plus ratio 1.0
  std::vector<double> available = pool;
  std::vector<double> ratios = {1.0};
  for (std::size_t r = 0; r < n_extra; ++r) {
    const std::size_t pick = rng.uniform_index(available.size());
    ratios.push_back(available[pick]);
    available.erase(available.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::size_t n_contexts = 2 + rng.uniform_index(5);
  const double per_context =
      static_cast<double>(n_methods * ratios.size() * 2);  // two tiers
  while (std::pow(per_context, static_cast<double>(n_contexts)) > 1e7 &&
         n_contexts > 2) {
    --n_contexts;
  }

  OracleInstance inst;
  inst.space = CandidateSpace(MethodSet(methods), ratios);
  inst.params.alpha = rng.uniform(0.2, 3.0);

  std::vector<double> grid = ratios;
  std::sort(grid.begin(), grid.end());

  double total_bytes = 0.0;
  for (std::size_t i = 0; i < n_contexts; ++i) {
    ContextProfile p;
    p.context = "c" + std::to_string(i);
    p.original_size_bytes = static_cast<std::int64_t>(1e8) *
                            static_cast<std::int64_t>(1 + rng.uniform_index(100));
    p.frequency = rng.uniform(0.1, 3.0);
    p.ratio_grid = grid;
    for (const auto& m : methods) {
      const double s = rng.uniform01();
      const double k = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
      auto& row = p.quality_table[m.name];
      for (double r : grid) row.push_back(synth_quality(s, k, r));
    }
    total_bytes += static_cast<double>(p.original_size_bytes);
    inst.profiles.push_back(std::move(p));
  }

  TierSpec fast;
  fast.tier_id = 0;
  fast.name = "fast";
  fast.capacity_bytes =
      static_cast<std::int64_t>(total_bytes * rng.uniform(0.15, 0.8));
  fast.read_bandwidth = 20e9;
  fast.fixed_access_latency = rng.uniform(0.0, 0.02);
  TierSpec slow;
  slow.tier_id = 1;
  slow.name = "slow";
  slow.read_bandwidth = 2e9;
  slow.fixed_access_latency = rng.uniform(0.0, 0.05);
  inst.tiers = {fast, slow};
  return inst;
}

}  // namespace kvtier
