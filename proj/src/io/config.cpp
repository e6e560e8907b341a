#include "declutter/io/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "declutter/error.hpp"
#include "declutter/rl/train.hpp"
#include "json.hpp"

namespace declutter::io {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void type_error(const std::string& path, const char* want) {
  throw ConfigError("config key '" + path + "': expected " + want);
}

// Field conversions shared by the reader and the writer.
void from(const ordered_json& j, double& v, const std::string& p) {
  if (!j.is_number()) type_error(p, "a number");
  v = j.get<double>();
}
void from(const ordered_json& j, int& v, const std::string& p) {
  if (!j.is_number_integer()) type_error(p, "an integer");
  const auto x = j.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) type_error(p, "a 32-bit integer");
  v = static_cast<int>(x);
}
void from(const ordered_json& j, unsigned& v, const std::string& p) {
  if (!j.is_number_unsigned()) type_error(p, "a non-negative integer");
  v = j.get<unsigned>();
}
void from(const ordered_json& j, std::size_t& v, const std::string& p) {
  if (!j.is_number_unsigned()) type_error(p, "a non-negative integer");
  v = j.get<std::size_t>();
}
void from(const ordered_json& j, bool& v, const std::string& p) {
  if (!j.is_boolean()) type_error(p, "true or false");
  v = j.get<bool>();
}
void from(const ordered_json& j, std::string& v, const std::string& p) {
  if (!j.is_string()) type_error(p, "a string");
  v = j.get<std::string>();
}
template <class T>
void from(const ordered_json& j, std::vector<T>& v, const std::string& p) {
  if (!j.is_array()) type_error(p, "an array");
  v.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T x{};
    from(j[i], x, p + "[" + std::to_string(i) + "]");
    v.push_back(x);
  }
}
void from(const ordered_json& j, sim::ScenarioKind& v, const std::string& p) {
  std::string s;
  from(j, s, p);
  try {
    v = sim::scenario_kind_from_string(s);
  } catch (const Error& e) {
    throw ConfigError("config key '" + p + "': " + e.what());
  }
}
void from(const ordered_json& j, CloudTag& v, const std::string& p) {
  std::string s;
  from(j, s, p);
  try {
    v = cloud_tag_from_string(s);
  } catch (const Error& e) {
    throw ConfigError("config key '" + p + "': " + e.what());
  }
}
void from(const ordered_json& j, rl::ControllerKind& v, const std::string& p) {
  std::string s;
  from(j, s, p);
  try {
    v = rl::controller_from_string(s);
  } catch (const Error& e) {
    throw ConfigError("config key '" + p + "': " + e.what());
  }
}
void from(const ordered_json& j, obs::FeatureMask& v, const std::string& p) {
  std::vector<std::string> names;
  from(j, names, p);
  v = obs::FeatureMask{};
  for (const auto& n : names) {
    try {
      v.set(obs::feature_group_from_string(n), false);
    } catch (const Error& e) {
      throw ConfigError("config key '" + p + "': " + e.what());
    }
  }
}

template <class T>
ordered_json to(const T& v) {
  return ordered_json(v);
}
ordered_json to(const sim::ScenarioKind& v) { return std::string(sim::to_string(v)); }
ordered_json to(const CloudTag& v) { return std::string(to_string(v)); }
ordered_json to(const rl::ControllerKind& v) { return std::string(rl::to_string(v)); }
ordered_json to(const obs::FeatureMask& v) {
  auto a = ordered_json::array();
  for (std::size_t g = 0; g < obs::kGroupCount; ++g)
    if (!v.enabled[g]) a.push_back(std::string(obs::to_string(static_cast<obs::FeatureGroup>(g))));
  return a;
}

class Reader {
 public:
  Reader(const ordered_json& root) : node_(&root) {}

  template <class T>
  void operator()(const char* key, T& field) {
    const auto it = node_->find(key);
    if (it == node_->end()) return;
    seen_.insert(key);
    from(*it, field, path_ + key);
  }

  template <class F>
  void section(const char* key, F&& body) {
    const auto it = node_->find(key);
    if (it == node_->end()) return;
    seen_.insert(key);
    if (!it->is_object()) type_error(path_ + key, "an object");
    const auto* saved_node = node_;
    const auto saved_path = path_;
    auto saved_seen = std::move(seen_);
    node_ = &*it;
    path_ += std::string(key) + ".";
    seen_.clear();
    body();
    finish();
    node_ = saved_node;
    path_ = saved_path;
    seen_ = std::move(saved_seen);
  }

  void skip(const char* key) { seen_.insert(key); }

  void finish() const {
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + path_ + it.key() + "'");
  }

 private:
  const ordered_json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(ordered_json& root) : node_(&root) {}

  template <class T>
  void operator()(const char* key, T& field) {
    (*node_)[key] = to(field);
  }

  template <class F>
  void section(const char* key, F&& body) {
    auto* saved = node_;
    node_ = &((*node_)[key] = ordered_json::object());
    body();
    node_ = saved;
  }

  void skip(const char*) {}

 private:
  ordered_json* node_;
};

template <class V>
void describe(V& v, occlusion::OcclusionParams& c) {
  v("k_pairs", c.k_pairs);
  v("d_th", c.d_th);
  v("k_local", c.k_local);
  v("d_sm", c.d_sm);
}

template <class V>
void describe(V& v, env::EnvConfig& c) {
  v.section("scenario", [&] {
    auto& s = c.scenario;
    v("kind", s.kind);
    v.section("lsystem", [&] {
      auto& l = s.lsystem;
      v("recursion_depth", l.recursion_depth);
      v("divergence_angle", l.divergence_angle);
      v("elongation_rate", l.elongation_rate);
      v("base_segment_length", l.base_segment_length);
      v("base_radius", l.base_radius);
      v("radius_taper", l.radius_taper);
      v("branching_factor", l.branching_factor);
      v("morphology_sigma", l.morphology_sigma);
    });
    v.section("dynamics", [&] {
      auto& d = s.dynamics;
      v("base_stiffness", d.base_stiffness);
      v("stiffness_exponent", d.stiffness_exponent);
      v("damping_ratio", d.damping_ratio);
      v("density", d.density);
      v("inertia_floor", d.inertia_floor);
      v("twist_dof", d.twist_dof);
    });
    v.section("contact", [&] {
      v("stiffness", s.contact.stiffness);
      v("damping", s.contact.damping);
      v("friction", s.contact.friction);
      v("substeps", s.contact.substeps);
    });
    v.section("randomization", [&] {
      v("scale_min", s.randomization.scale_min);
      v("scale_max", s.randomization.scale_max);
      v("enabled", s.randomization.enabled);
    });
    v.section("sensing", [&] {
      v("n_robot", s.sensing.n_robot);
      v("n_clearance", s.sensing.n_clearance);
      v("n_whole_branch", s.sensing.n_whole_branch);
      v("n_zoomed_branch", s.sensing.n_zoomed_branch);
      v("zoom_radius", s.sensing.zoom_radius);
    });
    v.section("occlusion", [&] { describe(v, s.occlusion); });
    v("training_mode", s.training_mode);
    v("dt", s.dt);
    v("horizon", s.horizon);
    v("min_initial_h", s.min_initial_h);
    v("max_attempts", s.max_attempts);
    v("settle_steps", s.settle_steps);
    v("trunk_distance_min", s.trunk_distance_min);
    v("trunk_distance_max", s.trunk_distance_max);
    v("trunk_bearing_max", s.trunk_bearing_max);
    v("line_length", s.line_length);
    v("line_yaw_max", s.line_yaw_max);
    v("reach_min", s.reach_min);
    v("reach_max", s.reach_max);
    v("height_min", s.height_min);
    v("height_max", s.height_max);
    v("clearance_margin", s.clearance_margin);
  });
  v.section("observation", [&] {
    auto& o = c.observation;
    v.section("occlusion", [&] { describe(v, o.occlusion); });
    v("f_u", o.f_u);
    v("h_source", o.h_source);
    v("max_stale_steps", o.max_stale_steps);
    v("disabled_groups", o.mask);
  });
  v.section("weights", [&] {
    v("clearance", c.weights.clearance);
    v("smoothness", c.weights.smoothness);
    v("safety", c.weights.safety);
  });
  v.section("noise", [&] {
    v("d_max", c.noise.d_max);
    v("subsample_fraction", c.noise.subsample_fraction);
  });
  v("kme_gamma", c.kme_gamma);
  v("basis_seed", c.basis_seed);
}

// Keys excluded from the resume fingerprint are tagged `run`.
template <class V>
void describe(V& v, rl::TrainConfig& c, bool include_run_keys = true) {
  v("discount", c.discount);
  v("gae_lambda", c.gae_lambda);
  v("clip_epsilon", c.clip_epsilon);
  v("learning_rate", c.learning_rate);
  v("epochs", c.epochs);
  v("minibatch_size", c.minibatch_size);
  v("horizon", c.horizon);
  v("env_count", c.env_count);
  v("seed", c.seed);
  v("hidden", c.hidden);
  v("init_log_std", c.init_log_std);
  v("min_log_std", c.min_log_std);
  v("value_coef", c.value_coef);
  v("entropy_coef", c.entropy_coef);
  v("max_grad_norm", c.max_grad_norm);
  v("normalize_advantages", c.normalize_advantages);
  if (include_run_keys) {
    v("iterations", c.iterations);
    v("checkpoint_every", c.checkpoint_every);
    v("threads", c.threads);
  }
}

template <class V>
void describe(V& v, RunConfig& c) {
  v.skip("preset");
  v.section("env", [&] { describe(v, c.env); });
  v.section("train", [&] { describe(v, c.train); });
  v.section("eval", [&] {
    v("env_count", c.eval.env_count);
    v("seed", c.eval.seed);
    v("controller", c.eval.controller);
    v("description", c.eval.description);
    v("teleport_step", c.eval.teleport_step);
    v("threads", c.eval.threads);
  });
  v.section("embed", [&] {
    v("gamma", c.embed.gamma);
    v("num_pairs", c.embed.num_pairs);
    v("basis_seed", c.embed.basis_seed);
  });
  v.section("occlusion", [&] { describe(v, c.occlusion); });
  v.section("bench", [&] {
    auto& b = c.bench;
    v("env_counts", b.env_counts);
    v("cloud_size", b.cloud_size);
    v("sweep", b.sweep);
    v("width", b.width);
    v("repetitions", b.repetitions);
    v("warmup", b.warmup);
    v("gamma", b.gamma);
    v("gram_max_n", b.gram_max_n);
    v("seed", b.seed);
    v("threads", b.threads);
  });
}

}  // namespace

void EmbedConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("embed.gamma must be > 0");
  if (num_pairs < 1) throw ConfigError("embed.num_pairs must be >= 1");
}

void RunConfig::validate() const {
  if (preset != "single_branch" && preset != "full_tree")
    throw ConfigError("preset must be 'single_branch' or 'full_tree', got '" + preset + "'");
  env.validate();
  train.validate();
  eval.validate();
  embed.validate();
  occlusion.validate();
  bench.validate();
}

RunConfig preset_config(const std::string& preset) {
  RunConfig c;
  c.preset = preset;
  if (preset == "single_branch") {
    c.env = env::EnvConfig::single_branch();
    c.train = rl::TrainConfig::single_branch();
  } else if (preset != "full_tree") {
    throw ConfigError("config key 'preset': unknown preset '" + preset + "' (single_branch, full_tree)");
  }
  return c;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  std::string preset = "single_branch";
  if (auto it = j.find("preset"); it != j.end()) from(*it, preset, "preset");
  RunConfig c = preset_config(preset);
  Reader r(j);
  describe(r, c);
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string dump_config(const RunConfig& config) {
  RunConfig c = config;
  ordered_json j;
  j["preset"] = c.preset;
  Writer w(j);
  describe(w, c);
  return j.dump(2) + "\n";
}

std::uint64_t training_config_hash(const RunConfig& config) {
  RunConfig c = config;
  ordered_json j;
  j["preset"] = c.preset;
  Writer w(j);
  w.section("env", [&] { describe(w, c.env); });
  w.section("train", [&] { describe(w, c.train, false); });
  return rl::fnv1a64(j.dump());
}

}  // namespace declutter::io
