#include "declutter/rl/train.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

#include "declutter/error.hpp"
#include "declutter/rl/rollout.hpp"
#include "declutter/util/seed.hpp"
#include "json.hpp"

namespace declutter::rl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

namespace {

constexpr char kWeightsMagic[8] = {'D', 'C', 'P', 'O', 'L', 'W', '0', '1'};
constexpr char kAdamMagic[8] = {'D', 'C', 'A', 'D', 'A', 'M', '0', '1'};

constexpr std::uint64_t kInitStream = 0x1001;
constexpr std::uint64_t kEnvStream = 0x2000;
constexpr std::uint64_t kRolloutStream = 0x100000;
constexpr std::uint64_t kUpdateStream = 0x200000;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_all(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void put_u64(std::string& s, std::uint64_t v) { s.append(reinterpret_cast<const char*>(&v), 8); }

void put_doubles(std::string& s, const Vector& v) {
  s.append(reinterpret_cast<const char*>(v.data()), static_cast<std::size_t>(v.size()) * sizeof(double));
}

class Reader {
 public:
  Reader(std::string bytes, std::string name) : b_(std::move(bytes)), name_(std::move(name)) {}
  void magic(const char (&m)[8]) {
    if (b_.size() < 8 || b_.compare(0, 8, m, 8) != 0) throw FormatError(name_ + ": bad magic");
    pos_ = 8;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, b_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }
  Vector doubles(std::uint64_t n) {
    if (n > (b_.size() - pos_) / sizeof(double)) throw FormatError(name_ + ": truncated");
    Vector v(static_cast<Eigen::Index>(n));
    std::memcpy(v.data(), b_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  void end() const {
    if (pos_ != b_.size()) throw FormatError(name_ + ": trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw FormatError(name_ + ": truncated");
  }
  std::string b_;
  std::string name_;
  std::size_t pos_ = 0;
};

PpoBatch make_batch(const Trajectories& tr, const TrainConfig& cfg) {
  PpoBatch b;
  b.obs = tr.obs;
  b.actions = tr.actions;
  b.log_prob = tr.log_prob;
  b.advantages.resize(tr.rewards.size());
  b.returns.resize(tr.rewards.size());
  const auto T = static_cast<std::size_t>(tr.horizon);
  for (int e = 0; e < tr.env_count; ++e) {
    const auto c0 = static_cast<std::size_t>(tr.column(e, 0));
    const auto g = gae_advantages(std::span<const double>(tr.rewards.data() + c0, T),
                                  std::span<const double>(tr.values.data() + c0, T),
                                  std::span<const std::uint8_t>(tr.dones.data() + c0, T),
                                  tr.bootstrap[e], cfg.discount, cfg.gae_lambda);
    for (std::size_t t = 0; t < T; ++t) {
      b.advantages[static_cast<Eigen::Index>(c0 + t)] = g.advantages[t];
      b.returns[static_cast<Eigen::Index>(c0 + t)] = g.returns[t];
    }
  }
  return b;
}

}  // namespace

std::string to_json_line(const IterationRecord& r) {
  ordered_json j;
  j["iteration"] = r.iteration;
  j["mean_episode_reward"] = r.mean_episode_reward;
  j["episodes"] = r.episodes;
  j["mean_h"] = r.mean_h;
  j["breach_fraction"] = r.breach_fraction;
  j["mean_step_reward"] = r.mean_step_reward;
  j["clip_fraction"] = r.clip_fraction;
  j["approx_kl"] = r.approx_kl;
  j["policy_loss"] = r.policy_loss;
  j["value_loss"] = r.value_loss;
  j["entropy"] = r.entropy;
  j["grad_norm"] = r.grad_norm;
  j["mean_log_std"] = r.mean_log_std;
  j["divergences"] = r.divergences;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& c) {
  fs::create_directories(dir);
  const auto& p = c.params;

  std::string w(kWeightsMagic, 8);
  put_u64(w, static_cast<std::uint64_t>(p.theta.size()));
  put_doubles(w, p.theta);

  std::string a(kAdamMagic, 8);
  put_u64(a, static_cast<std::uint64_t>(c.adam.m.size()));
  put_u64(a, static_cast<std::uint64_t>(c.adam.t));
  put_doubles(a, c.adam.m);
  put_doubles(a, c.adam.v);

  ordered_json m;
  m["format"] = "declutter-policy";
  m["version"] = kCheckpointVersion;
  m["iteration"] = c.iteration;
  m["config_hash"] = hex64(c.config_hash);
  m["actor_sizes"] = p.actor.sizes;
  m["critic_sizes"] = p.critic.sizes;
  m["parameter_count"] = p.size();
  m["layout"] = "actor | log_std | critic";
  m["min_log_std"] = p.min_log_std;
  m["normalization"] = {{"count", p.norm.count},
                        {"epsilon", p.norm.epsilon},
                        {"clip", p.norm.clip},
                        {"mean", to_std(p.norm.mean)},
                        {"var", to_std(p.norm.var)}};
  m["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}};
  m["weights"] = "weights.bin";
  m["optimizer"] = "optimizer.bin";

  write_atomic(dir / "weights.bin", w);
  write_atomic(dir / "optimizer.bin", a);
  write_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  ordered_json m;
  try {
    m = ordered_json::parse(read_all(mpath));
  } catch (const ordered_json::exception& e) {
    throw FormatError(mpath.string() + ": " + e.what());
  }
  Checkpoint c;
  try {
    if (m.at("format").get<std::string>() != "declutter-policy")
      throw FormatError(mpath.string() + ": not a policy checkpoint");
    if (m.at("version").get<int>() != kCheckpointVersion)
      throw FormatError(mpath.string() + ": unsupported version " + m.at("version").dump());
    c.iteration = m.at("iteration").get<int>();
    c.config_hash = std::stoull(m.at("config_hash").get<std::string>(), nullptr, 16);
    auto& p = c.params;
    p.actor.sizes = m.at("actor_sizes").get<std::vector<int>>();
    p.critic.sizes = m.at("critic_sizes").get<std::vector<int>>();
    if (p.actor.sizes.size() < 2 || p.critic.sizes.size() < 2 || p.critic.output() != 1 ||
        p.actor.input() != p.critic.input())
      throw FormatError(mpath.string() + ": inconsistent layer sizes");
    p.min_log_std = m.at("min_log_std").get<double>();
    const auto& n = m.at("normalization");
    p.norm.count = n.at("count").get<double>();
    p.norm.epsilon = n.at("epsilon").get<double>();
    p.norm.clip = n.at("clip").get<double>();
    p.norm.mean = from_std(n.at("mean").get<std::vector<double>>());
    p.norm.var = from_std(n.at("var").get<std::vector<double>>());
    if (p.norm.mean.size() != p.obs_dim() || p.norm.var.size() != p.obs_dim())
      throw FormatError(mpath.string() + ": normalization width mismatch");
    const auto& ad = m.at("adam");
    c.adam.beta1 = ad.at("beta1").get<double>();
    c.adam.beta2 = ad.at("beta2").get<double>();
    c.adam.eps = ad.at("eps").get<double>();
    if (m.at("parameter_count").get<std::size_t>() != p.size())
      throw FormatError(mpath.string() + ": parameter count does not match layer sizes");
  } catch (const ordered_json::exception& e) {
    throw FormatError(mpath.string() + ": " + e.what());
  }

  Reader w(read_all(dir / "weights.bin"), (dir / "weights.bin").string());
  w.magic(kWeightsMagic);
  const auto n = w.u64();
  if (n != c.params.size()) throw FormatError((dir / "weights.bin").string() + ": size mismatch");
  c.params.theta = w.doubles(n);
  w.end();

  Reader a(read_all(dir / "optimizer.bin"), (dir / "optimizer.bin").string());
  a.magic(kAdamMagic);
  const auto an = a.u64();
  if (an != n) throw FormatError((dir / "optimizer.bin").string() + ": size mismatch");
  c.adam.t = static_cast<std::int64_t>(a.u64());
  c.adam.m = a.doubles(an);
  c.adam.v = a.doubles(an);
  a.end();
  if (!c.params.finite()) throw FormatError(dir.string() + ": non-finite parameters");
  return c;
}

TrainResult train(const TrainRun& run) {
  const auto& cfg = run.train;
  cfg.validate();
  run.env.validate();

  TrainResult res;
  if (run.resume_from) {
    auto c = load_checkpoint(*run.resume_from);
    if (c.config_hash != run.config_hash)
      throw ConfigError("resume: checkpoint config hash " + hex64(c.config_hash) +
                        " does not match the current config " + hex64(run.config_hash));
    if (c.params.obs_dim() != obs::kObservationDim || c.params.act_dim() != static_cast<int>(sim::kArmDof))
      throw ConfigError("resume: checkpoint dimensions do not match the environment");
    res.params = std::move(c.params);
    res.adam = std::move(c.adam);
    res.start_iteration = c.iteration;
  } else {
    res.params = PolicyParams::create(obs::kObservationDim, static_cast<int>(sim::kArmDof), cfg.hidden,
                                      derive_seed(cfg.seed, kInitStream), cfg.init_log_std);
    res.params.min_log_std = cfg.min_log_std;
    res.adam = AdamState(res.params.size());
  }

  const fs::path ckpt_root = run.output_dir ? *run.output_dir / "checkpoints" : fs::path{};
  auto save = [&](const std::string& name, const PolicyParams& p, const AdamState& a, int it) {
    if (!run.output_dir) return;
    save_checkpoint(ckpt_root / name, Checkpoint{p, a, it, run.config_hash});
  };

  auto bases = std::make_shared<const obs::ObservationBases>(
      obs::ObservationBases::sample(run.env.kme_gamma, run.env.basis_seed));
  VecEnv envs(run.env, bases, static_cast<std::size_t>(cfg.env_count),
              derive_seed(cfg.seed, kEnvStream + static_cast<std::uint64_t>(res.start_iteration)));
  envs.reset_all();

  for (int it = res.start_iteration + 1; it <= cfg.iterations; ++it) {
    const auto tr = rollout(envs, res.params, cfg.horizon, derive_seed(cfg.seed, kRolloutStream + it), false,
                            cfg.threads);
    const PpoBatch batch = make_batch(tr, cfg);

    UpdateDiagnostics d;
    try {
      d = ppo_update(res.params, res.adam, batch, cfg, derive_seed(cfg.seed, kUpdateStream + it));
    } catch (const TrainingError&) {
      save("last_good", res.params, res.adam, it - 1);
      throw;
    }
    res.params.norm.update(tr.raw_obs);

    IterationRecord r;
    r.iteration = it;
    double ep_sum = 0.0;
    for (const auto& ep : tr.episodes) ep_sum += ep.metrics.cumulative_reward;
    r.episodes = static_cast<int>(tr.episodes.size());
    r.mean_episode_reward = r.episodes > 0 ? ep_sum / r.episodes : 0.0;
    double hs = 0.0;
    int breaches = 0;
    for (std::size_t i = 0; i < tr.h.size(); ++i) {
      hs += tr.h[i];
      breaches += tr.breach[i];
    }
    r.mean_h = hs / static_cast<double>(tr.h.size());
    r.breach_fraction = breaches / static_cast<double>(tr.h.size());
    r.mean_step_reward = tr.rewards.mean();
    r.clip_fraction = d.clip_fraction;
    r.approx_kl = d.approx_kl;
    r.policy_loss = d.last.policy;
    r.value_loss = d.last.value;
    r.entropy = d.last.entropy;
    r.grad_norm = d.grad_norm;
    r.mean_log_std = res.params.log_std().mean();
    r.divergences = tr.divergences;
    res.records.push_back(r);
    if (run.metrics) *run.metrics << to_json_line(r) << '\n' << std::flush;
    if (run.on_iteration) run.on_iteration(r);

    if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 && it != cfg.iterations) {
      char name[32];
      std::snprintf(name, sizeof name, "iter_%06d", it);
      save(name, res.params, res.adam, it);
    }
  }
  save("final", res.params, res.adam, cfg.iterations);
  return res;
}

}  // namespace declutter::rl
