#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "declutter/bench/bench.hpp"
#include "declutter/io/cloud_io.hpp"
#include "declutter/io/config.hpp"
#include "declutter/kme/rff.hpp"
#include "declutter/occlusion/occlusion.hpp"
#include "declutter/rl/evaluate.hpp"
#include "declutter/rl/train.hpp"
#include "declutter/sim/lsystem.hpp"
#include "json.hpp"

namespace declutter::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string preset;
  std::string output;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c, const std::string& output_help) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--config", c.config, "JSON config file");
  sub->add_option("--preset", c.preset, "Defaults when no config is given: single_branch or full_tree");
  sub->add_option("--output", c.output, output_help);
  sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

io::RunConfig resolve(const Common& c) {
  if (!c.config.empty() && !c.preset.empty())
    throw ConfigError("--preset and --config are exclusive; set \"preset\" inside the config file");
  if (!c.config.empty()) return io::load_config(c.config);
  return io::preset_config(c.preset.empty() ? "single_branch" : c.preset);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) out << text;
  else write_file(c.output, text);
}

std::optional<double> last_train_reward(const fs::path& checkpoint) {
  const fs::path metrics = checkpoint.parent_path().parent_path() / "metrics.jsonl";
  std::ifstream in(metrics);
  if (!in) return std::nullopt;
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  if (last.empty()) return std::nullopt;
  try {
    return nlohmann::json::parse(last).at("mean_episode_reward").get<double>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point-cloud kernel embeddings, occlusion heuristic, cluster simulator and PPO harness",
               "declutter"};
  app.require_subcommand(1);

  Common c_embed, c_occ, c_tree, c_train, c_eval, c_bench;

  auto* embed = app.add_subcommand("embed", "Kernel mean embedding of a CSV or PLY cloud");
  add_common(embed, c_embed, "Output JSON file (default stdout)");
  std::string embed_input;
  std::optional<std::size_t> embed_pairs;
  std::optional<double> embed_gamma;
  std::string embed_basis;
  embed->add_option("input", embed_input, "Cloud file (.csv or .ply)")->required();
  embed->add_option("--pairs", embed_pairs, "Number of frequency pairs F (output has 2F values)");
  embed->add_option("--gamma", embed_gamma, "RBF length scale");
  embed->add_option("--basis", embed_basis, "Load a saved basis instead of sampling one");

  auto* occ = app.add_subcommand("occlusion", "Occlusion heuristic between a branch cloud and a clearance cloud");
  add_common(occ, c_occ, "Output JSON file (default stdout)");
  std::string occ_a, occ_b;
  std::optional<std::size_t> occ_k;
  std::optional<double> occ_dth;
  occ->add_option("branches", occ_a, "Branch cloud file")->required();
  occ->add_option("clearance", occ_b, "Clearance cloud file")->required();
  occ->add_option("--k", occ_k, "Number of nearest cross-cloud pairs");
  occ->add_option("--d-th", occ_dth, "Breach threshold in meters");

  auto* tree = app.add_subcommand("gen-tree", "Generate an L-system tree and write it as JSON");
  add_common(tree, c_tree, "Output JSON file (default stdout)");
  double trunk_yaw = 0.0;
  tree->add_option("--trunk-yaw", trunk_yaw, "Trunk yaw in radians");

  auto* train = app.add_subcommand("train", "Train a PPO policy");
  add_common(train, c_train, "Run directory (default runs/train)");
  std::optional<int> train_iterations, train_envs;
  std::string train_resume;
  train->add_option("--iterations", train_iterations, "Total iterations");
  train->add_option("--env-count", train_envs, "Parallel environments");
  train->add_option("--resume", train_resume, "Checkpoint directory to resume from");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or a scripted controller");
  add_common(eval, c_eval, "Output directory (default: print the table)");
  std::string eval_ckpt, eval_controller, eval_description;
  std::optional<int> eval_envs;
  std::optional<double> eval_dmax;
  bool eval_baselines = false;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint directory");
  eval->add_option("--controller", eval_controller, "policy, random, zero or teleport");
  eval->add_option("--env-count", eval_envs, "Test environments");
  eval->add_option("--d-max", eval_dmax, "Sensor noise bound in meters");
  eval->add_option("--description", eval_description, "Row label");
  eval->add_flag("--baselines", eval_baselines, "Also report random and zero-action rows");

  auto* bench = app.add_subcommand("bench", "Time the four global KME features");
  add_common(bench, c_bench, "Output JSON file (the table goes to stdout)");
  std::optional<std::vector<int>> bench_envs;
  std::optional<std::vector<std::size_t>> bench_sweep;
  std::optional<std::size_t> bench_n, bench_width;
  std::optional<int> bench_reps;
  bench->add_option("--env-counts", bench_envs, "Environment counts E")->delimiter(',');
  bench->add_option("--sweep", bench_sweep, "Cloud sizes for the scaling table")->delimiter(',');
  bench->add_option("--n", bench_n, "Points per cloud");
  bench->add_option("--width", bench_width, "Embedding width");
  bench->add_option("--reps", bench_reps, "Timed repetitions (>= 20)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (embed->parsed()) {
      auto cfg = resolve(c_embed);
      if (c_embed.seed) cfg.embed.basis_seed = *c_embed.seed;
      if (embed_pairs) cfg.embed.num_pairs = *embed_pairs;
      if (embed_gamma) cfg.embed.gamma = *embed_gamma;
      cfg.embed.validate();
      const auto cloud = io::read_cloud(embed_input);
      const auto basis = embed_basis.empty()
                             ? kme::sample_rff_basis(cfg.embed.num_pairs, cfg.embed.gamma, cfg.embed.basis_seed)
                             : kme::load_basis(embed_basis);
      const auto e = kme::embed_cloud(cloud, basis);
      ordered_json j;
      j["points"] = cloud.size();
      j["gamma"] = basis.gamma();
      j["num_pairs"] = basis.num_pairs();
      j["basis_seed"] = basis.seed();
      j["embedding"] = e.values;
      emit(c_embed, j.dump(2) + "\n", out);
    } else if (occ->parsed()) {
      auto cfg = resolve(c_occ);
      if (occ_k) cfg.occlusion.k_pairs = *occ_k;
      if (occ_dth) cfg.occlusion.d_th = *occ_dth;
      cfg.occlusion.validate();
      const auto a = io::read_cloud(occ_a);
      const auto b = io::read_cloud(occ_b);
      const auto s = occlusion::occlusion_stats(a, b, cfg.occlusion);
      ordered_json j;
      j["h"] = s.h;
      j["breach_count"] = s.breach_count;
      j["effective_k"] = s.effective_k;
      j["k_pairs"] = cfg.occlusion.k_pairs;
      j["d_th"] = cfg.occlusion.d_th;
      emit(c_occ, j.dump(2) + "\n", out);
    } else if (tree->parsed()) {
      const auto cfg = resolve(c_tree);
      const auto& sc = cfg.env.scenario;
      const auto t = sim::generate_tree(sc.lsystem, sc.dynamics, c_tree.seed.value_or(0), trunk_yaw);
      emit(c_tree, sim::tree_to_json(t) + "\n", out);
    } else if (train->parsed()) {
      auto cfg = resolve(c_train);
      if (c_train.seed) cfg.train.seed = *c_train.seed;
      if (train_iterations) cfg.train.iterations = *train_iterations;
      if (train_envs) cfg.train.env_count = *train_envs;
      cfg.train.threads = c_train.threads;
      cfg.validate();
      const fs::path dir = c_train.output.empty() ? fs::path("runs/train") : fs::path(c_train.output);
      fs::create_directories(dir);
      write_file(dir / "config.json", io::dump_config(cfg));
      std::ofstream metrics(dir / "metrics.jsonl", train_resume.empty() ? std::ios::trunc : std::ios::app);
      if (!metrics) throw Error("cannot write " + (dir / "metrics.jsonl").string());
      rl::TrainRun run;
      run.env = cfg.env;
      run.train = cfg.train;
      run.output_dir = dir;
      run.metrics = &metrics;
      run.config_hash = io::training_config_hash(cfg);
      if (!train_resume.empty()) run.resume_from = fs::path(train_resume);
      const auto res = rl::train(run);
      const auto& last = res.records.empty() ? rl::IterationRecord{} : res.records.back();
      out << "trained iterations " << res.start_iteration + 1 << ".." << cfg.train.iterations
          << "; final mean episode reward " << last.mean_episode_reward << "; checkpoint "
          << (dir / "checkpoints" / "final").string() << "\n";
    } else if (eval->parsed()) {
      auto cfg = resolve(c_eval);
      if (c_eval.seed) cfg.eval.seed = *c_eval.seed;
      if (eval_envs) cfg.eval.env_count = *eval_envs;
      if (eval_dmax) cfg.env.noise.d_max = *eval_dmax;
      if (!eval_controller.empty()) cfg.eval.controller = rl::controller_from_string(eval_controller);
      if (!eval_description.empty()) cfg.eval.description = eval_description;
      cfg.eval.threads = c_eval.threads;
      cfg.validate();

      std::optional<rl::Checkpoint> ck;
      if (!eval_ckpt.empty()) ck = rl::load_checkpoint(eval_ckpt);
      if (cfg.eval.controller == rl::ControllerKind::policy && !ck)
        throw ConfigError("eval: the policy controller needs --checkpoint");
      std::vector<rl::EvalRow> rows;
      auto ec = cfg.eval;
      if (ck) ec.train_reward = last_train_reward(eval_ckpt);
      rows.push_back(rl::evaluate(ck ? &ck->params : nullptr, cfg.env, ec));
      if (eval_baselines) {
        for (auto k : {rl::ControllerKind::random, rl::ControllerKind::zero}) {
          auto b = cfg.eval;
          b.controller = k;
          b.description = std::string(rl::to_string(k));
          b.train_reward.reset();
          rows.push_back(rl::evaluate(nullptr, cfg.env, b));
        }
      }
      const auto table = rl::report_table(rows);
      if (c_eval.output.empty()) {
        out << table;
      } else {
        const fs::path dir = c_eval.output;
        write_file(dir / "config.json", io::dump_config(cfg));
        write_file(dir / "report.json", rl::report_json(rows) + "\n");
        write_file(dir / "report.txt", table);
        std::string lines;
        for (const auto& r : rows) lines += nlohmann::json::parse(rl::report_json({r}, -1))["rows"][0].dump() + "\n";
        write_file(dir / "eval.jsonl", lines);
        out << table;
      }
    } else if (bench->parsed()) {
      auto cfg = resolve(c_bench);
      auto& b = cfg.bench;
      if (c_bench.seed) b.seed = *c_bench.seed;
      if (bench_envs) b.env_counts = *bench_envs;
      if (bench_sweep) b.sweep = *bench_sweep;
      if (bench_n) b.cloud_size = *bench_n;
      if (bench_width) b.width = *bench_width;
      if (bench_reps) b.repetitions = *bench_reps;
      b.threads = c_bench.threads;
      const auto report = bench::run_bench(b);
      if (!c_bench.output.empty()) write_file(c_bench.output, bench::report_json(report) + "\n");
      out << bench::report_table(report);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace declutter::cli
