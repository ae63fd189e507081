// psrolab command-line harness: reproducible JSON-configured experiment
// runner (run) and cross-run trajectory aggregation (compare).
#include <algorithm>
#include <cmath>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "psrolab/common.hpp"
#include "psrolab/forge.hpp"
#include "psrolab/game.hpp"
#include "psrolab/global.hpp"
#include "psrolab/landscape.hpp"
#include "psrolab/lp.hpp"
#include "psrolab/meta.hpp"
#include "psrolab/psro.hpp"
#include "psrolab/rm_br.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace psrolab;

namespace {

constexpr int kSchemaVersion = 1;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct JobSpec {
  std::string name;
  std::string type;
  json params;
  std::uint64_t seed = 0;
  std::vector<std::string> deps;  // names of referenced jobs
};

struct JobOutcome {
  bool ok = false;
  std::string error;
  std::vector<std::string> files;
};

std::vector<std::string> collect_deps(const json& j) {
  std::vector<std::string> deps;
  if (j.is_object()) {
    if (j.contains("from_job") && j["from_job"].is_string())
      deps.push_back(j["from_job"].get<std::string>());
    for (const auto& item : j.items()) {
      auto sub = collect_deps(item.value());
      deps.insert(deps.end(), sub.begin(), sub.end());
    }
  } else if (j.is_array()) {
    for (const auto& item : j) {
      auto sub = collect_deps(item);
      deps.insert(deps.end(), sub.begin(), sub.end());
    }
  }
  return deps;
}

// Resolves a "game" parameter: a path string, a generator object, or a
// reference to a prior forge job's game file.
Game resolve_game(const json& j, const fs::path& outdir,
                  const std::string& where) {
  if (j.is_string()) return load_game(j.get<std::string>());
  if (!j.is_object())
    throw ConfigError("'game' must be a path, generator, or reference in " +
                      where);
  if (j.contains("from_job")) {
    check_keys(j, {"from_job"}, where + ".game");
    const std::string ref = j["from_job"].get<std::string>();
    return load_game((outdir / (ref + ".game.json")).string());
  }
  check_keys(j, {"kind", "n", "noise", "seed"}, where + ".game");
  const std::string kind = j.at("kind").get<std::string>();
  GameKind gk;
  if (kind == "disc-elo-noise")
    gk = GameKind::kDiscEloNoise;
  else if (kind == "gaussian-skew")
    gk = GameKind::kGaussianSkew;
  else
    throw ConfigError("unknown game kind '" + kind + "' in " + where);
  return generate_game(gk, j.at("n").get<int>(),
                       j.value("noise", 0.1),
                       j.at("seed").get<std::uint64_t>());
}

// Resolves a solver parameter: an inline MssSpec or a reference to a forge
// job's shortcut/target specs.
MssSpec resolve_solver(const json& j, const fs::path& outdir,
                       const std::string& where) {
  if (j.is_object() && j.contains("from_job")) {
    check_keys(j, {"from_job", "use"}, where);
    const std::string ref = j["from_job"].get<std::string>();
    const std::string use = j.value("use", "shortcut");
    std::ifstream in(outdir / (ref + ".json"));
    if (!in) throw IoError("cannot read output of job '" + ref + "'");
    json meta = json::parse(in);
    if (use == "shortcut") return mss_from_json(meta.at("shortcut"));
    if (use == "target") return mss_from_json(meta.at("target"));
    throw ConfigError("'use' must be shortcut or target in " + where);
  }
  return mss_from_json(j);
}

Population resolve_population(const json& j, const Game& game,
                              const std::string& where) {
  if (!j.is_array()) throw ConfigError("'members' must be an array in " + where);
  std::vector<int> members = j.get<std::vector<int>>();
  return Population::from_members(std::move(members), game.size());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

JobOutcome run_forge_job(const JobSpec& job, const fs::path& outdir) {
  check_keys(job.params,
             {"name", "type", "seed", "target", "n", "s", "init", "variant"},
             "job '" + job.name + "'");
  const MssSpec target = mss_from_json(job.params.at("target"));
  const int n = job.params.at("n").get<int>();
  const int s = job.params.value("s", 1);
  const int init = job.params.value("init", 0);
  const std::string variant = job.params.value("variant", "shortcut");
  ForgeResult fr = [&] {
    if (variant == "worst-case") return forge_worst_case(target, n, init,
                                                         job.seed);
    if (variant == "shortcut")
      return forge_with_shortcut(target, n, s, init, job.seed);
    if (variant == "theorem4")
      return forge_theorem4_instance(target, n, s, job.seed);
    throw ConfigError("unknown forge variant '" + variant + "' in job '" +
                      job.name + "'");
  }();
  const fs::path game_path = outdir / (job.name + ".game.json");
  save_game(fr.game, game_path.string());
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["config"] = job.params;
  meta["target"] = mss_to_json(fr.target_spec);
  meta["shortcut"] = mss_to_json(fr.shortcut);
  meta["equilibrium_support"] = fr.equilibrium_support;
  meta["target_non_convergent"] = fr.target_non_convergent;
  meta["init"] = fr.init;
  json log = json::array();
  for (const ForgeLogEntry& e : fr.construction_log) {
    log.push_back({{"step", e.step},
                   {"case", e.case_taken},
                   {"e", e.e},
                   {"eps", e.eps},
                   {"v", e.v},
                   {"delta", e.delta},
                   {"delta_prime", e.delta_prime},
                   {"alpha", e.alpha},
                   {"eps_prime", e.eps_prime},
                   {"min_margin", e.min_margin},
                   {"lp_status", e.lp_status},
                   {"added", e.added},
                   {"surrogate", e.surrogate}});
  }
  meta["construction_log"] = std::move(log);
  const fs::path meta_path = outdir / (job.name + ".json");
  write_json(meta_path, meta);
  // Summary CSV of the construction for golden-file comparisons.
  std::ostringstream csv;
  csv << "step,case,e,eps,v,added\n";
  for (const ForgeLogEntry& e : fr.construction_log)
    csv << e.step << ',' << e.case_taken << ',' << fmt_double(e.e) << ','
        << fmt_double(e.eps) << ',' << fmt_double(e.v) << ',' << e.added
        << '\n';
  const fs::path csv_path = outdir / (job.name + ".csv");
  write_text(csv_path, csv.str());
  return {true, "", {game_path.string(), meta_path.string(),
                     csv_path.string()}};
}

JobOutcome run_psro_job(const JobSpec& job, const fs::path& outdir) {
  check_keys(job.params,
             {"name", "type", "seed", "game", "solver", "init", "max_iters"},
             "job '" + job.name + "'");
  const Game game = resolve_game(job.params.at("game"), outdir,
                                 "job '" + job.name + "'");
  const MssSpec solver = resolve_solver(job.params.at("solver"), outdir,
                                        "job '" + job.name + "'.solver");
  const int init = job.params.value("init", 0);
  const int max_iters = job.params.value("max_iters", 2 * game.size());
  RunRecord rec = run_psro(game, solver, init, max_iters, job.seed);
  rec.config_snapshot = job.params;
  const fs::path json_path = outdir / (job.name + ".json");
  const fs::path csv_path = outdir / (job.name + ".csv");
  write_json(json_path, run_to_json(rec));
  write_text(csv_path, trajectory_csv(rec));
  return {true, "", {json_path.string(), csv_path.string()}};
}

JobOutcome run_global_job(const JobSpec& job, const fs::path& outdir) {
  check_keys(job.params,
             {"name", "type", "seed", "game", "base", "mode", "k",
              "max_rounds", "init", "pool", "gamma_ns", "rm_steps",
              "samples_per_step"},
             "job '" + job.name + "'");
  const Game game = resolve_game(job.params.at("game"), outdir,
                                 "job '" + job.name + "'");
  const MssSpec base = resolve_solver(job.params.at("base"), outdir,
                                      "job '" + job.name + "'.base");
  GlobalOptions opts;
  opts.mode = global_mode_from_name(job.params.value("mode", "exact-pe"));
  const std::string pool = job.params.value("pool", "dirichlet");
  if (pool == "dirichlet")
    opts.pool_style = PoolStyle::kDirichlet;
  else if (pool == "neighbor")
    opts.pool_style = PoolStyle::kNeighbor;
  else
    throw ConfigError("unknown pool style '" + pool + "' in job '" +
                      job.name + "'");
  opts.gamma_ns = job.params.value("gamma_ns", 0.3);
  opts.rm_steps = job.params.value("rm_steps", 1000);
  opts.samples_per_step = job.params.value("samples_per_step", 0);
  const int k = job.params.value("k", 8);
  const int init = job.params.value("init", 0);
  const int max_rounds = job.params.value("max_rounds", game.size());
  RunRecord rec = run_global_psro(game, base, init, k, opts.mode, max_rounds,
                                  job.seed, opts);
  rec.config_snapshot = job.params;
  const fs::path json_path = outdir / (job.name + ".json");
  const fs::path csv_path = outdir / (job.name + ".csv");
  write_json(json_path, run_to_json(rec));
  write_text(csv_path, trajectory_csv(rec));
  return {true, "", {json_path.string(), csv_path.string()}};
}

JobOutcome run_landscape_job(const JobSpec& job, const fs::path& outdir) {
  check_keys(job.params,
             {"name", "type", "seed", "game", "members", "resolution"},
             "job '" + job.name + "'");
  const Game game = resolve_game(job.params.at("game"), outdir,
                                 "job '" + job.name + "'");
  const Population pop = resolve_population(job.params.at("members"), game,
                                            "job '" + job.name + "'");
  const int resolution = job.params.value("resolution", 40);
  std::vector<LandscapePoint> grid = pe_landscape(game, pop, resolution);
  const fs::path csv_path = outdir / (job.name + ".csv");
  write_text(csv_path, landscape_csv(grid));
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["config"] = job.params;
  meta["points"] = grid.size();
  const fs::path json_path = outdir / (job.name + ".json");
  write_json(json_path, meta);
  return {true, "", {csv_path.string(), json_path.string()}};
}

JobOutcome run_estimate_pe_job(const JobSpec& job, const fs::path& outdir) {
  check_keys(job.params,
             {"name", "type", "seed", "game", "members", "rm_steps",
              "samples_per_step"},
             "job '" + job.name + "'");
  const Game game = resolve_game(job.params.at("game"), outdir,
                                 "job '" + job.name + "'");
  const Population pop = resolve_population(job.params.at("members"), game,
                                            "job '" + job.name + "'");
  const int rm_steps = job.params.value("rm_steps", 1000);
  const int samples = job.params.value("samples_per_step", 0);
  RmBrResult res = estimate_pe(game, pop, rm_steps, samples, job.seed);
  PeResult exact = population_exploitability(game, pop);
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["config"] = job.params;
  meta["pe_est"] = res.pe_est;
  meta["pe_exact"] = exact.pe;
  meta["rho"] = res.rho.probs;
  meta["beta"] = res.beta;
  meta["gamma"] = res.gamma;
  meta["eta"] = res.eta;
  const fs::path json_path = outdir / (job.name + ".json");
  write_json(json_path, meta);
  std::ostringstream csv;
  csv << "pe_est,pe_exact\n"
      << fmt_double(res.pe_est) << ',' << fmt_double(exact.pe) << '\n';
  const fs::path csv_path = outdir / (job.name + ".csv");
  write_text(csv_path, csv.str());
  return {true, "", {json_path.string(), csv_path.string()}};
}

JobOutcome dispatch_job(const JobSpec& job, const fs::path& outdir) {
  try {
    if (job.type == "forge") return run_forge_job(job, outdir);
    if (job.type == "psro") return run_psro_job(job, outdir);
    if (job.type == "global-psro") return run_global_job(job, outdir);
    if (job.type == "landscape") return run_landscape_job(job, outdir);
    if (job.type == "estimate-pe") return run_estimate_pe_job(job, outdir);
    throw ConfigError("unknown job type '" + job.type + "'");
  } catch (const std::exception& e) {
    return {false, e.what(), {}};
  }
}

fs::path default_outdir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("PSROLAB_OUT")) return env;
  return "psrolab_out";
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            int max_threads) {
  std::ifstream in(config_path);
  if (!in) throw IoError("cannot read config " + config_path);
  json config = json::parse(in);
  check_keys(config, {"schema_version", "seed", "jobs"}, "config");
  if (config.value("schema_version", -1) != kSchemaVersion)
    throw ConfigError("config key 'schema_version' must be " +
                      std::to_string(kSchemaVersion));
  if (!config.contains("seed"))
    throw ConfigError("config is missing key 'seed'");
  const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
  if (!config.contains("jobs") || !config.at("jobs").is_array())
    throw ConfigError("config key 'jobs' must be an array");

  std::vector<JobSpec> jobs;
  std::set<std::string> names;
  int index = 0;
  for (const json& j : config.at("jobs")) {
    if (!j.is_object()) throw ConfigError("each job must be an object");
    JobSpec spec;
    spec.type = j.value("type", "");
    if (spec.type.empty())
      throw ConfigError("job " + std::to_string(index) +
                        " is missing key 'type'");
    spec.name = j.value("name", "job" + std::to_string(index));
    if (!names.insert(spec.name).second)
      throw ConfigError("duplicate job name '" + spec.name + "'");
    spec.params = j;
    spec.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>()
                                   : mix_seed(seed, 0x6a6f62ULL + index);
    spec.deps = collect_deps(j);
    jobs.push_back(std::move(spec));
    ++index;
  }
  for (const JobSpec& job : jobs)
    for (const std::string& d : job.deps)
      if (!names.count(d))
        throw ConfigError("job '" + job.name + "' references unknown job '" +
                          d + "'");

  const fs::path outdir = default_outdir(out_flag);
  fs::create_directories(outdir);

  // Jobs run concurrently up to the --jobs limit; a job referencing another
  // waits for it.  Per-job determinism makes schedule order irrelevant.
  std::map<std::string, JobOutcome> outcomes;
  std::mutex mu;
  std::condition_variable cv;
  std::set<int> claimed;
  const int limit = std::max(1, max_threads);

  auto worker = [&] {
    std::unique_lock<std::mutex> lk(mu);
    for (;;) {
      int my = -1;
      bool pending = false;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (claimed.count(static_cast<int>(i))) continue;
        pending = true;
        bool deps_ok = true, dep_failed = false;
        for (const std::string& d : jobs[i].deps) {
          auto it = outcomes.find(d);
          if (it == outcomes.end())
            deps_ok = false;
          else if (!it->second.ok)
            dep_failed = true;
        }
        if (dep_failed) {
          claimed.insert(static_cast<int>(i));
          outcomes[jobs[i].name] = {false, "dependency failed", {}};
          cv.notify_all();
          deps_ok = false;
        }
        if (deps_ok) {
          my = static_cast<int>(i);
          break;
        }
      }
      if (my < 0) {
        if (!pending) return;  // everything claimed; nothing left to start
        cv.wait_for(lk, std::chrono::milliseconds(5));
        continue;
      }
      claimed.insert(my);
      lk.unlock();
      JobOutcome outcome = dispatch_job(jobs[my], outdir);
      lk.lock();
      outcomes[jobs[my].name] = std::move(outcome);
      cv.notify_all();
    }
  };
  std::vector<std::thread> threads;
  for (int t = 0; t < limit; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["config"] = config;
  json jout = json::array();
  int failures = 0;
  for (const JobSpec& job : jobs) {
    const JobOutcome& o = outcomes.at(job.name);
    if (!o.ok) ++failures;
    json entry;
    entry["name"] = job.name;
    entry["type"] = job.type;
    entry["status"] = o.ok ? "ok" : "error";
    if (!o.ok) entry["error"] = o.error;
    entry["files"] = o.files;
    jout.push_back(std::move(entry));
  }
  manifest["jobs"] = std::move(jout);
  write_json(outdir / "manifest.json", manifest);
  for (const JobSpec& job : jobs) {
    const JobOutcome& o = outcomes.at(job.name);
    if (!o.ok)
      std::fprintf(stderr, "job '%s' failed: %s\n", job.name.c_str(),
                   o.error.c_str());
  }
  return failures;
}

int cmd_compare(const std::vector<std::string>& dirs,
                const std::string& out_file) {
  // Aggregate trajectory CSVs by run label across directories: per label,
  // per iteration, mean and standard deviation of PE.
  std::map<std::string, std::map<int, std::vector<double>>> buckets;
  for (const std::string& dir : dirs) {
    const fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot read " + manifest_path.string());
    json manifest = json::parse(in);
    if (!manifest.contains("jobs"))
      throw IoError("manifest without jobs in " + dir);
    for (const json& job : manifest.at("jobs")) {
      const std::string type = job.value("type", "");
      if (type != "psro" && type != "global-psro") continue;
      if (job.value("status", "") != "ok") continue;
      const std::string name = job.at("name").get<std::string>();
      std::ifstream rec_in(fs::path(dir) / (name + ".json"));
      if (!rec_in) throw IoError("missing record for job " + name);
      RunRecord rec = run_from_json(json::parse(rec_in));
      for (const IterationRecord& it : rec.iterations)
        buckets[rec.label][it.iter].push_back(it.pe);
    }
  }
  if (buckets.empty()) throw IoError("no comparable runs found");
  std::ostringstream csv;
  csv << "method,iter,mean_pe,std_pe,count\n";
  for (const auto& [label, iters] : buckets) {
    for (const auto& [iter, pes] : iters) {
      double mean = 0.0;
      for (double x : pes) mean += x;
      mean /= pes.size();
      double var = 0.0;
      for (double x : pes) var += (x - mean) * (x - mean);
      var /= pes.size();
      csv << label << ',' << iter << ',' << fmt_double(mean) << ','
          << fmt_double(std::sqrt(var)) << ',' << pes.size() << '\n';
    }
  }
  if (out_file.empty()) {
    std::fputs(csv.str().c_str(), stdout);
  } else {
    write_text(out_file, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psrolab: PSRO exploration-selection laboratory"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  int max_threads = 1;
  CLI::App* run = app.add_subcommand("run", "execute a job config");
  run->add_option("config", config_path, "JSON config path")->required();
  run->add_option("--out", run_out, "output directory (default $PSROLAB_OUT)");
  run->add_option("--jobs", max_threads, "max concurrent jobs")
      ->default_val(1);

  std::vector<std::string> dirs;
  std::string compare_out;
  CLI::App* cmp = app.add_subcommand("compare", "aggregate run directories");
  cmp->add_option("dirs", dirs, "run directories")->required();
  cmp->add_option("--out", compare_out, "output CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(config_path, run_out, max_threads);
    return cmd_compare(dirs, compare_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
