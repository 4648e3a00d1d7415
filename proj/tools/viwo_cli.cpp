#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "viwo/config.hpp"
#include "viwo/dataset.hpp"
#include "viwo/evaluate.hpp"
#include "viwo/replay.hpp"
#include "viwo/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDataset = 2;
constexpr int kExitNumerical = 3;

std::string read_text(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw viwo::ConfigError("cannot open config file: " + path);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

viwo::SimConfig resolve_sim_config(const std::string &config_path,
                                   const std::string &preset) {
  if (!config_path.empty() && !preset.empty()) {
    throw viwo::ConfigError("pass either --config or --preset, not both");
  }
  if (!config_path.empty()) {
    return viwo::parse_sim_config(read_text(config_path));
  }
  if (!preset.empty()) {
    const auto cfg = viwo::sim_preset(preset);
    if (!cfg) {
      throw viwo::ConfigError("unknown preset: " + preset +
                              " (available: urban, straight, lowtexture, dynamic)");
    }
    return *cfg;
  }
  throw viwo::ConfigError("simulate needs --config or --preset");
}

int cmd_simulate(const std::string &config_path, const std::string &preset,
                 const std::string &out, bool have_seed, std::uint64_t seed,
                 bool dump) {
  if (dump) {
    viwo::SimConfig cfg;
    if (!config_path.empty() || !preset.empty()) {
      cfg = resolve_sim_config(config_path, preset);
    }
    if (have_seed) {
      viwo::set_sim_seed(cfg, seed);
    }
    std::cout << viwo::serialize_sim_config(cfg);
    return kExitOk;
  }
  viwo::SimConfig cfg = resolve_sim_config(config_path, preset);
  if (have_seed) {
    viwo::set_sim_seed(cfg, seed);
  }
  if (out.empty()) {
    throw viwo::ConfigError("simulate needs --out <dir>");
  }
  viwo::SimDataset sim;
  try {
    sim = viwo::simulate(cfg);
  } catch (const std::invalid_argument &e) {
    throw viwo::ConfigError(e.what());
  }
  viwo::write_dataset(out, sim, cfg);
  std::cout << "frames " << sim.frames.size() << "\n"
            << "imu_samples " << sim.imu.size() << "\n"
            << "wheel_samples " << sim.wheel.size() << "\n"
            << "points " << sim.world.points.size() << "\n"
            << "lines " << sim.world.lines.size() << "\n"
            << "path_length " << viwo::format_double(sim.traj.path_length())
            << "\n";
  return kExitOk;
}

int cmd_run(const std::string &config_path, const std::string &dataset,
            const std::string &out, bool have_seed, std::uint64_t seed,
            bool rematch, bool no_lines, bool no_mcc, bool no_wheel,
            bool check_psd, bool dump) {
  viwo::RunConfig cfg;
  if (!config_path.empty()) {
    cfg = viwo::parse_run_config(read_text(config_path));
  }
  if (!dataset.empty()) {
    cfg.dataset = dataset;
  }
  if (!out.empty()) {
    cfg.out = out;
  }
  if (have_seed) {
    cfg.seed = seed;
  }
  if (rematch) {
    cfg.rematch_lines = true;
  }
  if (no_lines) {
    cfg.use_lines = false;
  }
  if (no_mcc) {
    cfg.use_mcc = false;
  }
  if (no_wheel) {
    cfg.use_wheel = false;
  }
  if (check_psd) {
    cfg.check_psd = true;
  }
  if (dump) {
    std::cout << viwo::serialize_run_config(cfg);
    return kExitOk;
  }
  if (cfg.dataset.empty()) {
    throw viwo::ConfigError("run needs a dataset (--dataset or config)");
  }
  if (cfg.out.empty()) {
    throw viwo::ConfigError("run needs an output directory (--out or config)");
  }

  const viwo::Dataset ds = viwo::load_dataset(cfg.dataset);
  viwo::ReplayResult result;
  const viwo::ReplayStatus status = viwo::run_replay(ds, cfg, result);
  viwo::write_replay_outputs(cfg.out, cfg, result);
  if (status != viwo::ReplayStatus::Ok) {
    std::cerr << "error: numerical failure during replay (partial outputs in "
              << cfg.out << ")\n";
    return kExitNumerical;
  }
  std::cout << "frames " << result.stats.frames << "\n"
            << "point_tracks " << result.stats.point_tracks << "\n"
            << "line_tracks " << result.stats.line_tracks << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string &est_path, const std::string &gt_path,
                 const std::string &out) {
  const std::vector<viwo::TumPose> est = viwo::load_tum(est_path);
  const std::vector<viwo::TumPose> gt = viwo::load_tum(gt_path);
  viwo::AteReport report;
  if (viwo::evaluate_ate(est, gt, report) != viwo::AteStatus::Ok) {
    std::cerr << "error: fewer than 10 timestamp-associated pose pairs\n";
    return kExitDataset;
  }
  std::string text;
  text += "pairs " + std::to_string(report.pairs) + "\n";
  text += "rmse_pos " + viwo::format_double(report.rmse_pos) + "\n";
  text += "rmse_rot_deg " + viwo::format_double(report.rmse_rot_deg) + "\n";
  std::cout << text;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(out + "/ate.txt", std::ios::binary);
    f << text;
  }
  return kExitOk;
}

struct SweepRow {
  std::uint64_t seed = 0;
  std::string status = "ok";
  long frames = 0;
  long pairs = 0;
  double rmse_pos = 0.0;
  double rmse_rot_deg = 0.0;
};

int cmd_sweep(const std::string &config_path, const std::string &preset,
              const std::string &out, std::uint64_t base_seed, int count,
              int jobs) {
  if (out.empty()) {
    throw viwo::ConfigError("sweep needs --out <dir>");
  }
  if (count < 1) {
    throw viwo::ConfigError("sweep needs --runs >= 1");
  }
  viwo::RunConfig run_cfg;
  if (!config_path.empty()) {
    run_cfg = viwo::parse_run_config(read_text(config_path));
  }
  const viwo::SimConfig sim_base = [&] {
    const auto cfg = viwo::sim_preset(preset.empty() ? "urban" : preset);
    if (!cfg) {
      throw viwo::ConfigError("unknown preset: " + preset);
    }
    return *cfg;
  }();

  std::vector<SweepRow> rows(static_cast<size_t>(count));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string fail_msg;
  std::mutex fail_mutex;

  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count || failed.load()) {
        return;
      }
      SweepRow &row = rows[static_cast<size_t>(i)];
      row.seed = base_seed + static_cast<std::uint64_t>(i);
      try {
        viwo::SimConfig sim_cfg = sim_base;
        viwo::set_sim_seed(sim_cfg, row.seed);
        const viwo::SimDataset sim = viwo::simulate(sim_cfg);
        const viwo::Dataset ds = viwo::make_dataset(sim, sim_cfg);
        viwo::RunConfig cfg = run_cfg;
        cfg.seed = row.seed;
        viwo::ReplayResult result;
        if (viwo::run_replay(ds, cfg, result) != viwo::ReplayStatus::Ok) {
          row.status = "numerical_failure";
          continue;
        }
        row.frames = result.stats.frames;
        viwo::AteReport report;
        if (viwo::evaluate_ate(result.est, ds.gt, report) != viwo::AteStatus::Ok) {
          row.status = "insufficient_overlap";
          continue;
        }
        row.pairs = report.pairs;
        row.rmse_pos = report.rmse_pos;
        row.rmse_rot_deg = report.rmse_rot_deg;
      } catch (const std::exception &e) {
        const std::lock_guard<std::mutex> lock(fail_mutex);
        failed.store(true);
        fail_msg = e.what();
        return;
      }
    }
  };

  int n_threads = jobs;
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  n_threads = std::max(1, std::min(n_threads, count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int i = 0; i < n_threads; i++) {
    pool.emplace_back(worker);
  }
  for (auto &th : pool) {
    th.join();
  }
  if (failed.load()) {
    throw viwo::ConfigError("sweep worker failed: " + fail_msg);
  }

  std::string csv = "# seed,status,frames,pairs,rmse_pos,rmse_rot_deg\n";
  double sum_pos = 0.0;
  double sum_rot = 0.0;
  double max_pos = 0.0;
  long ok = 0;
  for (const SweepRow &row : rows) {
    csv += std::to_string(row.seed) + "," + row.status + "," +
           std::to_string(row.frames) + "," + std::to_string(row.pairs) + "," +
           viwo::format_double(row.rmse_pos) + "," +
           viwo::format_double(row.rmse_rot_deg) + "\n";
    if (row.status == "ok") {
      ok++;
      sum_pos += row.rmse_pos;
      sum_rot += row.rmse_rot_deg;
      max_pos = std::max(max_pos, row.rmse_pos);
    }
  }
  std::filesystem::create_directories(out);
  {
    std::ofstream f(out + "/summary.csv", std::ios::binary);
    f << csv;
  }
  std::string text;
  text += "runs " + std::to_string(count) + "\n";
  text += "ok " + std::to_string(ok) + "\n";
  text += "mean_rmse_pos " +
          viwo::format_double(ok > 0 ? sum_pos / static_cast<double>(ok) : 0.0) +
          "\n";
  text += "max_rmse_pos " + viwo::format_double(max_pos) + "\n";
  text += "mean_rmse_rot_deg " +
          viwo::format_double(ok > 0 ? sum_rot / static_cast<double>(ok) : 0.0) +
          "\n";
  {
    std::ofstream f(out + "/summary.txt", std::ios::binary);
    f << text;
  }
  std::cout << text;
  return ok == count ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Visual-inertial-wheel odometry: simulate, replay, evaluate"};
  app.require_subcommand(1);

  std::string config_path, preset, dataset, out, est_path, gt_path;
  std::uint64_t seed = 1;
  bool rematch = false, no_lines = false, no_mcc = false, no_wheel = false;
  bool check_psd = false, dump = false;
  int runs = 10;
  int jobs = 0;

  CLI::App *sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", config_path, "Simulation config (json)");
  sim->add_option("--preset", preset, "Scene preset: urban, straight, lowtexture, dynamic");
  CLI::Option *sim_seed = sim->add_option("--seed", seed, "Simulation seed");
  sim->add_option("--out", out, "Output dataset directory");
  sim->add_flag("--dump-default-config", dump, "Print the effective config and exit");

  CLI::App *run = app.add_subcommand("run", "Replay a dataset through the filter");
  run->add_option("--config", config_path, "Run config (json)");
  run->add_option("--dataset", dataset, "Dataset directory (overrides config)");
  run->add_option("--out", out, "Output directory (overrides config)");
  CLI::Option *run_seed = run->add_option("--seed", seed, "Run seed");
  run->add_flag("--rematch-lines", rematch, "Ignore segment ids; match via shared points");
  run->add_flag("--no-lines", no_lines, "Disable the line pipeline");
  run->add_flag("--no-mcc", no_mcc, "Disable the motion consistency check");
  run->add_flag("--no-wheel", no_wheel, "Disable wheel updates");
  run->add_flag("--check-psd", check_psd, "Track the covariance spectrum");
  run->add_flag("--dump-default-config", dump, "Print the effective config and exit");

  CLI::App *eval = app.add_subcommand("evaluate", "Trajectory error after rigid alignment");
  eval->add_option("--est", est_path, "Estimated trajectory (TUM)")->required();
  eval->add_option("--gt", gt_path, "Ground-truth trajectory (TUM)")->required();
  eval->add_option("--out", out, "Report directory (optional)");

  CLI::App *sweep = app.add_subcommand("sweep", "Monte-Carlo batch: simulate+run+evaluate per seed");
  sweep->add_option("--config", config_path, "Run config (json)");
  sweep->add_option("--preset", preset, "Scene preset (default: urban)");
  sweep->add_option("--seed", seed, "Base seed (runs use seed..seed+runs-1)");
  sweep->add_option("--runs", runs, "Number of seeds");
  sweep->add_option("--jobs", jobs, "Worker threads (default: hardware)");
  sweep->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(config_path, preset, out, sim_seed->count() > 0, seed, dump);
    }
    if (run->parsed()) {
      return cmd_run(config_path, dataset, out, run_seed->count() > 0, seed,
                     rematch, no_lines, no_mcc, no_wheel, check_psd, dump);
    }
    if (eval->parsed()) {
      return cmd_evaluate(est_path, gt_path, out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(config_path, preset, out, seed, runs, jobs);
    }
  } catch (const viwo::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const viwo::DatasetError &e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitDataset;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitDataset;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
