#include "vbd/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <map>
#include <stdexcept>

#include <CLI11.hpp>

#include "vbd/analysis.hpp"
#include "vbd/calibrate.hpp"
#include "vbd/csv.hpp"
#include "vbd/reproduction.hpp"
#include "vbd/serialize.hpp"
#include "vbd/trajectory.hpp"

namespace vbd::cli {

namespace fs = std::filesystem;

namespace {

/// Bad input that is not a parameter-range problem (paths, existing files).
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ModelParams resolve_params(const RunConfig& cfg) {
  return cfg.params_path ? load_params(*cfg.params_path) : ModelParams{};
}

/// Creates the output directory and refuses to clobber existing outputs
/// unless --force was given.
void prepare_outputs(const RunConfig& cfg, const std::vector<std::string>& files) {
  for (const auto& f : files) {
    const fs::path p = cfg.out_dir / f;
    if (fs::exists(p) && !cfg.force)
      throw UserError(p.string() + " exists; pass --force to overwrite");
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw UserError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
}

template <class Writer>
void write_text(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot open " + path.string() + " for writing");
  writer(out);
  if (!out) throw UserError("failed writing " + path.string());
}

Dataset load_dataset(const RunConfig& cfg) {
  if (!cfg.dataset_path) throw UserError("--dataset is required");
  if (!fs::exists(*cfg.dataset_path)) throw UserError("dataset " + cfg.dataset_path->string() + " not found");
  Dataset ds = read_csv(*cfg.dataset_path);
  if (ds.empty()) throw UserError("dataset " + cfg.dataset_path->string() + " has a header but no rows");
  return ds;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void apply_config_file(const fs::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UserError("malformed config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw UserError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "params") cfg.params_path = v.get<std::string>();
      else if (key == "out") cfg.out_dir = v.get<std::string>();
      else if (key == "dataset") cfg.dataset_path = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "days") cfg.days = v.get<double>();
      else if (key == "starts") cfg.starts = v.get<std::size_t>();
      else if (key == "noise_diabetic") cfg.noise_diabetic = v.get<double>();
      else if (key == "noise_nondiabetic") cfg.noise_nondiabetic = v.get<double>();
      else if (key == "init_frac_d") cfg.initial.diabetic = v.get<double>();
      else if (key == "init_frac_nd") cfg.initial.nondiabetic = v.get<double>();
      else if (key == "init_frac_v") cfg.initial.vector = v.get<double>();
      else if (key == "free") cfg.free_parameters = v.get<std::vector<std::string>>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "force") cfg.force = v.get<bool>();
      else if (key == "quiet") cfg.quiet = v.get<bool>();
      else if (key == "timestamp") cfg.timestamp = v.get<bool>();
      else throw UserError("unknown config key '" + key + "'");
    } catch (const Json::type_error&) {
      throw UserError("config key '" + key + "' has the wrong type");
    }
  }
}

// Daily output is kept in memory, so the horizon is capped.
void check_days(double days) {
  if (!(days >= 1.0 && days <= 1e6)) throw InvalidParameter("days", "must lie in [1, 1e6]");
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = resolve_params(cfg);
  check_days(cfg.days);
  prepare_outputs(cfg, {"trajectory.csv", "summary.json"});

  const Trajectory traj = integrate(params, initial_state(params, cfg.initial), 0.0, cfg.days);
  const Dataset noiseless = observe(traj, NoiseConfig{0.0, 0.0, cfg.seed});
  const AnalysisReport report = summarize(traj, noiseless, params);

  write_text(cfg.out_dir / "trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(traj, o); });
  Json summary = report_to_json(report);
  summary["params"] = params_to_json(params);
  summary["initial_state"] = state_to_json(traj[0]);
  write_json(summary, cfg.out_dir / "summary.json");
  if (!cfg.quiet) {
    out << "simulated " << traj.size() << " daily samples; peak prevalence diabetic "
        << report.summary.peak_prevalence_d << ", non-diabetic " << report.summary.peak_prevalence_nd << '\n';
  }
  return kSuccess;
}

int cmd_r0(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = resolve_params(cfg);
  prepare_outputs(cfg, {"r0.json", "r0_seasonal.csv"});
  // One seasonal year sampled daily.
  const R0Report report = make_r0_report(params, 0.0, 364.0, 1.0);
  write_json(r0_report_to_json(report), cfg.out_dir / "r0.json");
  write_text(cfg.out_dir / "r0_seasonal.csv", [&](std::ostream& o) { write_seasonal_csv(report.seasonal, o); });
  if (!cfg.quiet) {
    out << "R0 (effective) " << report.r0_effective.value << ", R0 (NGM) " << report.r0_ngm
        << ", seasonal range [" << report.seasonal.effective.min << ", " << report.seasonal.effective.max
        << "]\n";
  }
  return kSuccess;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = resolve_params(cfg);
  const NoiseConfig noise{cfg.noise_diabetic, cfg.noise_nondiabetic, cfg.seed};
  validate(noise);
  check_days(cfg.days);
  prepare_outputs(cfg, {"dataset.csv", "dataset.meta.json"});

  const Dataset ds = generate_dataset(params, initial_state(params, cfg.initial), cfg.days, noise);
  write_csv(ds, cfg.out_dir / "dataset.csv");
  const auto stamp = cfg.timestamp ? std::optional<std::string>(utc_timestamp()) : std::nullopt;
  write_json(dataset_meta_to_json(*ds.provenance, stamp), meta_path_for(cfg.out_dir / "dataset.csv"));
  if (!cfg.quiet) out << "wrote " << ds.size() << " rows to " << (cfg.out_dir / "dataset.csv").string() << '\n';
  return kSuccess;
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out) {
  const ModelParams fixed = resolve_params(cfg);
  const Dataset ds = load_dataset(cfg);

  FitSpec spec;
  spec.free.clear();
  for (const auto& name : cfg.free_parameters) {
    FreeParameter p;
    try {
      p = parse_free_parameter(name);
    } catch (const std::invalid_argument& e) {
      throw UserError(e.what());
    }
    spec.free.push_back(default_bound(p));
  }
  spec.n_starts = cfg.starts;
  spec.seed = cfg.seed;
  spec.initial = cfg.initial;
  spec.threads = cfg.threads;
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw UserError(e.what());
  }
  prepare_outputs(cfg, {"fit.json", "fit_curves.csv"});

  const FitResult fit = multi_start_calibrate(ds, fixed, spec);
  Json j = fit_result_to_json(fit);
  j["seed"] = cfg.seed;
  j["n_starts"] = spec.n_starts;
  write_json(j, cfg.out_dir / "fit.json");
  const ConfidenceBands bands = confidence_bands(fit, ds, fixed);
  write_text(cfg.out_dir / "fit_curves.csv", [&](std::ostream& o) { write_bands_csv(bands, o); });
  if (!cfg.quiet) {
    out << "best loss " << fit.best_loss << " from start " << fit.best_start << ':';
    for (std::size_t i = 0; i < fit.parameters.size(); ++i)
      out << ' ' << to_string(fit.parameters[i]) << '=' << fit.best[i];
    out << '\n';
    for (const auto& w : fit.warnings) out << "warning: " << w << '\n';
  }
  return kSuccess;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const ModelParams params = resolve_params(cfg);
  const Dataset ds = load_dataset(cfg);
  if (ds.size() < 3) throw UserError("dataset needs at least 3 rows for analysis");
  prepare_outputs(cfg, {"report.json", "correlation.csv", "prevalence.csv"});

  const Trajectory traj = to_trajectory(ds);
  const AnalysisReport report = summarize(traj, ds, params);
  write_json(report_to_json(report), cfg.out_dir / "report.json");
  write_text(cfg.out_dir / "correlation.csv", [&](std::ostream& o) { write_correlation_csv(report.correlation, o); });
  write_text(cfg.out_dir / "prevalence.csv", [&](std::ostream& o) { write_prevalence_csv(report, o); });
  if (!cfg.quiet) {
    out << "analyzed " << ds.size() << " rows; odds ratio range ["
        << report.summary.odds_ratio_min.value_or(std::nan("")) << ", "
        << report.summary.odds_ratio_max.value_or(std::nan("")) << "]\n";
  }
  return kSuccess;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-host vector-borne disease simulator and calibration toolkit", "vbdsim"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, params_path, out_dir, dataset_path;
  std::uint64_t seed = 0;
  double days = 0.0, noise_d = 0.0, noise_nd = 0.0;
  std::size_t starts = 0;
  unsigned threads = 0;
  std::vector<std::string> free_names;
  bool force = false, quiet = false, timestamp = false;

  struct Handles {
    CLI::Option *config, *params, *out, *seed, *days, *dataset, *starts, *noise_d, *noise_nd, *free, *threads;
  };
  std::map<std::string, Handles> handles;

  const auto add_common = [&](CLI::App* sub) {
    Handles h{};
    h.config = sub->add_option("--config", config_path, "JSON file with option defaults");
    h.params = sub->add_option("--params", params_path, "model parameter JSON");
    h.out = sub->add_option("--out", out_dir, "output directory");
    h.seed = sub->add_option("--seed", seed, "random seed");
    h.days = sub->add_option("--days", days, "simulation length in days");
    h.dataset = sub->add_option("--dataset", dataset_path, "dataset CSV");
    h.starts = sub->add_option("--starts", starts, "multi-start count");
    h.noise_d = sub->add_option("--noise-d", noise_d, "relative noise, diabetic series");
    h.noise_nd = sub->add_option("--noise-nd", noise_nd, "relative noise, non-diabetic series");
    h.free = sub->add_option("--free", free_names, "free parameters for calibration");
    h.threads = sub->add_option("--threads", threads, "worker threads for calibration");
    sub->add_flag("--force", force, "overwrite existing outputs");
    sub->add_flag("--quiet", quiet, "suppress progress output");
    sub->add_flag("--timestamp", timestamp, "record creation time in dataset metadata");
    handles[sub->get_name()] = h;
  };
  for (const char* name : {"simulate", "r0", "generate", "calibrate", "analyze"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
  }
  app.get_subcommand("simulate")->description("integrate the model and summarize the trajectory");
  app.get_subcommand("r0")->description("reproduction numbers and their seasonal series");
  app.get_subcommand("generate")->description("synthetic noisy dataset");
  app.get_subcommand("calibrate")->description("multi-start fit of free parameters to a dataset");
  app.get_subcommand("analyze")->description("prevalence, odds ratio and correlation report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  const Handles& h = handles[cfg.command];
  try {
    if (h.config->count()) apply_config_file(config_path, cfg);
    if (h.params->count()) cfg.params_path = params_path;
    if (h.out->count()) cfg.out_dir = out_dir;
    if (h.dataset->count()) cfg.dataset_path = dataset_path;
    if (h.seed->count()) cfg.seed = seed;
    if (h.days->count()) cfg.days = days;
    if (h.starts->count()) cfg.starts = starts;
    if (h.noise_d->count()) cfg.noise_diabetic = noise_d;
    if (h.noise_nd->count()) cfg.noise_nondiabetic = noise_nd;
    if (h.free->count()) cfg.free_parameters = free_names;
    if (h.threads->count()) cfg.threads = threads;
    cfg.force = cfg.force || force;
    cfg.quiet = cfg.quiet || quiet;
    cfg.timestamp = cfg.timestamp || timestamp;

    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "r0") return cmd_r0(cfg, out);
    if (cfg.command == "generate") return cmd_generate(cfg, out);
    if (cfg.command == "calibrate") return cmd_calibrate(cfg, out);
    return cmd_analyze(cfg, out);
  } catch (const InvalidParameter& e) {
    err << "error: invalid parameter " << e.what() << '\n';
    return kUserError;
  } catch (const csv::ParseError& e) {
    err << "error: dataset schema: " << e.what() << '\n';
    return kUserError;
  } catch (const UserError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const IntegrationError& e) {
    err << "error: integration failed at t=" << e.last_good_time() << ": " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const CalibrationError& e) {
    err << "error: calibration failed: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace vbd::cli
