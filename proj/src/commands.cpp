#include "softwrist/commands.hpp"

#include "softwrist/config.hpp"
#include "softwrist/errors.hpp"
#include "softwrist/svg_plot.hpp"
#include "softwrist/trace_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace softwrist::cli {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::string(env);
  return std::nullopt;
}

RunConfig load(const CommonOptions& c, std::vector<std::string> extra, bool use_env = true) {
  std::vector<std::string> overrides = c.overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (c.seed) overrides.push_back("scenario.seed=" + std::to_string(*c.seed));
  return load_config(use_env ? resolve_config_path(c.config) : c.config, overrides);
}

struct OutputDir {
  fs::path root;
  explicit OutputDir(const std::string& dir) : root(dir) {
    for (const char* sub : {"traces", "models", "plots"}) fs::create_directories(root / sub);
  }
  std::string operator()(const std::string& rel) const { return (root / rel).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

// Maps library errors onto the exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << '\n';
    return kMissingArtifact;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidParameter& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const TrainingFailure& e) {
    err << "training diverged at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

PlotSeries series(const std::string& label, const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color) {
  return {label, x, y, color};
}

void plot_single(const SimulationTrace& tr, const OutputDir& dir, const std::string& prefix) {
  PlotSpec err_plot{"Tracking error (" + tr.controller + ")", "time [s]", "e [rad]",
                    {series("e", tr.t, tr.e, "#d62728")}};
  write_svg(err_plot, dir("plots/" + prefix + "error.svg"));
  PlotSpec theta_plot{"Bending angle (" + tr.controller + ")", "time [s]", "theta [rad]",
                      {series("theta_des", tr.t, tr.theta_des, "#7f7f7f"), series("theta_o", tr.t, tr.theta_o, "#1f77b4")}};
  write_svg(theta_plot, dir("plots/" + prefix + "theta.svg"));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4e", v);
  return buf;
}

std::string settling(const Metrics& m) { return m.settling_time ? fmt(*m.settling_time) : "unsettled"; }

std::string comparison_text(const ComparisonReport& rep) {
  std::ostringstream os;
  auto block = [&](const std::string& name, const Metrics& m, const SimulationTrace& tr) {
    os << name << ".gains = " << tr.gains << '\n';
    os << name << ".failed = " << (m.failed ? "true" : "false") << '\n';
    os << name << ".rmse_rad = " << format_double(m.rmse) << '\n';
    os << name << ".settling_time_s = "
       << (m.settling_time ? format_double(*m.settling_time) : std::string("unsettled")) << '\n';
    os << name << ".steady_state_error_rad = " << format_double(m.steady_state_error) << '\n';
  };
  os << "scenario_hash = " << rep.left_trace.scenario_hash << '\n';
  block(rep.left_label, rep.left, rep.left_trace);
  block(rep.right_label, rep.right, rep.right_trace);
  for (const auto& r : rep.rows) {
    const std::string winner = r.verdict == "left" ? rep.left_label : r.verdict == "right" ? rep.right_label : "tie";
    os << "lower." << r.metric << " = " << winner << '\n';
  }
  return os.str();
}

void plot_comparison(const ComparisonReport& rep, const OutputDir& dir, const std::string& name) {
  PlotSpec p{"Tracking error", "time [s]", "e [rad]",
             {series(rep.left_label, rep.left_trace.t, rep.left_trace.e, "#1f77b4"),
              series(rep.right_label, rep.right_trace.t, rep.right_trace.e, "#ff7f0e")}};
  write_svg(p, dir("plots/" + name));
}

ComparisonReport run_comparison(const RunConfig& cfg, const OutputDir& dir) {
  ComparisonReport rep = compare_smc_pid(cfg.scenario);
  write_trace_csv(rep.left_trace, dir("traces/smc.csv"));
  write_trace_csv(rep.right_trace, dir("traces/pid.csv"));
  plot_comparison(rep, dir, "error.svg");
  write_text(dir("metrics.txt"), comparison_text(rep));
  return rep;
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::string> extra;
    if (opt.controller) extra.push_back("scenario.controller=\"" + *opt.controller + "\"");
    if (opt.direction) extra.push_back("scenario.direction=\"" + *opt.direction + "\"");
    RunConfig cfg = load(opt.common, extra);
    load_ik_model(cfg);
    const OutputDir dir(opt.common.out);
    write_config_echo(cfg, dir("config.json"));
    const SimulationTrace tr = run_episode(cfg.scenario);
    write_trace_csv(tr, dir("traces/trace.csv"));
    plot_single(tr, dir, "");
    const Metrics m = compute_metrics(tr, cfg.scenario.target);
    write_text(dir("metrics.txt"), metrics_text(m, tr, cfg.scenario.target));
    for (const auto& w : tr.warnings) err << "warning: " << w << '\n';
    out << tr.controller << ' ' << to_string(cfg.scenario.direction) << ": rmse " << fmt(m.rmse) << " rad, settling "
        << settling(m) << " s, sse " << fmt(m.steady_state_error) << " rad\n";
    if (tr.failed) {
      err << "simulation failed: " << tr.failure << '\n';
      return static_cast<int>(kRuntimeError);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_train_ik(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opt.common, {});
    const OutputDir dir(opt.common.out);
    write_config_echo(cfg, dir("config.json"));
    const IkDataset data = generate_dataset_parallel(cfg.scenario.wrist, cfg.dataset);
    const TrainingResult res = train(data, cfg.training);
    const std::string model = opt.model_path.value_or(dir("models/ik_model.json"));
    if (const fs::path parent = fs::path(model).parent_path(); !parent.empty()) fs::create_directories(parent);
    save_network(res.network, model);
    write_training_report_csv(res.report, dir("models/training_report.csv"));
    std::ostringstream m;
    const auto& r = res.report;
    m << "model = " << model << '\n';
    m << "epochs = " << r.epochs.size() << '\n';
    if (!r.epochs.empty()) {
      m << "final_train_loss = " << format_double(r.epochs.back().train_loss) << '\n';
      m << "final_validation_loss = " << format_double(r.epochs.back().validation_loss) << '\n';
    }
    m << "validation_rmse_rad = " << format_double(r.validation_rmse) << '\n';
    m << "accuracy_percent = " << format_double(r.accuracy) << '\n';
    m << "linear_baseline_rmse_rad = " << format_double(r.baseline_rmse) << '\n';
    m << "final_gradient_norm = " << format_double(r.final_gradient_norm) << '\n';
    write_text(dir("metrics.txt"), m.str());
    out << "trained " << r.epochs.size() << " epochs: validation rmse " << fmt(r.validation_rmse)
        << " rad (linear baseline " << fmt(r.baseline_rmse) << "), model " << model << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_tune(const TuneOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load(opt.common, {});
    load_ik_model(cfg);
    const OutputDir dir(opt.common.out);
    write_config_echo(cfg, dir("config.json"));
    const Scenario s = tuning_scenario(cfg);
    const TuningResult res =
        pso_tune(cfg.pso, s, opt.serial ? SwarmEvaluation::kSerial : SwarmEvaluation::kParallel);
    const CostBreakdown baseline = tuning_cost(cfg.pso.initial, s, cfg.pso.weights);
    write_tuning_history_csv(res, dir("traces/tuning_history.csv"));
    nlohmann::json gains = {{"P1", res.best.P1}, {"P2", res.best.P2}, {"P3", res.best.P3}};
    write_text(dir("models/best_gains.json"), gains.dump(2) + "\n");
    std::ostringstream m;
    m << "best_P1 = " << format_double(res.best.P1) << '\n';
    m << "best_P2 = " << format_double(res.best.P2) << '\n';
    m << "best_P3 = " << format_double(res.best.P3) << '\n';
    m << "best_cost = " << format_double(res.best_cost) << '\n';
    m << "initial_cost = " << format_double(baseline.cost) << '\n';
    m << "evaluations = " << res.evaluations << '\n';
    write_text(dir("metrics.txt"), m.str());
    out << "best gains P1=" << fmt(res.best.P1) << " P2=" << fmt(res.best.P2) << " P3=" << fmt(res.best.P3)
        << " cost " << fmt(res.best_cost) << " (initial " << fmt(baseline.cost) << ")\n";
    return static_cast<int>(kOk);
  });
}

int cmd_compare(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<std::string> extra;
    if (opt.direction) extra.push_back("scenario.direction=\"" + *opt.direction + "\"");
    RunConfig cfg = load(opt.common, extra);
    load_ik_model(cfg);
    const OutputDir dir(opt.common.out);
    write_config_echo(cfg, dir("config.json"));
    const ComparisonReport rep = run_comparison(cfg, dir);
    out << comparison_text(rep);
    return static_cast<int>(rep.left.failed || rep.right.failed ? kRuntimeError : kOk);
  });
}

int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.table.has_value() == opt.figure.has_value()) {
    err << "reproduce needs exactly one of --table smc-vs-pid or --figure error-ulnar\n";
    return kConfigError;
  }
  if (opt.table && *opt.table != "smc-vs-pid") {
    err << "unknown table '" << *opt.table << "' (available: smc-vs-pid)\n";
    return kConfigError;
  }
  if (opt.figure && *opt.figure != "error-ulnar") {
    err << "unknown figure '" << *opt.figure << "' (available: error-ulnar)\n";
    return kConfigError;
  }
  return guarded(err, [&] {
    // The bundled defaults, unless a file is named explicitly.
    RunConfig cfg = load(opt.common, {}, false);
    load_ik_model(cfg);
    const OutputDir dir(opt.common.out);
    write_config_echo(cfg, dir("config.json"));
    if (opt.table) {
      const ComparisonReport rep = run_comparison(cfg, dir);
      char line[160];
      std::snprintf(line, sizeof line, "%-24s %-12s %-12s %-12s %-12s\n", "metric", "smc", "pid", "ref_smc",
                    "ref_pid");
      out << line;
      auto emit = [&](const char* name, const std::string& a, const std::string& b, double pa, double pb) {
        std::snprintf(line, sizeof line, "%-24s %-12s %-12s %-12s %-12s\n", name, a.c_str(), b.c_str(),
                      fmt(pa).c_str(), fmt(pb).c_str());
        out << line;
      };
      emit("rmse_rad", fmt(rep.left.rmse), fmt(rep.right.rmse), kReferenceSmc.rmse, kReferencePid.rmse);
      emit("settling_time_s", settling(rep.left), settling(rep.right), kReferenceSmc.settling_time,
           kReferencePid.settling_time);
      emit("steady_state_error_rad", fmt(rep.left.steady_state_error), fmt(rep.right.steady_state_error),
           kReferenceSmc.steady_state_error, kReferencePid.steady_state_error);
      return static_cast<int>(rep.left.failed || rep.right.failed ? kRuntimeError : kOk);
    }
    Scenario s = cfg.scenario;
    s.controller = ControllerKind::kSmc;
    s.direction = Direction::kUlnar;
    const SimulationTrace tr = run_episode(s);
    write_trace_csv(tr, dir("traces/error_ulnar.csv"));
    PlotSpec p{"Error in angle, SMC, ulnar deviation", "time [s]", "e [rad]", {series("e", tr.t, tr.e, "#d62728")}};
    write_svg(p, dir("plots/error_ulnar.svg"));
    const Metrics m = compute_metrics(tr, s.target);
    write_text(dir("metrics.txt"), metrics_text(m, tr, s.target));
    out << "smc ulnar: rmse " << fmt(m.rmse) << " rad (reference " << fmt(kReferenceSmc.rmse) << "), sse "
        << fmt(m.steady_state_error) << " rad (reference " << fmt(kReferenceSmc.steady_state_error) << "), figure "
        << dir("plots/error_ulnar.svg") << '\n';
    return static_cast<int>(tr.failed ? kRuntimeError : kOk);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft continuum wrist simulation, control and tuning"};
  app.require_subcommand(1);

  auto common = [](CLI::App* sub, CommonOptions& c) {
    sub->add_option("-c,--config", c.config, std::string("JSON configuration (default: $") + kConfigEnvVar +
                                                 ", then built-in defaults)");
    sub->add_option("--set", c.overrides, "override a key, e.g. --set scenario.duration_s=2");
    sub->add_option("-o,--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--seed", c.seed, "scenario seed");
  };

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "run one closed-loop episode");
  common(simulate, sim.common);
  simulate->add_option("--controller", sim.controller, "smc or pid");
  simulate->add_option("--direction", sim.direction, "ulnar, radial, flexion or extension");

  TrainOptions tr;
  auto* train_ik = app.add_subcommand("train-ik", "generate the IK dataset and train the network");
  common(train_ik, tr.common);
  train_ik->add_option("--model", tr.model_path, "model file (default <out>/models/ik_model.json)");

  TuneOptions tu;
  auto* tune = app.add_subcommand("tune", "particle swarm search over the SMC gains");
  common(tune, tu.common);
  tune->add_flag("--serial", tu.serial, "evaluate the swarm on one thread");

  SimulateOptions cmp;
  auto* compare = app.add_subcommand("compare", "SMC and PID on the same scenario");
  common(compare, cmp.common);
  compare->add_option("--direction", cmp.direction, "ulnar, radial, flexion or extension");

  ReproduceOptions rep;
  rep.common.out = "reproduce";
  auto* reproduce = app.add_subcommand("reproduce", "regenerate the SMC/PID table or the ulnar error figure");
  common(reproduce, rep.common);
  reproduce->add_option("--table", rep.table, "smc-vs-pid");
  reproduce->add_option("--figure", rep.figure, "error-ulnar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (*simulate) return cmd_simulate(sim, out, err);
  if (*train_ik) return cmd_train_ik(tr, out, err);
  if (*tune) return cmd_tune(tu, out, err);
  if (*compare) return cmd_compare(cmp, out, err);
  return cmd_reproduce(rep, out, err);
}

}  // namespace softwrist::cli
