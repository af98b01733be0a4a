// haptic: command-line front end for fitting, headless sessions, the live
// service and plant checks.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "haptic/control/controller.hpp"
#include "haptic/core/error.hpp"
#include "haptic/core/format.hpp"
#include "haptic/gateway/service.hpp"
#include "haptic/gateway/wire.hpp"
#include "haptic/plant/plant.hpp"
#include "haptic/psychophysics/io.hpp"
#include "haptic/session/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace haptic;

namespace {

json read_json_file(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::not_found, "config file not found: " + path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json_file(path); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path);
  out << text;
}

// ---- fit ----

struct FitArgs {
  std::vector<std::string> files;
  double reference = 2.0;
  std::string out_dir;
  std::string config;
};

int run_fit(const FitArgs& a) {
  using namespace psychophysics;
  const json cfg = load_config(a.config);
  FitOptions options;
  if (cfg.contains("fit")) {
    const json& f = cfg.at("fit");
    options.k_min = f.value("k_min", options.k_min);
    options.k_max = f.value("k_max", options.k_max);
    options.bracket_samples = f.value("bracket_samples", options.bracket_samples);
  }
  const Pressure ref = Pressure::psi(a.reference);

  std::vector<PsychometricFit> fits;
  std::vector<std::string> labels;
  std::vector<ResponseLedger> ledgers;
  json subjects = json::array();
  for (const std::string& path : a.files) {
    ResponseLedger ledger = read_response_csv_file(path, ref);
    const auto points = tally(ledger);
    PsychometricFit fit = fit_sigmoid(points, ref, options);
    const std::string label = fs::path(path).stem().string();
    subjects.push_back(fit_report_json(label, fit));
    fits.push_back(fit);
    labels.push_back(label);
    ledgers.push_back(std::move(ledger));
  }

  const CohortSummary summary = aggregate(fits, ref, labels);
  json report;
  report["reference_psi"] = a.reference;
  report["subjects"] = subjects;
  report["mean"] = {{"k", summary.mean.k}, {"jnd_psi", summary.mean.jnd_psi}, {"weber_pct", summary.mean.weber_pct}};
  report["stdev"] = {{"k", summary.stdev.k}, {"jnd_psi", summary.stdev.jnd_psi}, {"weber_pct", summary.stdev.weber_pct}};
  report["pooled"] = summary.pooled_fit ? fit_report_json("pooled", *summary.pooled_fit) : json(nullptr);
  try {
    const BiasReport b = bias_report(std::span<const ResponseLedger>(ledgers));
    report["bias"] = {{"first_pct", b.first_pct}, {"second_pct", b.second_pct}, {"probes", b.probes}};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_bias_probes) throw;
    report["bias"] = nullptr;
  }

  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    const double lo = a.reference * 0.5;
    const double hi = a.reference * 1.5;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      std::ofstream curve(fs::path(a.out_dir) / (labels[i] + "_curve.csv"));
      write_curve_csv(curve, fits[i], lo, hi);
      std::ofstream pts(fs::path(a.out_dir) / (labels[i] + "_points.csv"));
      write_points_csv(pts, fits[i]);
    }
    if (summary.pooled_fit) {
      write_text((fs::path(a.out_dir) / "cohort.svg").string(),
                 render_cohort_svg(fits, *summary.pooled_fit, lo, hi));
    }
    write_text((fs::path(a.out_dir) / "report.json").string(), report.dump(2) + "\n");
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

// ---- simulate-responses ----

struct SimArgs {
  double k = 4.678;
  double reference = 2.0;
  int reps = 10;
  int bias_reps = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimArgs& a) {
  using namespace psychophysics;
  const auto tests = standard_test_pressures();
  const TrialSchedule schedule = build_schedule(Pressure::psi(a.reference), tests, a.reps, a.bias_reps, Seed{a.seed});
  Rng rng = Rng(Seed{a.seed}).split(streams::responses);
  const ResponseLedger ledger = simulate_responses(schedule, a.k, rng);
  if (a.out.empty()) {
    write_response_csv(std::cout, ledger);
  } else {
    std::ofstream out(a.out);
    write_response_csv(out, ledger);
  }
  return 0;
}

// ---- session ----

struct SessionArgs {
  std::string task;
  std::string config;
  std::string teacher = "oracle";
  std::uint64_t seed = 7;
  std::string out;
  std::string frames;
  std::string emit_script;
};

std::unique_ptr<session::Teacher> make_teacher(const std::string& source, const session::Task& task) {
  using session::OracleTeacher;
  if (source == "oracle") return std::make_unique<OracleTeacher>(OracleTeacher::Mode::withheld);
  if (source == "oracle:full") return std::make_unique<OracleTeacher>(OracleTeacher::Mode::full);
  if (source.rfind("oracle:segment:", 0) == 0) {
    const int id = std::stoi(source.substr(15));
    return std::make_unique<OracleTeacher>(OracleTeacher::Mode::segment, id);
  }
  if (source == "feedback") return std::make_unique<session::FeedbackTeacher>();
  if (source.rfind("script:", 0) == 0) {
    const auto commands = gateway::load_command_script(source.substr(7));
    return std::make_unique<session::ScriptTeacher>(gateway::script_teacher(commands, task));
  }
  throw Error(ErrorCode::invalid_argument,
              "unknown teacher '" + source + "' (oracle, oracle:full, oracle:segment:<id>, feedback, script:<file>)");
}

int run_session(const SessionArgs& a) {
  const session::Task task = session::load_task(a.task);
  const session::SessionConfig cfg = session::session_config_from_json(load_config(a.config));
  auto teacher = make_teacher(a.teacher, task);
  const Seed seed{a.seed};

  session::SessionEngine engine(session::prepare_session(task, cfg, seed), cfg, seed);
  const session::SessionReport report = session::run_protocol(engine, *teacher);

  std::optional<std::string> frames_path;
  if (!a.frames.empty()) {
    std::ofstream out(a.frames);
    session::write_frames_csv(out, report.frames);
    frames_path = a.frames;
  }
  if (!a.emit_script.empty() && engine.first_demonstration() && engine.second_demonstration() && report.range) {
    auto poses = [](const learner::Demonstration& d) {
      std::vector<Pose> out;
      for (const auto& s : d.samples()) out.push_back(s.pose);
      return out;
    };
    const auto first = poses(*engine.first_demonstration());
    const auto second = poses(*engine.second_demonstration());
    std::ofstream out(a.emit_script);
    gateway::write_command_script(out, gateway::make_script(first, *report.range, second));
  }

  const std::string text = session::report_json(report, task.name(), seed, frames_path).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  if (report.fault) {
    std::cerr << json{{"error", {{"code", "session_fault"}, {"message", *report.fault}}}}.dump() << '\n';
    return 3;
  }
  return 0;
}

// ---- serve ----

struct ServeArgs {
  std::string bind = "127.0.0.1:8765";
  std::string task;
  std::string config;
  std::uint64_t seed = 7;
  std::string report;
  std::string frames;
};

int run_serve(const ServeArgs& a) {
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "--bind expects host:port");
  gateway::ServiceOptions options;
  options.host = a.bind.substr(0, colon);
  long long port = 0;
  if (!parse_int(a.bind.substr(colon + 1), port) || port < 0 || port > 65535) {
    throw Error(ErrorCode::invalid_argument, "bad port in --bind '" + a.bind + "'");
  }
  options.port = static_cast<std::uint16_t>(port);
  if (!a.report.empty()) options.report_path = a.report;
  if (!a.frames.empty()) options.frames_csv_path = a.frames;

  const session::Task task = session::load_task(a.task);
  const session::SessionConfig cfg = session::session_config_from_json(load_config(a.config));
  const Seed seed{a.seed};
  gateway::Service service(session::prepare_session(task, cfg, seed), cfg, seed, options);
  const auto bound = service.start();
  std::cout << json{{"listening", options.host + ":" + std::to_string(bound)}}.dump() << std::endl;
  service.wait();
  service.stop();
  return 0;
}

// ---- plant-demo ----

struct PlantArgs {
  double setpoint = 2.0;
  double duration = 5.0;
  bool noiseless = false;
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
};

int run_plant_demo(const PlantArgs& a) {
  const session::SessionConfig cfg = session::session_config_from_json(load_config(a.config));
  plant::PlantParams params = cfg.plant;
  if (a.noiseless) params.sensor_noise_sd = 0.0;
  plant::PlantState initial;
  initial.pressure = Pressure::psi(0.0);
  initial.regulator_setpoint = control::regulator_pressure(cfg.control.config);
  plant::Plant p(params, initial, Rng(Seed{a.seed}).split(streams::sensor));
  const Pressure target = Pressure::psi(a.setpoint);
  const control::TrackResult r = control::track(p, target, a.duration, cfg.control.config);

  std::optional<double> entry;
  double max_true = 0.0;
  for (const auto& s : r.samples) {
    max_true = std::max(max_true, s.true_pressure.psi());
    const bool inside = std::abs(s.true_pressure.psi() - a.setpoint) <= cfg.control.config.deadband;
    if (inside && !entry) entry = s.t;
    if (!inside) entry.reset();
  }
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    const auto rows = control::to_trace_rows(r.samples);
    plant::write_trace_csv(out, rows);
  }
  json summary{{"setpoint_psi", a.setpoint},
               {"tau_fill_s", params.tau_fill},
               {"settled_at_s", entry ? json(*entry) : json(nullptr)},
               {"max_true_psi", max_true},
               {"final_true_psi", r.samples.empty() ? 0.0 : r.samples.back().true_pressure.psi()},
               {"fault", r.fault ? json(*r.fault) : json(nullptr)}};
  std::cout << summary.dump(2) << '\n';
  return r.fault ? 3 : 0;
}

int report_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pneumatic haptic display: psychophysics fitting, teaching sessions and live service"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "haptic 0.1.0");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit psychometric curves to response CSV files");
  fit_cmd->add_option("files", fit.files, "Response CSV files, one per subject")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--ref", fit.reference, "Reference pressure (psi)")->envname("HAPTIC_REF");
  fit_cmd->add_option("--out-dir", fit.out_dir, "Write curves, points and cohort.svg here")->envname("HAPTIC_OUT_DIR");
  fit_cmd->add_option("--config", fit.config, "JSON config file")->envname("HAPTIC_CONFIG");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-responses", "Generate a synthetic subject's response CSV");
  sim_cmd->add_option("--k", sim.k, "Sigmoid slope (1/psi)");
  sim_cmd->add_option("--ref", sim.reference, "Reference pressure (psi)")->envname("HAPTIC_REF");
  sim_cmd->add_option("--reps", sim.reps, "Repetitions per test pressure");
  sim_cmd->add_option("--bias-reps", sim.bias_reps, "Reference-vs-reference probes");
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->envname("HAPTIC_SEED");
  sim_cmd->add_option("--out", sim.out, "Output CSV (stdout if omitted)");
  std::string sim_config;
  sim_cmd->add_option("--config", sim_config, "JSON config file")->envname("HAPTIC_CONFIG");

  SessionArgs ses;
  auto* ses_cmd = app.add_subcommand("session", "Run a headless teaching session");
  ses_cmd->add_option("--task", ses.task, "Task JSON file")->required()->envname("HAPTIC_TASK");
  ses_cmd->add_option("--config", ses.config, "JSON config file")->envname("HAPTIC_CONFIG");
  ses_cmd->add_option("--teacher", ses.teacher,
                      "oracle | oracle:full | oracle:segment:<id> | feedback | script:<file>")
      ->envname("HAPTIC_TEACHER");
  ses_cmd->add_option("--seed", ses.seed, "Random seed")->envname("HAPTIC_SEED");
  ses_cmd->add_option("--out", ses.out, "Write the report here instead of stdout");
  ses_cmd->add_option("--frames", ses.frames, "Write the frame trace CSV here");
  ses_cmd->add_option("--emit-script", ses.emit_script, "Write the equivalent operator command stream");

  ServeArgs srv;
  auto* srv_cmd = app.add_subcommand("serve", "Serve a live session over WebSocket");
  srv_cmd->add_option("--bind", srv.bind, "host:port")->envname("HAPTIC_BIND");
  srv_cmd->add_option("--task", srv.task, "Task JSON file")->required()->envname("HAPTIC_TASK");
  srv_cmd->add_option("--config", srv.config, "JSON config file")->envname("HAPTIC_CONFIG");
  srv_cmd->add_option("--seed", srv.seed, "Random seed")->envname("HAPTIC_SEED");
  srv_cmd->add_option("--report", srv.report, "Write the report JSON here after retrain");
  srv_cmd->add_option("--frames", srv.frames, "Write the frame trace CSV here after retrain");

  PlantArgs pl;
  auto* pl_cmd = app.add_subcommand("plant-demo", "Track a fixed setpoint on the simulated display");
  pl_cmd->add_option("--setpoint", pl.setpoint, "Setpoint (psi)")->required();
  pl_cmd->add_option("--duration", pl.duration, "Seconds to simulate");
  pl_cmd->add_flag("--noiseless", pl.noiseless, "Disable sensor noise");
  pl_cmd->add_option("--seed", pl.seed, "Random seed")->envname("HAPTIC_SEED");
  pl_cmd->add_option("--out", pl.out, "Write the trace CSV here");
  pl_cmd->add_option("--config", pl.config, "JSON config file")->envname("HAPTIC_CONFIG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) {
      (void)load_config(sim_config);
      return run_simulate(sim);
    }
    if (*ses_cmd) return run_session(ses);
    if (*srv_cmd) return run_serve(srv);
    if (*pl_cmd) return run_plant_demo(pl);
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.code())), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 1;
}
