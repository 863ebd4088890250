// ontoneg: scenario simulation, knowledge-base queries and scripted replays.
//
// Exit codes: 0 success, 1 configuration or input error, 2 IO error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ontoneg/harness.hpp"
#include "ontoneg/kb_format.hpp"
#include "ontoneg/knowledge_store.hpp"
#include "ontoneg/query.hpp"
#include "ontoneg/report.hpp"
#include "ontoneg/scenario.hpp"
#include "ontoneg/world_io.hpp"

namespace {

using namespace ontoneg;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIoError = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through `fn` to stdout when path is "-", otherwise to the file.
template <typename Fn>
void with_output(const std::string& path, Fn fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  fn(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

int run_simulate(const harness::ExperimentConfig& config, const std::string& mode,
                 const std::string& format, const std::string& out_path) {
  auto cfg = config;
  auto m = harness::parse_mode(mode);
  if (!m) throw harness::ConfigError("unknown mode " + mode);
  cfg.mode = *m;
  auto f = harness::parse_format(format);
  if (!f) throw harness::ConfigError("unknown format " + format);
  auto results = harness::run_all(cfg);
  auto report = harness::make_report(cfg, results);
  with_output(out_path, [&](std::ostream& os) { harness::emit_report(report, os, *f); });
  return kOk;
}

kb::KnowledgeStore load_store(const std::string& path, bool with_schema) {
  kb::KnowledgeStore store = with_schema ? kb::make_negotiation_store() : kb::KnowledgeStore{};
  if (!path.empty()) kb::load(store, read_file(path));
  return store;
}

int run_query(const std::string& kb_path, const std::string& text, bool with_schema) {
  auto store = load_store(kb_path, with_schema);
  auto patterns = query::compile(text);
  auto rows = store.match(patterns);
  for (const auto& row : rows) {
    std::string line;
    for (const auto& [var, value] : row) {
      if (!line.empty()) line += ' ';
      line += '?' + var + '=' + kb::to_string(value);
    }
    std::cout << line << '\n';
  }
  std::cerr << rows.size() << (rows.size() == 1 ? " binding\n" : " bindings\n");
  return kOk;
}

int run_validate(const std::string& kb_path, bool with_schema) {
  auto store = load_store(kb_path, with_schema);
  auto violations = store.validate_all();
  for (const auto& v : violations) std::cout << v.message << '\n';
  std::cerr << violations.size()
            << (violations.size() == 1 ? " violation\n" : " violations\n");
  return kOk;
}

int run_replay(const std::string& scenario_path, const std::string& events_path,
               const std::string& transcript_path, const std::string& export_path) {
  replay::Scenario scenario = scenario_path.empty()
                                  ? replay::golden_corridor()
                                  : replay::scenario_from_json(
                                        nlohmann::json::parse(read_file(scenario_path)));
  if (!export_path.empty()) {
    with_output(export_path, [&](std::ostream& os) {
      os << replay::scenario_to_json(scenario).dump(2) << '\n';
    });
    return kOk;
  }
  auto result = replay::run(scenario);
  for (const auto& s : result.sessions) {
    std::cout << s.intersection << ' ' << s.session << " apply " << s.apply_tick << " tally";
    for (const auto& [bid, n] : s.tally) std::cout << ' ' << negotiation::to_string(bid) << '=' << n;
    std::cout << " winner " << (s.contested ? negotiation::to_string(s.winner) : "none")
              << '\n';
  }
  const auto& w = result.world;
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    const auto& v = w.vehicles[i];
    char wait[32];
    std::snprintf(wait, sizeof wait, "%.1f", v.wait_s);
    std::cout << v.name << " travel " << *sim::travel_time(w, i) << " s wait " << wait << " s";
    for (const auto& [x, s] : v.wait_by_intersection) {
      std::snprintf(wait, sizeof wait, "%.1f", s);
      std::cout << ' ' << x << '=' << wait;
    }
    std::cout << '\n';
  }
  std::cout << "safety violations " << w.safety_violations << '\n';
  std::cout << "schema violations " << result.violations.size() << '\n';
  if (!events_path.empty()) {
    with_output(events_path, [&](std::ostream& os) { sim::write_events(os, w.events); });
  }
  if (!transcript_path.empty()) {
    with_output(transcript_path,
                [&](std::ostream& os) { negotiation::write_transcript(os, result.transcript); });
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Negotiated traffic-light control: simulation, knowledge base and replay"};
  app.require_subcommand(1);

  harness::ExperimentConfig config;
  std::string mode = "paired";
  std::string format = "json";
  std::string out_path = "-";
  auto* sim_cmd = app.add_subcommand("simulate", "Run seeded experiments and report");
  sim_cmd->add_option("--experiments", config.n_experiments, "Number of experiments")
      ->capture_default_str();
  sim_cmd->add_option("--vehicles", config.n_vehicles, "Vehicles per experiment")
      ->capture_default_str();
  sim_cmd->add_option("--routes", config.n_routes, "Routes per experiment")->capture_default_str();
  sim_cmd->add_option("--intersections", config.n_intersections, "Signalized intersections")
      ->capture_default_str();
  sim_cmd->add_option("--radius-m", config.radius_m, "Radius of the road grid")
      ->capture_default_str();
  sim_cmd->add_option("--seed", config.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--mode", mode, "paired | negotiate | baseline")->capture_default_str();
  sim_cmd->add_option("--base-duration", config.base_duration_s, "Base phase duration (s)")
      ->capture_default_str();
  sim_cmd->add_option("--congestion-gain", config.congestion_gain,
                      "Seconds of green added per queued vehicle")
      ->capture_default_str();
  sim_cmd->add_option("--phase-count", config.phase_count, "Bids per session")
      ->capture_default_str();
  sim_cmd->add_option("--asymmetry", config.asymmetry,
                      "Fraction of routes drawn as west-east arterials")
      ->capture_default_str();
  sim_cmd->add_option("--departure-window", config.departure_window_s,
                      "Departures are drawn from [0, window] seconds")
      ->capture_default_str();
  sim_cmd->add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--out", out_path, "Report path, - for stdout")->capture_default_str();
  sim_cmd->add_option("--format", format, "json | csv | text")->capture_default_str();

  std::string kb_path;
  std::string query_text;
  bool no_schema = false;
  auto* query_cmd = app.add_subcommand("query", "Run a conjunctive query against a knowledge base");
  query_cmd->add_option("--kb", kb_path, "Facts file (loaded on top of the negotiation schema)");
  query_cmd->add_option("--query", query_text, "Query text")->required();
  query_cmd->add_flag("--no-schema", no_schema, "Do not preload the negotiation schema");

  auto* validate_cmd = app.add_subcommand("validate", "Print restriction violations");
  validate_cmd->add_option("--kb", kb_path, "Facts file")->required();
  validate_cmd->add_flag("--no-schema", no_schema, "Do not preload the negotiation schema");

  std::string scenario_path;
  std::string events_path;
  std::string transcript_path;
  std::string export_path;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a scripted scenario");
  replay_cmd->add_option("--scenario", scenario_path,
                         "Scenario JSON (default: the built-in golden corridor)");
  replay_cmd->add_option("--events", events_path, "Write the event log (JSON lines)");
  replay_cmd->add_option("--transcript", transcript_path,
                         "Write the negotiation transcript (JSON lines)");
  replay_cmd->add_option("--export", export_path,
                         "Write the scenario as JSON instead of running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*sim_cmd) return run_simulate(config, mode, format, out_path);
    if (*query_cmd) return run_query(kb_path, query_text, !no_schema);
    if (*validate_cmd) return run_validate(kb_path, !no_schema);
    if (*replay_cmd) return run_replay(scenario_path, events_path, transcript_path, export_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
