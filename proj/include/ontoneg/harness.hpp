#pragma once

// Seeded experiments: generate a world, run it with negotiated lights, with
// fixed-cycle lights, or both on copies of the same world.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ontoneg/negotiation.hpp"
#include "ontoneg/traffic_sim.hpp"

namespace ontoneg::harness {

enum class Mode { Negotiate, Baseline, Paired };

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::uint32_t n_experiments = 1;
  std::uint32_t n_vehicles = 60;
  std::uint32_t n_routes = 10;
  std::uint32_t n_intersections = 4;
  double radius_m = 1500.0;
  std::uint64_t seed = 7;
  double base_duration_s = 30.0;
  double congestion_gain = 5.0;
  std::uint32_t phase_count = 2;
  Mode mode = Mode::Paired;
  double asymmetry = 0.8;
  sim::Tick departure_window_s = 300;
  double approach_window_m = 500.0;
  double queue_radius_m = 200.0;
  // Worker threads; results do not depend on it.
  std::uint32_t jobs = 1;

  // Throws ConfigError.
  void validate() const;
  sim::ScenarioParams scenario() const;
};

// Seed of experiment `index`, derived from the configured seed.
std::uint64_t experiment_seed(std::uint64_t seed, std::uint32_t index);

struct ArmResult {
  std::map<std::string, sim::Tick> travel_times;  // arrived vehicles
  std::vector<std::string> capped;                // hit the tick cap
  sim::Tick ticks = 0;
  std::uint64_t safety_violations = 0;
  std::uint64_t safety_checks = 0;
  std::uint64_t sessions = 0;
  std::uint64_t contested_sessions = 0;
  std::uint64_t votes = 0;
};

struct ExperimentResult {
  std::uint32_t index = 0;
  std::uint64_t seed = 0;
  std::uint64_t world_hash = 0;
  std::uint32_t vehicles = 0;
  std::optional<ArmResult> negotiate;
  std::optional<ArmResult> baseline;
};

// Step budget for a world: latest departure + 10x the longest free-flow time.
sim::Tick tick_cap(const sim::World& world);

// Fixed-cycle lights only. `final_state`, when given, receives the world
// as it stood when the run ended.
ArmResult run_baseline(sim::World world, const ExperimentConfig& config,
                       sim::World* final_state = nullptr);

// Per-intersection voting sessions, one phase ahead. When `engine` is
// given it receives every session (and its mirror and transcript).
ArmResult run_negotiate(sim::World world, const ExperimentConfig& config,
                        negotiation::NegotiationEngine* engine = nullptr,
                        sim::World* final_state = nullptr);

// Throws ConfigError on infeasible parameters and std::runtime_error when
// every vehicle of an arm hits the tick cap.
ExperimentResult run_experiment(const ExperimentConfig& config, std::uint32_t index);

std::vector<ExperimentResult> run_all(const ExperimentConfig& config);

}  // namespace ontoneg::harness
