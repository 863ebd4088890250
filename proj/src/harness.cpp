#include "ontoneg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "ontoneg/world_io.hpp"

namespace ontoneg::harness {

namespace neg = ontoneg::negotiation;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Negotiate: return "negotiate";
    case Mode::Baseline: return "baseline";
    case Mode::Paired: return "paired";
  }
  return "paired";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (auto m : {Mode::Negotiate, Mode::Baseline, Mode::Paired}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (n_experiments == 0 || n_vehicles == 0 || n_routes == 0 || n_intersections == 0) {
    throw ConfigError("experiment, vehicle, route and intersection counts must be positive");
  }
  if (!(radius_m > 0) || !(base_duration_s > 0)) {
    throw ConfigError("radius and base duration must be positive");
  }
  if (congestion_gain < 0) throw ConfigError("congestion gain must be non-negative");
  if (phase_count < 2) throw ConfigError("phase count must be at least 2");
  if (asymmetry < 0 || asymmetry > 1) throw ConfigError("asymmetry must lie in [0, 1]");
  if (departure_window_s < 0) throw ConfigError("departure window must be non-negative");
  if (!(approach_window_m > 0) || !(queue_radius_m > 0)) {
    throw ConfigError("approach window and queue radius must be positive");
  }
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (n_routes > sim::feasible_route_count(n_intersections)) {
    throw ConfigError(std::to_string(n_routes) + " routes requested but only " +
                      std::to_string(sim::feasible_route_count(n_intersections)) +
                      " distinct routes exist for " + std::to_string(n_intersections) +
                      " intersections");
  }
}

sim::ScenarioParams ExperimentConfig::scenario() const {
  sim::ScenarioParams p;
  p.n_vehicles = n_vehicles;
  p.n_routes = n_routes;
  p.n_intersections = n_intersections;
  p.radius_m = radius_m;
  p.base_duration_s = base_duration_s;
  p.congestion_gain = congestion_gain;
  p.asymmetry = asymmetry;
  p.departure_window_s = departure_window_s;
  return p;
}

std::uint64_t experiment_seed(std::uint64_t seed, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    index};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

sim::Tick tick_cap(const sim::World& w) {
  sim::Tick latest = 0;
  double longest = 0.0;
  for (const auto& v : w.vehicles) {
    latest = std::max(latest, v.departure);
    longest = std::max(longest, sim::free_flow_time(w, v));
  }
  return latest + static_cast<sim::Tick>(std::ceil(10.0 * longest)) + 1;
}

namespace {

ArmResult finish(const sim::World& w) {
  ArmResult r;
  r.ticks = w.clock;
  r.safety_violations = w.safety_violations;
  r.safety_checks = w.safety_checks;
  for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
    if (auto t = sim::travel_time(w, i)) {
      r.travel_times.emplace(w.vehicles[i].name, *t);
    } else {
      r.capped.push_back(w.vehicles[i].name);
    }
  }
  if (!w.vehicles.empty() && r.travel_times.empty()) {
    throw std::runtime_error("every vehicle hit the tick cap of " +
                             std::to_string(w.clock) + " ticks");
  }
  return r;
}

// Whether the session's outcome governs the vehicle's crossing: it reaches
// the stop line while the next phase runs, or reaches it earlier on a
// light that holds it until the session applies.
bool affected(const sim::Intersection& x, const sim::NextStop& stop,
              const sim::Vehicle& v, sim::Tick apply_tick, sim::Tick now) {
  const double eta = static_cast<double>(now) + stop.distance_m / v.speed_mps;
  const double apply = static_cast<double>(apply_tick);
  if (eta > apply + x.base_duration_s) return false;
  return eta >= apply || !permits(x.approaches[stop.approach].state, stop.turn);
}

neg::IntersectionLayout layout_of(const sim::Intersection& x) {
  return neg::IntersectionLayout{x.name, x.lights(), x.conflicts};
}

}  // namespace

ArmResult run_baseline(sim::World w, const ExperimentConfig&, sim::World* final_state) {
  const sim::Tick cap = tick_cap(w);
  while (!w.all_arrived() && w.clock < cap) sim::step(w);
  auto r = finish(w);
  if (final_state) *final_state = std::move(w);
  return r;
}

ArmResult run_negotiate(sim::World w, const ExperimentConfig& config,
                        neg::NegotiationEngine* engine, sim::World* final_state) {
  neg::NegotiationEngine local;
  if (!engine) {
    local.set_transcript_enabled(false);
    engine = &local;
  }
  const neg::Preference preference{};
  std::vector<neg::IntersectionLayout> layouts;
  std::vector<neg::Party> mediators;
  std::vector<std::vector<neg::Bid>> bids;
  for (const auto& x : w.intersections) {
    layouts.push_back(layout_of(x));
    mediators.push_back(neg::Party{x.name + "_mediator", neg::Role::Mediator});
    try {
      bids.push_back(neg::generate_bids(layouts.back(), config.phase_count,
                                        mediators.back().id));
    } catch (const neg::NegotiationError& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<std::optional<neg::SessionHandle>> open(w.intersections.size());

  ArmResult stats;
  const sim::Tick cap = tick_cap(w);
  while (!w.all_arrived() && w.clock < cap) {
    const sim::Tick now = w.clock;
    for (std::size_t xi = 0; xi < w.intersections.size(); ++xi) {
      if (!open[xi] || engine->session(*open[xi]).apply_tick() > now) continue;
      const auto handle = *open[xi];
      open[xi].reset();
      auto outcome = engine->close_session(handle, now);
      if (!outcome.contested) continue;  // the timer already alternated
      ++stats.contested_sessions;
      const auto& x = w.intersections[xi];
      auto queues = sim::congestion(w, xi, config.queue_radius_m);
      std::uint32_t max_queue =
          queues.empty() ? 0 : *std::max_element(queues.begin(), queues.end());
      sim::apply_configuration(
          w, xi, engine->session(handle).find_bid(outcome.winner)->configuration,
          sim::adjusted_duration(x.base_duration_s, x.congestion_gain, max_queue));
    }
    for (std::size_t xi = 0; xi < w.intersections.size(); ++xi) {
      if (open[xi]) continue;
      open[xi] = engine->open_session(
          mediators[xi], layouts[xi], bids[xi],
          std::max(w.intersections[xi].phase_ends_at, now + 1), now);
      ++stats.sessions;
    }
    for (const auto& v : w.vehicles) {
      if (v.status == sim::VehicleStatus::Arrived || v.status == sim::VehicleStatus::Pending) {
        continue;
      }
      auto stop = sim::next_stop(w, v);
      if (!stop || stop->distance_m > config.approach_window_m) continue;
      const auto& x = w.intersections[stop->intersection];
      const auto handle = *open[stop->intersection];
      const auto& session = engine->session(handle);
      if (!affected(x, *stop, v, session.apply_tick(), now)) continue;
      neg::ApproachContext ctx{v.name,
                               x.name,
                               x.approaches[stop->approach].light,
                               stop->turn,
                               static_cast<double>(stop->turns_remaining),
                               stop->distance_remaining_m,
                               x.base_duration_s};
      if (!session.vote_of(v.name)) {
        engine->cast_vote(handle, v.name, neg::choose_bid(ctx, session, preference), now);
        ++stats.votes;
      } else if (session.revisions(v.name) == 0) {
        if (auto better = neg::reconsider_vote(ctx, session, preference)) {
          engine->cast_vote(handle, v.name, *better, now);
          ++stats.votes;
        }
      }
    }
    sim::step(w);
  }
  auto r = finish(w);
  r.sessions = stats.sessions;
  r.contested_sessions = stats.contested_sessions;
  r.votes = stats.votes;
  if (final_state) *final_state = std::move(w);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::uint32_t index) {
  config.validate();
  ExperimentResult out;
  out.index = index;
  out.seed = experiment_seed(config.seed, index);
  sim::World world;
  try {
    world = sim::generate_scenario(out.seed, config.scenario());
  } catch (const sim::SimError& e) {
    throw ConfigError(e.what());
  }
  out.world_hash = sim::world_hash(world);
  out.vehicles = static_cast<std::uint32_t>(world.vehicles.size());
  if (config.mode != Mode::Baseline) out.negotiate = run_negotiate(world, config);
  if (config.mode != Mode::Negotiate) out.baseline = run_baseline(world, config);
  return out;
}

std::vector<ExperimentResult> run_all(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentResult> results(config.n_experiments);
  std::atomic<std::uint32_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::uint32_t i = next++; i < config.n_experiments; i = next++) {
      try {
        results[i] = run_experiment(config, i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = config.n_experiments;
      }
    }
  };
  const std::uint32_t n = std::min(config.jobs, config.n_experiments);
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace ontoneg::harness
