#include "ontoneg/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

namespace ontoneg::harness {

using nlohmann::json;

namespace {

double round_tenth(double x) { return std::round(x * 10.0) / 10.0; }

double percent(std::uint32_t k, std::size_t n) {
  return n == 0 ? 0.0 : std::round(1000.0 * k / static_cast<double>(n)) / 10.0;
}

std::string fixed1(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

ArmSummary summarize(const std::vector<const ArmResult*>& arms) {
  ArmSummary s;
  double total = 0.0;
  for (const auto* a : arms) {
    s.arrived += a->travel_times.size();
    s.capped += a->capped.size();
    s.safety_violations += a->safety_violations;
    s.safety_checks += a->safety_checks;
    s.sessions += a->sessions;
    s.votes += a->votes;
    for (const auto& [_, t] : a->travel_times) {
      total += static_cast<double>(t);
      s.max_travel_s = std::max<std::int64_t>(s.max_travel_s, t);
    }
  }
  s.mean_travel_s = s.arrived ? round_tenth(total / static_cast<double>(s.arrived)) : 0.0;
  return s;
}

json arm_to_json(const ArmSummary& a) {
  return {{"arrived", a.arrived},
          {"capped", a.capped},
          {"mean_travel_s", a.mean_travel_s},
          {"max_travel_s", a.max_travel_s},
          {"safety_violations", a.safety_violations},
          {"safety_checks", a.safety_checks},
          {"sessions", a.sessions},
          {"votes", a.votes}};
}

ArmSummary arm_from_json(const json& j) {
  ArmSummary a;
  a.arrived = j.at("arrived").get<std::uint64_t>();
  a.capped = j.at("capped").get<std::uint64_t>();
  a.mean_travel_s = j.at("mean_travel_s").get<double>();
  a.max_travel_s = j.at("max_travel_s").get<std::int64_t>();
  a.safety_violations = j.at("safety_violations").get<std::uint64_t>();
  a.safety_checks = j.at("safety_checks").get<std::uint64_t>();
  a.sessions = j.at("sessions").get<std::uint64_t>();
  a.votes = j.at("votes").get<std::uint64_t>();
  return a;
}

}  // namespace

std::optional<Format> parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "text") return Format::Text;
  return std::nullopt;
}

Comparison compare(const std::map<std::string, sim::Tick>& negotiate,
                   const std::map<std::string, sim::Tick>& baseline) {
  if (negotiate.size() != baseline.size()) {
    throw std::invalid_argument("arms cover different vehicles");
  }
  Comparison c;
  std::int64_t gain_total = 0;
  for (const auto& [vehicle, t_neg] : negotiate) {
    auto it = baseline.find(vehicle);
    if (it == baseline.end()) {
      throw std::invalid_argument("vehicle " + vehicle + " missing from the baseline arm");
    }
    std::int64_t delta = it->second - t_neg;
    c.deltas.emplace(vehicle, delta);
    if (delta > 0) {
      ++c.gained;
      gain_total += delta;
    } else if (delta == 0) {
      ++c.unchanged;
    } else {
      ++c.lost;
    }
  }
  c.pct_gained = percent(c.gained, c.deltas.size());
  c.pct_unchanged = percent(c.unchanged, c.deltas.size());
  c.pct_lost = percent(c.lost, c.deltas.size());
  c.avg_gain_s = c.gained ? std::llround(static_cast<double>(gain_total) / c.gained) : 0;
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {{"experiments", c.n_experiments},
          {"vehicles", c.n_vehicles},
          {"routes", c.n_routes},
          {"intersections", c.n_intersections},
          {"radius_m", c.radius_m},
          {"seed", c.seed},
          {"base_duration_s", c.base_duration_s},
          {"congestion_gain", c.congestion_gain},
          {"phase_count", c.phase_count},
          {"mode", std::string(to_string(c.mode))},
          {"asymmetry", c.asymmetry},
          {"departure_window_s", c.departure_window_s},
          {"approach_window_m", c.approach_window_m},
          {"queue_radius_m", c.queue_radius_m}};
}

Report make_report(const ExperimentConfig& config,
                   const std::vector<ExperimentResult>& results) {
  Report r;
  r.mode = std::string(to_string(config.mode));
  r.seed = config.seed;
  r.config = config_to_json(config);
  std::vector<const ArmResult*> neg_arms, base_arms;
  std::map<std::string, sim::Tick> neg_times, base_times;
  for (const auto& e : results) {
    r.experiments.push_back(ExperimentInfo{e.index, e.seed, hex16(e.world_hash), e.vehicles});
    const std::string prefix = "e" + std::to_string(e.index) + "/";
    if (e.negotiate) neg_arms.push_back(&*e.negotiate);
    if (e.baseline) base_arms.push_back(&*e.baseline);
    if (!e.negotiate || !e.baseline) continue;
    for (const auto& [v, t] : e.negotiate->travel_times) {
      auto it = e.baseline->travel_times.find(v);
      if (it == e.baseline->travel_times.end()) continue;
      neg_times.emplace(prefix + v, t);
      base_times.emplace(prefix + v, it->second);
    }
    std::set<std::string> capped(e.negotiate->capped.begin(), e.negotiate->capped.end());
    capped.insert(e.baseline->capped.begin(), e.baseline->capped.end());
    for (const auto& v : capped) r.capped.push_back(prefix + v);
  }
  if (!neg_arms.empty()) r.arms["negotiate"] = summarize(neg_arms);
  if (!base_arms.empty()) r.arms["baseline"] = summarize(base_arms);
  if (config.mode == Mode::Paired) r.comparison = compare(neg_times, base_times);
  std::sort(r.capped.begin(), r.capped.end());
  return r;
}

json report_to_json(const Report& r) {
  json j;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["config"] = r.config;
  j["experiments"] = json::array();
  for (const auto& e : r.experiments) {
    j["experiments"].push_back({{"index", e.index},
                                {"seed", e.seed},
                                {"world_hash", e.world_hash},
                                {"vehicles", e.vehicles}});
  }
  j["arms"] = json::object();
  for (const auto& [name, a] : r.arms) j["arms"][name] = arm_to_json(a);
  j["capped"] = r.capped;
  if (r.comparison) {
    const auto& c = *r.comparison;
    j["pct_gained"] = c.pct_gained;
    j["pct_unchanged"] = c.pct_unchanged;
    j["pct_lost"] = c.pct_lost;
    j["avg_gain_s"] = c.avg_gain_s;
    j["gained"] = c.gained;
    j["unchanged"] = c.unchanged;
    j["lost"] = c.lost;
    j["deltas"] = c.deltas;
  }
  return j;
}

Report report_from_json(const json& j) {
  Report r;
  r.mode = j.at("mode").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  for (const auto& e : j.at("experiments")) {
    r.experiments.push_back(ExperimentInfo{e.at("index").get<std::uint32_t>(),
                                           e.at("seed").get<std::uint64_t>(),
                                           e.at("world_hash").get<std::string>(),
                                           e.at("vehicles").get<std::uint32_t>()});
  }
  for (const auto& [name, a] : j.at("arms").items()) r.arms[name] = arm_from_json(a);
  r.capped = j.at("capped").get<std::vector<std::string>>();
  if (j.contains("pct_gained")) {
    Comparison c;
    c.pct_gained = j.at("pct_gained").get<double>();
    c.pct_unchanged = j.at("pct_unchanged").get<double>();
    c.pct_lost = j.at("pct_lost").get<double>();
    c.avg_gain_s = j.at("avg_gain_s").get<std::int64_t>();
    c.gained = j.at("gained").get<std::uint32_t>();
    c.unchanged = j.at("unchanged").get<std::uint32_t>();
    c.lost = j.at("lost").get<std::uint32_t>();
    c.deltas = j.at("deltas").get<std::map<std::string, std::int64_t>>();
    r.comparison = std::move(c);
  }
  return r;
}

namespace {

struct Row {
  std::string label;
  std::string value;
};

std::vector<Row> table_rows(const Report& r) {
  std::vector<Row> rows;
  if (r.comparison) {
    const auto& c = *r.comparison;
    rows.push_back({"% of vehicles that gained time", fixed1(c.pct_gained) + "%"});
    rows.push_back({"Average of time gained", std::to_string(c.avg_gain_s) + " seconds"});
    rows.push_back({"% of vehicles that not gained time", fixed1(c.pct_unchanged) + "%"});
    rows.push_back({"% of vehicles that lost time", fixed1(c.pct_lost) + "%"});
    rows.push_back({"Vehicles compared", std::to_string(c.deltas.size())});
  }
  rows.push_back({"Vehicles capped", std::to_string(r.capped.size())});
  for (const auto& [name, a] : r.arms) {
    rows.push_back({"Mean travel time (" + name + ")", fixed1(a.mean_travel_s) + " seconds"});
    rows.push_back({"Safety violations (" + name + ")", std::to_string(a.safety_violations)});
  }
  return rows;
}

}  // namespace

void emit_report(const Report& r, std::ostream& out, Format format) {
  switch (format) {
    case Format::Json:
      out << report_to_json(r).dump(2) << '\n';
      break;
    case Format::Csv:
      out << "parameter,value\n";
      for (const auto& row : table_rows(r)) out << row.label << ',' << row.value << '\n';
      if (r.comparison) {
        out << "\nvehicle,delta_s\n";
        for (const auto& [v, d] : r.comparison->deltas) out << v << ',' << d << '\n';
      }
      break;
    case Format::Text: {
      out << "Overall results (" << r.mode << ", " << r.experiments.size()
          << " experiments, seed " << r.seed << ")\n";
      std::size_t width = 9;
      for (const auto& row : table_rows(r)) width = std::max(width, row.label.size());
      auto line = [&](const std::string& a, const std::string& b) {
        out << a << std::string(width + 2 - a.size(), ' ') << b << '\n';
      };
      line("Parameter", "Value");
      for (const auto& row : table_rows(r)) line(row.label, row.value);
      break;
    }
  }
}

void emit_report(const Report& r, const std::string& path, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  emit_report(r, out, format);
  out.flush();
  if (!out) throw std::ios_base::failure("failed writing " + path);
}

}  // namespace ontoneg::harness
