#include "ontoneg/signal.hpp"

#include <algorithm>

namespace ontoneg {

std::string_view to_string(LightState s) {
  switch (s) {
    case LightState::Red: return "red";
    case LightState::Green: return "green";
    case LightState::RightGreen: return "right_green";
    case LightState::Amber: return "amber";
  }
  return "red";
}

std::optional<LightState> parse_light_state(std::string_view s) {
  for (auto st : {LightState::Red, LightState::Green, LightState::RightGreen,
                  LightState::Amber}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::optional<LightState> Configuration::state_of(const LightId& light) const {
  for (const auto& [id, state] : assignments) {
    if (id == light) return state;
  }
  return std::nullopt;
}

std::string to_string(const Configuration& c) {
  std::string out = "(";
  for (std::size_t i = 0; i < c.assignments.size(); ++i) {
    if (i) out += ", ";
    out += c.assignments[i].first.value;
    out += '.';
    out += to_string(c.assignments[i].second);
  }
  return out + ")";
}

ConflictMatrix ConflictMatrix::from_rows(const std::vector<std::vector<bool>>& rows) {
  ConflictMatrix m(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != rows.size()) {
      throw std::invalid_argument("conflict matrix must be square");
    }
    if (rows[a][a]) throw std::invalid_argument("conflict matrix diagonal must be false");
    for (std::size_t b = 0; b < rows.size(); ++b) {
      if (rows[a][b] != rows[b][a]) {
        throw std::invalid_argument("conflict matrix must be symmetric");
      }
      m.cells_[a * m.n_ + b] = rows[a][b] ? 1 : 0;
    }
  }
  return m;
}

ConflictMatrix ConflictMatrix::four_way() {
  ConflictMatrix m(4);
  for (std::size_t a = 0; a < 4; ++a) {
    m.set_conflict(a, (a + 1) % 4);
  }
  return m;
}

void ConflictMatrix::set_conflict(std::size_t a, std::size_t b, bool value) {
  if (a == b) throw std::invalid_argument("an approach cannot conflict with itself");
  cells_[a * n_ + b] = cells_[b * n_ + a] = value ? 1 : 0;
}

std::vector<std::vector<bool>> ConflictMatrix::rows() const {
  std::vector<std::vector<bool>> out(n_, std::vector<bool>(n_));
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) out[a][b] = conflicts(a, b);
  }
  return out;
}

bool conflict_free(const std::vector<LightState>& states,
                   const ConflictMatrix& conflicts) {
  for (std::size_t a = 0; a < states.size(); ++a) {
    if (!is_green(states[a])) continue;
    for (std::size_t b = a + 1; b < states.size(); ++b) {
      if (is_green(states[b]) && conflicts.conflicts(a, b)) return false;
    }
  }
  return true;
}

namespace {

// Depth-first over approaches in order, trying Green before Red, so the
// output is already in the documented order.
void extend(const ConflictMatrix& m, std::size_t i, std::vector<LightState>& cur,
            std::vector<std::vector<LightState>>& out) {
  const std::size_t n = m.size();
  if (i == n) {
    // Maximal: no red approach could turn green without a conflict.
    for (std::size_t a = 0; a < n; ++a) {
      if (cur[a] == LightState::Green) continue;
      bool blocked = false;
      for (std::size_t b = 0; b < n && !blocked; ++b) {
        blocked = cur[b] == LightState::Green && m.conflicts(a, b);
      }
      if (!blocked) return;
    }
    out.push_back(cur);
    return;
  }
  bool can_green = true;
  for (std::size_t b = 0; b < i && can_green; ++b) {
    can_green = !(cur[b] == LightState::Green && m.conflicts(i, b));
  }
  if (can_green) {
    cur[i] = LightState::Green;
    extend(m, i + 1, cur, out);
  }
  cur[i] = LightState::Red;
  extend(m, i + 1, cur, out);
}

}  // namespace

std::vector<std::vector<LightState>> maximal_phases(const ConflictMatrix& conflicts) {
  std::vector<std::vector<LightState>> out;
  if (conflicts.size() == 0) return out;
  std::vector<LightState> cur(conflicts.size(), LightState::Red);
  extend(conflicts, 0, cur, out);
  return out;
}

}  // namespace ontoneg
