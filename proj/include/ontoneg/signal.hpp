#pragma once

// Traffic-light vocabulary shared by the negotiation engine and simulator.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ontoneg {

enum class LightState { Red, Green, RightGreen, Amber };

std::string_view to_string(LightState s);
std::optional<LightState> parse_light_state(std::string_view s);

// Green and RightGreen both release traffic into the junction.
constexpr bool is_green(LightState s) {
  return s == LightState::Green || s == LightState::RightGreen;
}

enum class Turn { Straight, Right, Left };

// A vehicle may cross on Green, or on RightGreen when turning right.
constexpr bool permits(LightState s, Turn turn) {
  return s == LightState::Green ||
         (s == LightState::RightGreen && turn == Turn::Right);
}

struct LightId {
  std::string value;
  auto operator<=>(const LightId&) const = default;
};

// One complete assignment of states to an intersection's lights, in
// approach order.
struct Configuration {
  std::vector<std::pair<LightId, LightState>> assignments;

  std::optional<LightState> state_of(const LightId& light) const;
  bool operator==(const Configuration&) const = default;
};

std::string to_string(const Configuration& c);

// Symmetric approach-conflict relation with a false diagonal.
class ConflictMatrix {
 public:
  ConflictMatrix() = default;
  explicit ConflictMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}
  // Throws std::invalid_argument unless rows are square, symmetric and the
  // diagonal is false.
  static ConflictMatrix from_rows(const std::vector<std::vector<bool>>& rows);
  // Standard four-way crossing with approaches ordered around the junction:
  // opposite approaches are compatible, adjacent ones conflict.
  static ConflictMatrix four_way();

  std::size_t size() const { return n_; }
  bool conflicts(std::size_t a, std::size_t b) const { return cells_[a * n_ + b] != 0; }
  void set_conflict(std::size_t a, std::size_t b, bool value = true);
  std::vector<std::vector<bool>> rows() const;
  bool operator==(const ConflictMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

// True when no two conflicting approaches are simultaneously green.
bool conflict_free(const std::vector<LightState>& states,
                   const ConflictMatrix& conflicts);

// Every maximal conflict-free set of green approaches, as Green/Red vectors,
// ordered lexicographically with Green before Red.
std::vector<std::vector<LightState>> maximal_phases(const ConflictMatrix& conflicts);

}  // namespace ontoneg
