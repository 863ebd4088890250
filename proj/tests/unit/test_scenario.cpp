#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ontoneg/scenario.hpp"
#include "ontoneg/world_io.hpp"

namespace replay = ontoneg::replay;
namespace neg = ontoneg::negotiation;

namespace {

neg::Tally tally(std::uint32_t a, std::uint32_t b) { return {{neg::BidId{1}, a}, {neg::BidId{2}, b}}; }

}  // namespace

TEST(GoldenCorridor, WinnersAndTallies) {
  auto result = replay::run(replay::golden_corridor());
  ASSERT_EQ(result.sessions.size(), 4u);
  const std::vector<std::pair<neg::Tally, std::uint32_t>> expected{
      {tally(3, 2), 1}, {tally(2, 4), 2}, {tally(4, 3), 1}, {tally(0, 3), 2}};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& s = result.sessions[k];
    EXPECT_EQ(s.intersection, "Int" + std::to_string(k + 1));
    EXPECT_EQ(s.tally, expected[k].first) << s.intersection;
    EXPECT_EQ(s.winner, neg::BidId{expected[k].second}) << s.intersection;
    EXPECT_TRUE(s.contested);
  }
}

TEST(GoldenCorridor, CarOneWaitsOnlyAtIntersectionThree) {
  auto result = replay::run(replay::golden_corridor());
  const auto& w = result.world;
  auto car = w.find_vehicle("car1");
  ASSERT_TRUE(car);
  const auto& v = w.vehicles[*car];
  ASSERT_TRUE(v.arrival);
  EXPECT_GT(v.wait_s, 0.0);
  ASSERT_EQ(v.wait_by_intersection.size(), 1u);
  EXPECT_EQ(v.wait_by_intersection.begin()->first, "Int3");
  EXPECT_DOUBLE_EQ(v.wait_by_intersection.begin()->second, v.wait_s);
  // 1900 m at 10 m/s plus the wait at Int3.
  EXPECT_EQ(ontoneg::sim::travel_time(w, *car), 190 + static_cast<std::int64_t>(v.wait_s));
  EXPECT_EQ(w.safety_violations, 0u);
  EXPECT_TRUE(result.violations.empty());
}

TEST(GoldenCorridor, TranscriptRecordsEveryVote) {
  auto result = replay::run(replay::golden_corridor());
  std::size_t opens = 0, votes = 0, closes = 0;
  for (const auto& e : result.transcript) {
    switch (e.kind) {
      case neg::TranscriptEvent::Kind::Open: ++opens; break;
      case neg::TranscriptEvent::Kind::Vote: ++votes; break;
      case neg::TranscriptEvent::Kind::Close: ++closes; break;
    }
  }
  EXPECT_EQ(opens, 4u);
  EXPECT_EQ(closes, 4u);
  EXPECT_EQ(votes, 5u + 6u + 7u + 3u);
}

TEST(GoldenCorridor, JsonRoundTripAndCheckedInCopy) {
  auto s = replay::golden_corridor();
  auto j = replay::scenario_to_json(s);
  auto back = replay::scenario_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(replay::scenario_to_json(back).dump(), j.dump());
  EXPECT_EQ(back.sessions, s.sessions);

  std::ifstream in(ONTONEG_DATA_DIR "/golden_corridor.json");
  ASSERT_TRUE(in) << "missing data/golden_corridor.json";
  std::stringstream file;
  file << in.rdbuf();
  EXPECT_EQ(file.str(), j.dump(2) + "\n");

  auto from_file = replay::run(replay::scenario_from_json(nlohmann::json::parse(file.str())));
  auto built = replay::run(s);
  EXPECT_EQ(ontoneg::sim::serialize(from_file.world), ontoneg::sim::serialize(built.world));
}

TEST(Scenario, RejectsBadScripts) {
  auto j = nlohmann::json(replay::scenario_to_json(replay::golden_corridor()));
  auto broken = j;
  broken["sessions"][0]["intersection"] = "Int9";
  EXPECT_THROW(replay::run(replay::scenario_from_json(broken)), std::exception);
  broken = j;
  broken["sessions"][0]["votes"][0]["bid"] = "third";
  EXPECT_THROW(replay::scenario_from_json(broken), replay::ScenarioError);
  broken = j;
  broken.erase("world");
  EXPECT_THROW(replay::scenario_from_json(broken), std::exception);
}
