#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "surgrec/errors.hpp"
#include "surgrec/random.hpp"
#include "surgrec/transcript.hpp"

using namespace surgrec;

TEST(Transcript, ParseExample) {
  const auto e = parse_transcript("120 180 G2\n", 30.0);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(e[0].start_time, 4.0);
  EXPECT_DOUBLE_EQ(e[0].end_time, 6.0);
  EXPECT_EQ(e[0].gesture, "G2");
  EXPECT_TRUE(parse_transcript("", 30.0).empty());
  EXPECT_TRUE(parse_transcript("\n  \n", 30.0).empty());
}

TEST(Transcript, ErrorsNameTheLine) {
  auto message = [](const char* text) {
    try {
      parse_transcript(text, 30.0);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("1 5 G1\n9 x G2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("1 5 G1\n5 9 G2\n9 9 G3\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("1 5 G16\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("1 5\n").find("line 1"), std::string::npos);
  EXPECT_FALSE(message("1 10 G1\n5 20 G2\n").empty());
  EXPECT_THROW(parse_transcript("1 2 G1", 0.0), std::invalid_argument);
}

TEST(Transcript, ShuffledSchedulesSortIffDisjoint) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    // Build a sorted schedule, maybe inject one overlap, then shuffle lines.
    std::vector<TranscriptEntry> sorted;
    std::size_t t = rng.uniform_index(20);
    const std::size_t n = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 1 + rng.uniform_index(50);
      sorted.push_back({t, t + len, "G" + std::to_string(1 + rng.uniform_index(15)), 0, 0});
      t += len + rng.uniform_index(5);
    }
    const bool overlap = n > 1 && rng.coin();
    if (overlap) {
      const std::size_t k = 1 + rng.uniform_index(n - 1);
      sorted[k].start_frame = sorted[k - 1].end_frame - 1;
      sorted[k].end_frame = std::max(sorted[k].end_frame, sorted[k].start_frame + 1);
    }
    auto shuffled = sorted;
    rng.shuffle(shuffled);
    std::ostringstream text;
    for (const auto& e : shuffled) text << e.start_frame << ' ' << e.end_frame << ' ' << e.gesture << '\n';
    if (overlap) {
      EXPECT_THROW(parse_transcript(text.str(), 30.0), ParseError);
      continue;
    }
    const auto parsed = parse_transcript(text.str(), 30.0);
    ASSERT_EQ(parsed.size(), sorted.size());
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(parsed[i].start_frame, sorted[i].start_frame);
      EXPECT_EQ(parsed[i].gesture, sorted[i].gesture);
    }
    // format then parse is the identity.
    EXPECT_EQ(parse_transcript(format_transcript(parsed), 30.0), parsed);
  }
}

TEST(Gestures, RenumberingIsFixedBijection) {
  std::set<std::size_t> classes;
  for (int g = 1; g <= 15; ++g) {
    const auto c = gesture_class("G" + std::to_string(g));
    if (g == 7) {
      EXPECT_FALSE(c.has_value());
      continue;
    }
    ASSERT_TRUE(c.has_value());
    classes.insert(*c);
    EXPECT_EQ(gesture_symbol(*c), "G" + std::to_string(g));
  }
  EXPECT_EQ(classes.size(), 14u);
  EXPECT_EQ(*classes.rbegin(), 13u);
  EXPECT_EQ(*gesture_class("G1"), 0u);
  EXPECT_EQ(*gesture_class("G8"), 6u);
  EXPECT_EQ(*gesture_class("G15"), 13u);
  EXPECT_THROW(gesture_class("G0"), ParseError);
  EXPECT_THROW(gesture_class("X3"), ParseError);
}

TEST(Tasks, NamesFold) {
  EXPECT_EQ(task_class("Suturing"), 0u);
  EXPECT_EQ(task_class("needle_passing"), 1u);
  EXPECT_EQ(task_class("Knot-Tying"), 2u);
  EXPECT_THROW(task_class("Cutting"), ParseError);
}

TEST(SampleFrames, Examples) {
  EXPECT_EQ(sample_frames(0.0, 2.0, 8.0, 30.0, 100).size(), 16u);
  EXPECT_EQ(sample_frames(1.0, 1.1, 8.0, 30.0, 100), std::vector<std::size_t>{30});
  EXPECT_THROW(sample_frames(0.0, 4.0, 8.0, 30.0, 100), std::out_of_range);
  EXPECT_THROW(sample_frames(2.0, 1.0, 8.0, 30.0, 100), std::out_of_range);
}

TEST(SampleFrames, MatchesIntegerRoundingOracle) {
  // Frame-aligned spans: sample k sits at source position s + k * S / E.
  // Nearest frame = s + floor((2 k S + E) / (2 E)); k runs while k S < (e - s) E.
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t S = 30, E = 8;
    const std::size_t s = rng.uniform_index(300);
    const std::size_t e = s + 1 + rng.uniform_index(200);
    std::vector<std::size_t> expect;
    for (std::size_t k = 0; k * S < (e - s) * E; ++k) expect.push_back(s + (2 * k * S + E) / (2 * E));
    const auto got = sample_frames(static_cast<double>(s) / S, static_cast<double>(e) / S, E, S, 600);
    EXPECT_EQ(got, expect) << "span [" << s << ", " << e << ")";
  }
}
