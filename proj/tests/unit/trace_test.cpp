#include <gtest/gtest.h>

#include <cmath>

#include "spinfid/error.hpp"
#include "spinfid/trace.hpp"

namespace {

using spinfid::TraceSeries;

TEST(TraceSeries, RejectsBadInput) {
  EXPECT_THROW(TraceSeries({0.0, 1.0}, {1.0}), spinfid::ValidationError);
  EXPECT_THROW(TraceSeries({0.0, 0.0}, {1.0, 2.0}), spinfid::ValidationError);
  EXPECT_THROW(TraceSeries({1.0, 0.0}, {1.0, 2.0}), spinfid::ValidationError);
  EXPECT_THROW(TraceSeries({0.0, 1.0}, {1.0, NAN}), spinfid::ValidationError);
  EXPECT_THROW(TraceSeries({0.0, INFINITY}, {1.0, 1.0}), spinfid::ValidationError);
  EXPECT_NO_THROW(TraceSeries({}, {}));
}

TEST(TraceSeries, WindowIsInclusive) {
  const TraceSeries t({0.0, 1.0, 2.0, 3.0, 4.0}, {10, 11, 12, 13, 14}, "src");
  const auto w = t.window(1.0, 3.0);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w.times()[0], 1.0);
  EXPECT_EQ(w.values()[2], 13.0);
  EXPECT_EQ(w.provenance(), "src");
  EXPECT_TRUE(t.window(5.0, 9.0).empty());
  EXPECT_EQ(t.window_indices(0.5, 10.0), (std::pair<std::size_t, std::size_t>{1, 5}));
}

TEST(TraceSeries, EqualityIgnoresProvenance) {
  EXPECT_EQ(TraceSeries({0.0}, {1.0}, "a"), TraceSeries({0.0}, {1.0}, "b"));
  EXPECT_FALSE(TraceSeries({0.0}, {1.0}) == TraceSeries({0.0}, {2.0}));
}

TEST(UniformGrid, IncludesEndpoint) {
  const auto g = spinfid::uniform_grid(0.0, 70e-12, 0.01e-12);
  ASSERT_EQ(g.size(), 7001u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g[123], 123 * 0.01e-12);
  EXPECT_NEAR(g.back(), 70e-12, 1e-24);
  EXPECT_EQ(spinfid::uniform_grid(1.0, 1.0, 0.5).size(), 1u);
}

TEST(UniformGrid, RejectsBadRange) {
  EXPECT_THROW(spinfid::uniform_grid(0.0, 1.0, 0.0), spinfid::DomainError);
  EXPECT_THROW(spinfid::uniform_grid(1.0, 0.0, 0.1), spinfid::DomainError);
  EXPECT_THROW(spinfid::uniform_grid(0.0, NAN, 0.1), spinfid::DomainError);
}

}  // namespace
