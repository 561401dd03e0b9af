#include <gtest/gtest.h>

#include <cstdlib>
#include <stdexcept>

#include "qstomo/parallel.hpp"

using namespace qstomo;

TEST(Parallel, OrderedMapEmitsInIndexOrder) {
  for (int jobs : {1, 2, 5}) {
    std::vector<int> seen;
    ordered_map<int>(
        37, jobs, [](int i) { return i * i; },
        [&](int i, int& r) {
          EXPECT_EQ(r, i * i);
          seen.push_back(i);
        });
    ASSERT_EQ(seen.size(), 37u);
    for (int i = 0; i < 37; ++i) EXPECT_EQ(seen[i], i);
  }
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(ordered_map<int>(
                   10, 3,
                   [](int i) {
                     if (i == 4) throw std::runtime_error("boom");
                     return i;
                   },
                   [](int, int&) {}),
               std::runtime_error);
}

TEST(Parallel, ForCoversRange) {
  std::vector<int> hit(101, 0);
  parallel_for(101, 4, [&](int i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(Parallel, JobsResolution) {
  EXPECT_EQ(resolve_jobs(3), 3);
  setenv("QS_TOMO_JOBS", "5", 1);
  EXPECT_EQ(resolve_jobs(0), 5);
  unsetenv("QS_TOMO_JOBS");
  EXPECT_EQ(resolve_jobs(0), 1);
}
