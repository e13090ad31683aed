#include <gtest/gtest.h>

#include <set>

#include "arfdx/rng.hpp"

using namespace arfdx;

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(DeriveSeed, StageNamesSeparateStreams) {
  std::set<std::uint64_t> seen;
  for (const char* stage : {"synth", "split", "train", "explain", "physician"}) {
    EXPECT_TRUE(seen.insert(derive_seed(7, stage)).second);
  }
  EXPECT_EQ(derive_seed(7, "train"), derive_seed(7, "train"));
  EXPECT_NE(derive_seed(7, "train"), derive_seed(8, "train"));
}

TEST(DeriveSeed, IndicesSeparateStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_TRUE(seen.insert(derive_seed(42, i)).second);
}
