#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "deepboot/rng.hpp"

namespace deepboot {
namespace {

TEST(RngStream, SameKeySameSequence) {
  RngStream a = RngStream::derive(42, StreamPurpose::trainset);
  RngStream b = RngStream::derive(42, StreamPurpose::trainset);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, PurposesAndSeedsGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (auto p : {StreamPurpose::init, StreamPurpose::trainset, StreamPurpose::real_data, StreamPurpose::ideal_data,
                   StreamPurpose::eval, StreamPurpose::ideal_train_eval})
      firsts.insert(RngStream::derive(seed, p).next_u64());
  EXPECT_EQ(firsts.size(), 24u);
}

TEST(RngStream, SplitDoesNotAdvanceParent) {
  RngStream a(7);
  RngStream b(7);
  (void)a.split(3);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, UniformMomentsAndRange) {
  RngStream r(1);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  // Mean 1/2 (sd 0.2887/sqrt(n)); variance 1/12.
  EXPECT_NEAR(sum / n, 0.5, 4 * 0.2887 / std::sqrt(n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(RngStream, NormalMoments) {
  RngStream r(2);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(RngStream, BelowIsUnbiasedAndInRange) {
  RngStream r(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  const double sd = std::sqrt(n * (1.0 / 7) * (6.0 / 7));
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4 * sd);
}

TEST(RngStream, PermutationIsAPermutation) {
  RngStream r(4);
  for (std::size_t n : {1u, 2u, 17u, 1000u}) {
    auto p = r.permutation(n);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(p[i], i);
  }
}

}  // namespace
}  // namespace deepboot
