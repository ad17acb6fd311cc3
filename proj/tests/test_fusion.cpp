#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fanet/fusion.hpp"
#include "fanet/rng.hpp"

using namespace fanet;

TEST_CASE("fusing with a zero temporal vector returns the spatial scores") {
  const ScoreVector spt = {0.3, 0.6, 0.9};
  const ScoreVector tmp = {0.0, 0.0, 0.0};
  CHECK(fuse_scores(spt, tmp) == spt);
}

TEST_CASE("a saturated temporal vector absorbs everything") {
  const ScoreVector spt = {0.3, 0.6, 0.9};
  const ScoreVector tmp = {1.0, 1.0, 1.0};
  CHECK(fuse_scores(spt, tmp) == ScoreVector{1.0, 1.0, 1.0});
}

TEST_CASE("fusion hand value") {
  const auto out = fuse_scores({0.6}, {0.5});
  CHECK(out[0] == Catch::Approx(0.8));
}

TEST_CASE("fusion rejects bad input") {
  CHECK_THROWS_AS(fuse_scores({0.5, 0.5}, {0.5}), PreconditionError);
  CHECK_THROWS_AS(fuse_scores({1.5}, {0.5}), PreconditionError);
  CHECK_THROWS_AS(fuse_scores({0.5}, {-0.1}), PreconditionError);
}

TEST_CASE("fusion stays in range, dominates both inputs, and is monotone") {
  Rng rng(401);
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    const double fused = fuse_scores({a}, {b})[0];
    CHECK(fused >= 0.0);
    CHECK(fused <= 1.0);
    CHECK(fused >= a);
    CHECK(fused >= b);

    const double bumped = std::min(1.0, a + rng.uniform(0.0, 0.2));
    CHECK(fuse_scores({bumped}, {b})[0] >= fused);
    CHECK(fuse_scores({a}, {std::min(1.0, b + 0.1)})[0] >= fused);
  }
}

TEST_CASE("fusion is numerically symmetric") {
  Rng rng(402);
  for (int i = 0; i < 5000; ++i) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    const double ab = fuse_scores({a}, {b})[0];
    const double ba = fuse_scores({b}, {a})[0];
    CHECK(ab == Catch::Approx(ba).margin(1e-15));
  }
}

TEST_CASE("cascade average") {
  const ScoreVector single = {0.4, 0.8};
  CHECK(cascade_average({single}) == single);

  const auto mean = cascade_average({{0.2, 1.0}, {0.8, 0.0}});
  CHECK(mean[0] == Catch::Approx(0.5));
  CHECK(mean[1] == Catch::Approx(0.5));

  const auto same = cascade_average({{0.3}, {0.3}, {0.3}});
  CHECK(same[0] == Catch::Approx(0.3));

  CHECK_THROWS_AS(cascade_average({}), PreconditionError);
  CHECK_THROWS_AS(cascade_average({{0.1}, {0.1, 0.2}}), PreconditionError);
}

TEST_CASE("head combination orders") {
  const std::vector<ScoreVector> stages = {{0.2}, {0.4}};
  const ScoreVector temporal = {0.5};
  // Average first: fuse(0.3, 0.5) = 0.5 + 0.3 * 0.5 = 0.65
  const auto after = combine_head_scores(stages, temporal, true);
  CHECK(after[0] == Catch::Approx(0.65));
  // Fuse first: mean(fuse(0.2, .5), fuse(0.4, .5)) = mean(0.6, 0.7) = 0.65
  const auto before = combine_head_scores(stages, temporal, false);
  CHECK(before[0] == Catch::Approx(0.65));
}
