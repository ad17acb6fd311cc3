#include <catch2/catch_amalgamated.hpp>

#include "fanet/hungarian.hpp"
#include "fanet/rng.hpp"
#include "oracle_helpers.hpp"

using namespace fanet;

TEST_CASE("zero matrix produces no pairs") {
  const auto result = solve_assignment({{0.0, 0.0}, {0.0, 0.0}});
  CHECK(result.pairs.empty());
  CHECK(result.total == 0.0);
}

TEST_CASE("1x1 matrix") {
  const auto result = solve_assignment({{0.5}});
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(result.total == 0.5);
}

TEST_CASE("prefers the higher-total diagonal") {
  const auto result = solve_assignment({{0.9, 0.1}, {0.8, 0.7}});
  REQUIRE(result.pairs.size() == 2);
  CHECK(result.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(result.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(result.total == Catch::Approx(1.6));
}

TEST_CASE("rejects negative entries and ragged rows") {
  CHECK_THROWS_AS(solve_assignment({{0.5, -0.1}}), PreconditionError);
  CHECK_THROWS_AS(solve_assignment({{0.5, 0.1}, {0.5}}), PreconditionError);
}

TEST_CASE("rectangular matrices leave the surplus side unmatched") {
  const auto wide = solve_assignment({{0.2, 0.9, 0.1}});
  REQUIRE(wide.pairs.size() == 1);
  CHECK(wide.pairs[0].second == 1);

  const auto tall = solve_assignment({{0.2}, {0.9}, {0.4}});
  REQUIRE(tall.pairs.size() == 1);
  CHECK(tall.pairs[0].first == 1);
}

TEST_CASE("matches the brute-force optimum on random matrices") {
  Rng rng(501);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = rng.uniform_int(1, 6);
    const int cols = rng.uniform_int(1, 6);
    std::vector<std::vector<double>> score(rows, std::vector<double>(cols));
    for (auto& row : score) {
      for (double& v : row) {
        // Mix in hard zeros so forbidden cells get exercised.
        v = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
      }
    }
    const auto result = solve_assignment(score);
    const double expected = oracle::best_assignment_total(score);
    CHECK(result.total == expected);

    // Structural sanity: each row/column used at most once, no zero pairs.
    std::vector<bool> row_used(rows, false), col_used(cols, false);
    for (const auto& [i, j] : result.pairs) {
      CHECK_FALSE(row_used[i]);
      CHECK_FALSE(col_used[j]);
      row_used[i] = true;
      col_used[j] = true;
      CHECK(score[i][j] > 0.0);
    }
  }
}
