#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "fanet/errors.hpp"

namespace fanet {

/// Result of solve_assignment(): matched (row, column) pairs with positive
/// score, plus their total score.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

namespace detail {

/// Kuhn-Munkres with potentials on a square cost matrix (minimization).
/// Returns row -> column. O(n^3).
inline std::vector<int> hungarian_min(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Maximum-total-score matching over a non-negative (possibly rectangular)
/// score matrix, solved with the Hungarian method on the padded square
/// complement. Zero-score cells never produce a pair, so rows/columns with no
/// positive candidate stay unmatched.
inline Assignment solve_assignment(
    const std::vector<std::vector<double>>& score) {
  const std::size_t rows = score.size();
  const std::size_t cols = rows == 0 ? 0 : score.front().size();
  double max_score = 0.0;
  for (const auto& row : score) {
    if (row.size() != cols) {
      throw PreconditionError("solve_assignment: ragged matrix");
    }
    for (double s : row) {
      if (!(s >= 0.0)) {
        throw PreconditionError("solve_assignment: negative or NaN score");
      }
      max_score = std::max(max_score, s);
    }
  }

  Assignment result;
  if (rows == 0 || cols == 0) return result;

  // Pad to square; cost = max_score - score so that minimizing total cost
  // maximizes total score. Padding cells behave like score 0.
  const std::size_t n = std::max(rows, cols);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, max_score));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      cost[i][j] = max_score - score[i][j];
    }
  }

  const std::vector<int> row_to_col = detail::hungarian_min(cost);
  for (std::size_t i = 0; i < rows; ++i) {
    const int j = row_to_col[i];
    if (j < 0 || static_cast<std::size_t>(j) >= cols) continue;
    if (score[i][static_cast<std::size_t>(j)] > 0.0) {
      result.pairs.emplace_back(i, static_cast<std::size_t>(j));
      result.total += score[i][static_cast<std::size_t>(j)];
    }
  }
  return result;
}

}  // namespace fanet
