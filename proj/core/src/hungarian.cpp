#include "propshare/hungarian.hpp"

#include <limits>
#include <vector>

namespace propshare {

namespace {

// Potentials-based Hungarian method (1-indexed internally, column 0 is the
// scanning sentinel). Minimizes cost over injective row->column assignments;
// requires rows <= cols. Returns col_to_row (0 = unassigned).
std::vector<std::size_t> min_cost_assignment(std::size_t rows, std::size_t cols,
                                             const std::vector<std::vector<double>>& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);

  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t scan = 0;
    std::vector<double> min_reduced(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[scan] = 1;
      const std::size_t row = match[scan];
      double delta = kInf;
      std::size_t next = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double reduced = cost[row - 1][j - 1] - u[row] - v[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          way[j] = scan;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          next = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      scan = next;
    } while (match[scan] != 0);
    // Augment along the alternating path.
    do {
      const std::size_t prev = way[scan];
      match[scan] = match[prev];
      scan = prev;
    } while (scan != 0);
  }
  return match;
}

}  // namespace

AssignmentResult max_weight_assignment(const Matrix& weights) {
  const std::size_t r = weights.rows();
  const std::size_t c = weights.cols();
  AssignmentResult result;
  result.row_to_col.assign(r, AssignmentResult::npos);
  if (r == 0 || c == 0) return result;

  const bool transpose = r > c;
  const std::size_t rows = transpose ? c : r;
  const std::size_t cols = transpose ? r : c;
  std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      cost[i][j] = transpose ? -weights(j, i) : -weights(i, j);

  const std::vector<std::size_t> match = min_cost_assignment(rows, cols, cost);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (match[j] == 0) continue;
    const std::size_t row = transpose ? j - 1 : match[j] - 1;
    const std::size_t col = transpose ? match[j] - 1 : j - 1;
    result.row_to_col[row] = col;
    result.value += weights(row, col);
  }
  return result;
}

}  // namespace propshare
