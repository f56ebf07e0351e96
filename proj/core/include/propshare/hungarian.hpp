#pragma once

#include <cstddef>
#include <vector>

#include "propshare/matrix.hpp"

namespace propshare {

struct AssignmentResult {
  double value = 0.0;
  // row_to_col[i] = matched column of row i, or npos when unmatched
  // (only possible when rows > cols).
  std::vector<std::size_t> row_to_col;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Maximum-weight injective assignment of rows to columns (rectangular
// instances allowed; the smaller side is matched completely). Hungarian
// algorithm with potentials, O(min^2 * max).
AssignmentResult max_weight_assignment(const Matrix& weights);

}  // namespace propshare
