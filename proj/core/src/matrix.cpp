#include "propshare/matrix.hpp"

#include <algorithm>

#include "propshare/errors.hpp"

namespace propshare {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols()) throw DimensionError("ragged initializer rows");
    std::copy(row.begin(), row.end(), m.row(i).begin());
    ++i;
  }
  return m;
}

void Matrix::set_row(std::size_t i, std::span<const double> values) {
  if (values.size() != cols_) throw DimensionError("row length mismatch");
  std::copy(values.begin(), values.end(), row(i).begin());
}

}  // namespace propshare
