#include "floeda/field_grid.hpp"

#include <algorithm>
#include <cmath>

#include "floeda/errors.hpp"

namespace floeda {

FieldGrid::FieldGrid(int n, double time)
    : n_(n), time_(time), data_(static_cast<std::size_t>(n) * n * kComponents, 0.0) {
  if (n < 2) throw ConfigError("field grid resolution must be at least 2");
}

double FieldGrid::max_speed() const {
  double best = 0.0;
  for (std::size_t k = 0; k < data_.size(); k += kComponents)
    best = std::max(best, std::hypot(data_[k], data_[k + 1]));
  return best;
}

} // namespace floeda
