#pragma once

#include "floeda/field_grid.hpp"

namespace floeda {

/// ||est - truth||_F / ||truth||_F over all nodes and both components.
double nrmse(const FieldGrid& est, const FieldGrid& truth);

/// Pearson correlation of the flattened (u, v) samples of both fields.
double pcc(const FieldGrid& est, const FieldGrid& truth);

} // namespace floeda
