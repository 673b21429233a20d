#include "floeda/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "floeda/errors.hpp"

namespace floeda {

namespace {

void check_shapes(const FieldGrid& a, const FieldGrid& b) {
  if (a.n() != b.n()) throw ConfigError("metric: field grids differ in resolution");
}

} // namespace

double nrmse(const FieldGrid& est, const FieldGrid& truth) {
  check_shapes(est, truth);
  double err = 0.0, ref = 0.0;
  const auto& e = est.data();
  const auto& t = truth.data();
  for (std::size_t k = 0; k < t.size(); ++k) {
    err += (e[k] - t[k]) * (e[k] - t[k]);
    ref += t[k] * t[k];
  }
  if (!(ref > 0.0)) throw NumericalError("nrmse: truth field has zero norm");
  return std::sqrt(err / ref);
}

double pcc(const FieldGrid& est, const FieldGrid& truth) {
  check_shapes(est, truth);
  const auto& e = est.data();
  const auto& t = truth.data();
  const double n = static_cast<double>(t.size());
  double me = 0.0, mt = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    me += e[k];
    mt += t[k];
  }
  me /= n;
  mt /= n;
  double cov = 0.0, ve = 0.0, vt = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double de = e[k] - me, dt = t[k] - mt;
    cov += de * dt;
    ve += de * de;
    vt += dt * dt;
  }
  if (!(ve > 0.0) || !(vt > 0.0)) throw NumericalError("pcc: a field has zero variance");
  return std::clamp(cov / std::sqrt(ve * vt), -1.0, 1.0);
}

} // namespace floeda
