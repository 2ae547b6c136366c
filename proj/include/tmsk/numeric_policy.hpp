#pragma once

#include <cstddef>

namespace tmsk {

// All floating-point thresholds used by the library, in one place.
struct NumericPolicy {
  // An accumulated sparse entry is dropped when |sum| <= drop_relative * sum(|terms|).
  // Signed combination coefficients cancel exactly in exact arithmetic; this
  // removes the roundoff residue so structural zeros are never stored.
  double drop_relative = 1e-13;

  // MSE in [-mse_negative_tolerance * max(1, k(x,x)), 0) is clamped to zero;
  // anything more negative raises NumericalError.
  double mse_negative_tolerance = 1e-10;

  // Largest n accepted by the dense reference predictor.
  std::size_t dense_cap = 2000;

  // Worker threads for the B-column construction of the truncated-grid inverse.
  unsigned build_threads = 1;
};

}  // namespace tmsk
