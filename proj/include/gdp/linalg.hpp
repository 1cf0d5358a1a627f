// Dense symmetric eigendecomposition, matrix exponential, matrix powers.
#pragma once

#include "gdp/types.hpp"

namespace gdp::num {

struct SpectralDecomposition {
  Vec eigenvalues;  // ascending
  Mat eigenvectors; // orthonormal columns, M = U diag(lambda) U^T
};

// Symmetric eigendecomposition. Throws DataError if M is not square or not
// symmetric within `sym_tol` (scaled by max|M|, with an absolute floor).
SpectralDecomposition sym_eig(const Mat& m, double sym_tol = 1e-10);

// exp(scale * M). Symmetric inputs go through the eigendecomposition route;
// general inputs through scaling-and-squaring on the truncated Taylor series.
// `force_series` exists so both routes can be cross-checked.
Mat mat_exp(const Mat& m, double scale = 1.0, bool force_series = false);

// M^k for integer k >= 0 by repeated multiplication. k is capped at 64.
Mat mat_pow(const Mat& m, int k);

}  // namespace gdp::num
