// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "forge/core/common.hpp"

namespace forge {

// Centered 2D discrete Fourier transform (zero frequency at row H/2, col W/2).
// Implemented as two dense DFT-matrix products, which is exact and fast at
// phantom sizes.
MatC kspace_forward(const MatD& image);
MatC kspace_inverse(const MatC& kspace);

/// 1D Cartesian column undersampling pattern with a fully sampled center band.
struct KspaceMask {
  int width = 0;
  int acceleration = 1;
  double center_fraction = 0.125;
  std::vector<bool> kept_columns;

  int kept_count() const {
    int n = 0;
    for (bool b : kept_columns) n += b ? 1 : 0;
    return n;
  }
  double density() const { return static_cast<double>(kept_count()) / width; }
};

/// Center band occupies columns [width/2 - n/2, width/2 + n/2) where
/// n = round(center_fraction * width).
KspaceMask make_undersampling_mask(int width, int acceleration, double center_fraction,
                                   std::uint64_t seed);

/// Forward transform with masked-out columns zeroed; the spectrum the
/// degraded acquisition retains.
MatC undersampled_kspace(const MatD& image, const KspaceMask& mask);

/// Masked k-space, inverse transform, magnitude, rescaled into [0,1].
MatD undersample_zero_fill(const MatD& image, const KspaceMask& mask);

}  // namespace forge
