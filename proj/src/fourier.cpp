// SPDX-License-Identifier: Apache-2.0
#include "forge/corpus/fourier.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "forge/core/rng.hpp"

namespace forge {

namespace {

// D(u, m) = exp(-2*pi*i * (u - N/2) * m / N). Cached per size.
const MatC& dft_matrix(int n) {
  static std::map<int, MatC> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  MatC d(n, n);
  const double step = 2.0 * std::numbers::pi / n;
  for (int u = 0; u < n; ++u) {
    const double freq = u - n / 2;
    for (int m = 0; m < n; ++m) {
      const double phase = -step * freq * m;
      d(u, m) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return cache.emplace(n, std::move(d)).first->second;
}

}  // namespace

MatC kspace_forward(const MatD& image) {
  require(image.allFinite(), "kspace_forward: image contains non-finite values");
  const MatC& dr = dft_matrix(static_cast<int>(image.rows()));
  const MatC& dc = dft_matrix(static_cast<int>(image.cols()));
  return dr * image.cast<std::complex<double>>() * dc.transpose();
}

MatC kspace_inverse(const MatC& kspace) {
  require(kspace.allFinite(), "kspace_inverse: input contains non-finite values");
  const MatC& dr = dft_matrix(static_cast<int>(kspace.rows()));
  const MatC& dc = dft_matrix(static_cast<int>(kspace.cols()));
  const double scale = 1.0 / (static_cast<double>(kspace.rows()) * kspace.cols());
  return scale * (dr.adjoint() * kspace * dc.conjugate());
}

KspaceMask make_undersampling_mask(int width, int acceleration, double center_fraction,
                                   std::uint64_t seed) {
  require(width > 0, "mask width must be positive");
  require(acceleration >= 1, "acceleration must be >= 1");
  require(center_fraction > 0.0 && center_fraction < 1.0,
          "center_fraction must lie in (0, 1)");

  KspaceMask mask;
  mask.width = width;
  mask.acceleration = acceleration;
  mask.center_fraction = center_fraction;
  mask.kept_columns.assign(static_cast<std::size_t>(width), false);

  if (acceleration == 1) {
    mask.kept_columns.assign(static_cast<std::size_t>(width), true);
    return mask;
  }

  require(center_fraction * width < static_cast<double>(width) / acceleration,
          "center band alone exceeds the sampling budget");

  const int n_center = static_cast<int>(std::lround(center_fraction * width));
  const int c0 = width / 2 - n_center / 2;
  for (int c = c0; c < c0 + n_center; ++c) mask.kept_columns[static_cast<std::size_t>(c)] = true;

  const int n_keep = static_cast<int>(std::lround(static_cast<double>(width) / acceleration));
  int n_random = n_keep - n_center;
  if (n_random < 0) n_random = 0;

  std::vector<int> outside;
  for (int c = 0; c < width; ++c)
    if (!mask.kept_columns[static_cast<std::size_t>(c)]) outside.push_back(c);

  Rng rng(hash_seed(seed, "kspace-mask"));
  rng.shuffle(outside);
  for (int i = 0; i < n_random && i < static_cast<int>(outside.size()); ++i)
    mask.kept_columns[static_cast<std::size_t>(outside[static_cast<std::size_t>(i)])] = true;
  return mask;
}

MatC undersampled_kspace(const MatD& image, const KspaceMask& mask) {
  require(static_cast<int>(image.cols()) == mask.width,
          "undersampled_kspace: mask width does not match image width");
  MatC k = kspace_forward(image);
  for (int c = 0; c < mask.width; ++c)
    if (!mask.kept_columns[static_cast<std::size_t>(c)]) k.col(c).setZero();
  return k;
}

MatD undersample_zero_fill(const MatD& image, const KspaceMask& mask) {
  const MatC recon = kspace_inverse(undersampled_kspace(image, mask));
  MatD mag = recon.cwiseAbs();
  const double peak = mag.maxCoeff();
  if (peak > 1.0) mag /= peak;
  return mag;
}

}  // namespace forge
