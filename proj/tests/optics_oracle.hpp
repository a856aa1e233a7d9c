#pragma once

// Independent optics oracles: polar Simpson quadrature of the Gaussian
// irradiance and a Monte-Carlo pointing-error sampler.

#include <cmath>
#include <cstdint>
#include <random>

#include "crowdverify/optics.hpp"

namespace testsupport {

using crowdverify::BeamParams;
using crowdverify::MrrParams;

// Composite Simpson over the aperture disc in polar coordinates centered on
// the aperture; the beam axis sits `offset` away along x.
inline double quad_capture(double a, double w, double offset, int n = 240) {
  auto simpson_w = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const double dr = a / n, dt = 2 * M_PI / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double rho = i * dr;
    double inner = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double th = k * dt;
      const double x = offset + rho * std::cos(th), y = rho * std::sin(th);
      inner += simpson_w(k) * std::exp(-2.0 * (x * x + y * y) / (w * w));
    }
    sum += simpson_w(i) * rho * inner * dt / 3.0;
  }
  return sum * dr / 3.0 * 2.0 / (M_PI * w * w);
}

inline double far_radius(double w0, double lambda, double L) {
  const double zr = M_PI * w0 * w0 / lambda;
  return w0 * std::sqrt(1.0 + (L / zr) * (L / zr));
}

inline double oracle_power(double L, const BeamParams& b, const MrrParams& m, double offset) {
  const double w = far_radius(b.w0, b.wavelength, L);
  const double w_ret = far_radius(m.aperture_radius, b.wavelength, L);
  const double g = 1.0 - std::exp(-2.0 * b.rx_aperture_radius * b.rx_aperture_radius / (w_ret * w_ret));
  return b.transmit_power * quad_capture(m.aperture_radius, w, offset, 120) * m.reflectivity * m.modulation_depth * g;
}

// Monte-Carlo outage: bisect the threshold offset on the quadrature power,
// then count 2D Gaussian pointing errors that land beyond it.
inline double mc_outage(double L, const BeamParams& b, const MrrParams& m, double threshold, double sigma, std::uint64_t seed,
                        int samples = 1'000'000) {
  if (oracle_power(L, b, m, 0.0) < threshold) return 1.0;
  const double w = far_radius(b.w0, b.wavelength, L);
  double lo = 0.0, hi = 8.0 * w;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_power(L, b, m, mid) >= threshold ? lo : hi) = mid;
  }
  const double r_th = 0.5 * (lo + hi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  int out = 0;
  for (int i = 0; i < samples; ++i) {
    const double dx = n(rng), dy = n(rng);
    out += std::hypot(dx, dy) > r_th;
  }
  return static_cast<double>(out) / samples;
}

}  // namespace testsupport
