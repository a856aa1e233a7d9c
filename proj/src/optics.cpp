#include "crowdverify/optics.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/distributions/non_central_chi_squared.hpp>

namespace crowdverify {

namespace {

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const BeamParams& beam) {
  if (!positive(beam.wavelength) || !positive(beam.transmit_power) || !positive(beam.w0) ||
      !positive(beam.wz_target) || !positive(beam.rx_aperture_radius)) {
    throw OpticsError("beam: all parameters must be positive");
  }
  if (beam.wz_target < beam.w0) throw OpticsError("beam: wz_target must be >= w0");
}

void validate(const MrrParams& mrr) {
  if (!positive(mrr.aperture_radius)) throw OpticsError("mrr: aperture_radius must be > 0");
  if (!(mrr.reflectivity > 0.0 && mrr.reflectivity <= 1.0)) throw OpticsError("mrr: reflectivity must be in (0,1]");
  if (!(mrr.modulation_depth > 0.0 && mrr.modulation_depth <= 1.0)) {
    throw OpticsError("mrr: modulation_depth must be in (0,1]");
  }
}

void validate(const LinkNoise& noise) {
  if (!(noise.pointing_jitter_sigma >= 0.0) || !(noise.detector_threshold >= 0.0)) {
    throw OpticsError("noise: jitter sigma and detector threshold must be >= 0");
  }
  if (noise.jitter_ratio && !(*noise.jitter_ratio >= 0.0)) throw OpticsError("noise: jitter_ratio must be >= 0");
}

void validate(const ScanConfig& config) {
  if (!positive(config.dwell_time)) throw OpticsError("scan: dwell_time must be > 0");
  if (config.num_uavs < 1) throw OpticsError("scan: num_uavs must be >= 1");
  if (!positive(config.region_area)) throw OpticsError("scan: region_area must be > 0");
  if (!(config.overlap_factor >= 1.0)) throw OpticsError("scan: overlap_factor must be >= 1");
}

double rayleigh_range(const BeamParams& beam) {
  return std::numbers::pi * beam.w0 * beam.w0 / beam.wavelength;
}

double beam_radius_at(double range_m, const BeamParams& beam) {
  if (!(range_m >= 0.0)) throw OpticsError("beam_radius_at: range must be >= 0");
  const double q = range_m / rayleigh_range(beam);
  return beam.w0 * std::sqrt(1.0 + q * q);
}

double waist_for_radius(double wz, double range_m, double wavelength) {
  // wz^2 = u + c^2 / u with u = w0^2, c = L * lambda / pi
  const double c = range_m * wavelength / std::numbers::pi;
  const double wz2 = wz * wz;
  const double disc = wz2 * wz2 - 4.0 * c * c;
  if (disc < 0.0) {
    throw OpticsError("waist_for_radius: radius " + std::to_string(wz) + " m is below the diffraction limit at range");
  }
  // Smaller root, written to avoid cancellation when c << wz^2.
  const double u = 2.0 * c * c / (wz2 + std::sqrt(disc));
  return std::sqrt(u);
}

double captured_fraction(double aperture, double w, double offset) {
  if (aperture <= 0.0) return 0.0;
  if (offset <= 0.0) return -std::expm1(-2.0 * aperture * aperture / (w * w));
  // Per-axis standard deviation of the normalized irradiance is w / 2, so the
  // captured fraction is a noncentral chi-square(2) CDF.
  const double s = w / 2.0;
  const double lambda = (offset / s) * (offset / s);
  boost::math::non_central_chi_squared dist(2.0, lambda);
  return boost::math::cdf(dist, (aperture / s) * (aperture / s));
}

double return_capture_fraction(double range_m, const BeamParams& beam, const MrrParams& mrr) {
  // The retro-reflected beam leaves the MRR with waist equal to its aperture.
  BeamParams ret = beam;
  ret.w0 = mrr.aperture_radius;
  const double w_ret = beam_radius_at(range_m, ret);
  return captured_fraction(beam.rx_aperture_radius, w_ret);
}

double received_power_at_offset(double range_m, const BeamParams& beam, const MrrParams& mrr, double offset) {
  const double w = beam_radius_at(range_m, beam);
  return beam.transmit_power * captured_fraction(mrr.aperture_radius, w, offset) * mrr.reflectivity *
         mrr.modulation_depth * return_capture_fraction(range_m, beam, mrr);
}

double received_power(double range_m, const BeamParams& beam, const MrrParams& mrr, const LinkNoise& /*noise*/) {
  if (!(range_m > 0.0)) throw OpticsError("received_power: range must be > 0");
  return received_power_at_offset(range_m, beam, mrr, 0.0);
}

double effective_jitter_sigma(double range_m, const BeamParams& beam, const LinkNoise& noise) {
  if (noise.jitter_ratio) return *noise.jitter_ratio * beam_radius_at(range_m, beam);
  return noise.pointing_jitter_sigma;
}

double outage_probability(double range_m, const BeamParams& beam, const MrrParams& mrr, const LinkNoise& noise) {
  if (!(range_m > 0.0)) throw OpticsError("outage_probability: range must be > 0");
  const double threshold = noise.detector_threshold;
  if (threshold <= 0.0) return 0.0;
  const double p0 = received_power_at_offset(range_m, beam, mrr, 0.0);
  if (p0 < threshold) return 1.0;
  const double sigma = effective_jitter_sigma(range_m, beam, noise);
  if (sigma <= 0.0) return 0.0;

  // Bracket the offset where power crosses the threshold, then bisect.
  const double w = beam_radius_at(range_m, beam);
  double lo = 0.0;
  double hi = w;
  while (received_power_at_offset(range_m, beam, mrr, hi) >= threshold) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6 * w) return 0.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (received_power_at_offset(range_m, beam, mrr, mid) >= threshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_th = 0.5 * (lo + hi);
  return std::exp(-r_th * r_th / (2.0 * sigma * sigma));
}

long long pointing_directions(const ScanConfig& config, double wz) {
  if (!(wz > 0.0)) throw OpticsError("scan_time: wz must be > 0");
  validate(config);
  const double footprint = std::numbers::pi * wz * wz;
  return static_cast<long long>(std::ceil(config.region_area * config.overlap_factor / footprint));
}

double scan_time(const ScanConfig& config, double wz) {
  const long long n = pointing_directions(config, wz);
  const long long per_uav = (n + config.num_uavs - 1) / config.num_uavs;
  return static_cast<double>(per_uav) * config.dwell_time;
}

std::vector<TradeoffRow> tradeoff_sweep(std::span<const double> wz_values, double range_m, const BeamParams& beam,
                                        const MrrParams& mrr, const LinkNoise& noise, const ScanConfig& config) {
  if (wz_values.empty()) throw OpticsError("tradeoff_sweep: no beam radii given");
  for (std::size_t i = 0; i < wz_values.size(); ++i) {
    if (!(wz_values[i] > 0.0)) throw OpticsError("tradeoff_sweep: beam radii must be positive");
    if (i > 0 && !(wz_values[i] > wz_values[i - 1])) {
      throw OpticsError("tradeoff_sweep: beam radii must be strictly increasing");
    }
  }
  std::vector<TradeoffRow> rows;
  rows.reserve(wz_values.size());
  for (double wz : wz_values) {
    BeamParams b = beam;
    b.w0 = waist_for_radius(wz, range_m, beam.wavelength);
    b.wz_target = wz;
    rows.push_back({wz, scan_time(config, wz), outage_probability(range_m, b, mrr, noise)});
  }
  return rows;
}

}  // namespace crowdverify
