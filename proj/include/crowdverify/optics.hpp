#pragma once

// Gaussian-beam retro-reflector link budget, pointing-jitter outage and
// scan-time model for UAV optical interrogation.
//
// Beam radii follow the 1/e^2 irradiance convention (w, not diameter).

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace crowdverify {

struct BeamParams {
  double wavelength = 1550e-9;     // m
  double transmit_power = 1.0;     // W
  double w0 = 0.01;                // waist radius, m
  double wz_target = 0.01;         // beam radius at interrogation range, m
  double rx_aperture_radius = 0.05;  // UAV receive telescope, m
};

struct MrrParams {
  double aperture_radius = 0.01;  // m
  double reflectivity = 0.8;
  double modulation_depth = 0.5;
};

struct LinkNoise {
  double pointing_jitter_sigma = 0.0;  // m, Rayleigh parameter of the radial error
  double detector_threshold = 0.0;     // W
  /// When set, the jitter sigma is this multiple of the beam radius at range
  /// and pointing_jitter_sigma is ignored.
  std::optional<double> jitter_ratio;
};

struct ScanConfig {
  double dwell_time = 0.050;  // s per pointing direction
  int num_uavs = 20;
  double region_area = 9.0e6;  // m^2
  double overlap_factor = 1.0;
};

class OpticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const BeamParams& beam);
void validate(const MrrParams& mrr);
void validate(const LinkNoise& noise);
void validate(const ScanConfig& config);

double rayleigh_range(const BeamParams& beam);
double beam_radius_at(double range_m, const BeamParams& beam);

/// Waist radius whose far-field beam reaches radius `wz` at `range_m`. Of the
/// two solutions the smaller (diverging) waist is returned.
double waist_for_radius(double wz, double range_m, double wavelength);

/// Fraction of a Gaussian beam of radius w captured by a disc of radius
/// `aperture` whose center is `offset` from the beam axis.
double captured_fraction(double aperture, double w, double offset = 0.0);

/// Fraction of the diffraction-limited return beam that reaches the UAV
/// receive aperture.
double return_capture_fraction(double range_m, const BeamParams& beam, const MrrParams& mrr);

double received_power_at_offset(double range_m, const BeamParams& beam, const MrrParams& mrr, double offset);

/// Mean (perfectly pointed) received power, W.
double received_power(double range_m, const BeamParams& beam, const MrrParams& mrr, const LinkNoise& noise);

double effective_jitter_sigma(double range_m, const BeamParams& beam, const LinkNoise& noise);

/// P(received power < detector threshold) under Rayleigh-distributed radial
/// pointing error. Received power falls monotonically with the offset, so
/// this is the Rayleigh tail beyond the offset where power hits threshold.
double outage_probability(double range_m, const BeamParams& beam, const MrrParams& mrr, const LinkNoise& noise);

long long pointing_directions(const ScanConfig& config, double wz);
double scan_time(const ScanConfig& config, double wz);

struct TradeoffRow {
  double wz = 0.0;
  double scan_time = 0.0;
  double outage = 0.0;
};

std::vector<TradeoffRow> tradeoff_sweep(std::span<const double> wz_values, double range_m, const BeamParams& beam,
                                        const MrrParams& mrr, const LinkNoise& noise, const ScanConfig& config);

}  // namespace crowdverify
