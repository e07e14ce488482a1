#pragma once
#include <cstdint>
#include <random>

#include "softtrack/dynamics.hpp"

namespace softtrack {

// Piezoresistive skin channel: curvature -> strain -> resistance ->
// voltage divider -> quantized counts, with Gaussian resistance noise and
// a first-order sensor lag.
struct SkinParams {
    double gauge_factor = 10.0;  // dR/R = GF * eps
    double r0 = 1000.0;          // ohm, unstrained
    double r_fixed = 1000.0;     // ohm, divider resistor
    double vcc = 5.0;            // V
    int adc_bits = 10;
    double noise_sd = 5.0;       // ohm
    double lag_tau = 0.02;       // s; 0 disables the lag
    double quad_gain = 0.0;      // optional quadratic strain term
    char side = 'A';

    bool valid() const {
        return gauge_factor > 0.0 && r0 > 0.0 && r_fixed > 0.0 &&
               adc_bits >= 8 && adc_bits <= 16 && noise_sd >= 0.0 && lag_tau >= 0.0;
    }
    int adc_max() const { return (1 << adc_bits) - 1; }
};

// One time-stamped tuple of raw strain counts and the actuation that was
// active when it was sampled.
struct SensorFrame {
    double t = 0.0;
    int raw_a = 0;
    int raw_b = 0;
    double duty_a = 0.0;
    double duty_b = 0.0;
};

// Tension-only skin strain; the compressed side reads zero.
double strain(const SegmentParams& params, const SkinParams& skin, double q);

// Deterministic resistance map (no noise, no lag).
double resistance(const SkinParams& skin, double eps);

// Divider + quantizer.
int read_adc(const SkinParams& skin, double r);

// Mutable per-skin sampling state: lag filter memory and noise stream.
class SkinChannel {
  public:
    SkinChannel(const SkinParams& params, std::uint64_t seed);

    // Advances the lag by h, draws one noise sample, returns ADC counts.
    int sample(const SegmentParams& segment, double q, double h);

    const SkinParams& params() const { return params_; }

  private:
    double gaussian();

    SkinParams params_;
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
    double r_filt_ = 0.0;
    bool primed_ = false;
};

// Both skins of one segment plus frame packaging.
class SensorRig {
  public:
    SensorRig(const SegmentParams& segment, const SkinParams& skin_a,
              const SkinParams& skin_b, std::uint64_t seed);

    SensorFrame sample(const RobotState& state, double duty_a, double duty_b,
                       double t, double h);

  private:
    SegmentParams segment_;
    SkinChannel chan_a_;
    SkinChannel chan_b_;
};

}  // namespace softtrack
