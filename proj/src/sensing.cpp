#include "softtrack/sensing.hpp"

#include <algorithm>
#include <cmath>

namespace softtrack {

double strain(const SegmentParams& params, const SkinParams& skin, double q) {
    const double eps = params.skin_offset * q / params.length;
    return skin.side == 'A' ? std::max(0.0, eps) : std::max(0.0, -eps);
}

double resistance(const SkinParams& skin, double eps) {
    return skin.r0 * (1.0 + skin.gauge_factor * eps + skin.quad_gain * eps * eps);
}

int read_adc(const SkinParams& skin, double r) {
    // divider ratio as 1/(1 + rf/r) so r -> inf saturates cleanly
    const double ratio = 1.0 / (1.0 + skin.r_fixed / r);
    const int counts = static_cast<int>(std::floor(ratio * skin.adc_max()));
    return std::clamp(counts, 0, skin.adc_max());
}

SkinChannel::SkinChannel(const SkinParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {}

// Marsaglia polar method; std::normal_distribution is not pinned down by the
// standard, this is.
double SkinChannel::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double u, v, s;
    do {
        u = uni(rng_);
        v = uni(rng_);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

int SkinChannel::sample(const SegmentParams& segment, double q, double h) {
    double r = resistance(params_, strain(segment, params_, q));
    if (params_.noise_sd > 0.0) r += params_.noise_sd * gaussian();
    if (params_.lag_tau > 0.0) {
        if (!primed_) {
            r_filt_ = r;
            primed_ = true;
        } else {
            r_filt_ += (h / params_.lag_tau) * (r - r_filt_);
        }
        r = r_filt_;
    }
    return read_adc(params_, std::max(r, 1e-9));
}

SensorRig::SensorRig(const SegmentParams& segment, const SkinParams& skin_a,
                     const SkinParams& skin_b, std::uint64_t seed)
    : segment_(segment),
      chan_a_(skin_a, seed * 0x9e3779b97f4a7c15ULL + 1),
      chan_b_(skin_b, seed * 0x9e3779b97f4a7c15ULL + 2) {}

SensorFrame SensorRig::sample(const RobotState& state, double duty_a, double duty_b,
                              double t, double h) {
    SensorFrame f;
    f.t = t;
    f.raw_a = chan_a_.sample(segment_, state.q, h);
    f.raw_b = chan_b_.sample(segment_, state.q, h);
    f.duty_a = duty_a;
    f.duty_b = duty_b;
    return f;
}

}  // namespace softtrack
