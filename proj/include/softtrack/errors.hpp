#pragma once
#include <stdexcept>
#include <string>

namespace softtrack {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrator produced NaN/Inf: unstable configuration or too-large step.
struct NonFiniteState : Error {
    using Error::Error;
};

// Pneumatic command drove both compartments at once.
struct BothCompartmentsActive : Error {
    using Error::Error;
};

// Calibration normal equations too ill-conditioned to trust.
struct FitIllConditioned : Error {
    using Error::Error;
};

// Estimator input does not match the model's input width.
struct DimensionMismatch : Error {
    using Error::Error;
};

// Training loss went non-finite, or a closed-loop run pinned at the
// workspace guard for longer than the allowed dwell.
struct Diverged : Error {
    using Error::Error;
};

// Malformed configuration file or override.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace softtrack
