#pragma once
#include <array>
#include <string>
#include <vector>

#include "softtrack/dynamics.hpp"

namespace softtrack {

// Hidden ground-truth pneumatics: duty in [0, 255] per compartment maps to a
// signed torque. Compartment A pushes positive, B negative; mildly nonlinear
// so the cubic calibration fit is exercised.
struct PlantActuator {
    double gain_lin_a = 0.9;
    double gain_quad_a = 0.3;
    double gain_lin_b = 0.85;
    double gain_quad_b = 0.35;
    double max_torque = 1.5;  // N·m, per direction
};

double plant_torque(const PlantActuator& act, double duty_a, double duty_b);

// Cubic |torque| -> duty map for one compartment, the product of calibration.
struct CompartmentMap {
    std::array<double, 4> coeffs{};  // duty = c0 + c1 t + c2 t^2 + c3 t^3
    char compartment = 'A';
    double tau_max = 0.0;            // upper end of the calibrated interval
    double residual_rms = 0.0;       // duty counts
    std::vector<double> duty_grid;
    std::vector<double> theta_ss;    // steady-state curvature per grid point

    double eval(double tau_abs) const;  // clamped to [0, 255]
};

struct CalibrationResult {
    CompartmentMap map_a;
    CompartmentMap map_b;
};

struct CalibrationOptions {
    double k_nominal = 1.0;         // hypothesized stiffness, NOT the true one
    double settle_qdot_tol = 1e-5;  // rad/s
    double settle_hold = 0.5;       // s the velocity must stay under tol
    double physics_rate = kDefaultPhysicsRate;
    double max_settle_time = 60.0;  // s, per grid point
};

// Drives each compartment over duty_grid to steady state, converts the
// steady curvature to torque with k_nominal, and least-squares fits the
// cubic duty(torque) map per compartment.
// Throws std::invalid_argument for a grid with < 8 distinct points and
// FitIllConditioned when cond of the fit's normal equations exceeds 1e12.
CalibrationResult calibrate(const PlantActuator& act, const SegmentParams& params,
                            const std::vector<double>& duty_grid,
                            const CalibrationOptions& opts = {});

struct DutyCommand {
    double duty_a = 0.0;
    double duty_b = 0.0;
};

// Routes a signed torque to the matching compartment; at most one side active.
DutyCommand torque_to_duty(const CalibrationResult& maps, double tau);

void save_calibration(const CalibrationResult& maps, const std::string& path);
CalibrationResult load_calibration(const std::string& path);

}  // namespace softtrack
