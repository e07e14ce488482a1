#pragma once
#include <cstdint>

#include "softtrack/errors.hpp"

namespace softtrack {

// Physical description of one planar constant-curvature segment.
// Torque and motion live in the single degree-of-curvature coordinate q.
struct SegmentParams {
    double mass = 0.110;        // kg
    double length = 0.124;      // m, arc length of the inextensible middle layer
    double stiffness = 1.0;     // N·m/rad, torsional K
    double damping = 0.2;       // N·m·s/rad, torsional D
    double skin_offset = 0.015; // m, transverse distance from middle layer to skin

    bool valid() const {
        return mass > 0.0 && length > 0.0 && stiffness >= 0.0 &&
               damping >= 0.0 && skin_offset > 0.0;
    }
};

// Degree of curvature (signed, positive bends toward compartment A) and rate.
struct RobotState {
    double q = 0.0;      // rad
    double q_dot = 0.0;  // rad/s
};

struct PlanarPose {
    double x = 0.0;      // m
    double y = 0.0;      // m
    double theta = 0.0;  // rad
};

// Dimensionless inertia shape a(q) and its derivative, M(q) = m L^2 a(q).
struct Shape {
    double a;
    double da;
};

// Terms of M qdd + C qd + D qd + K q = tau for the current state.
struct DynamicsTerms {
    double inertia;   // M(q), kg·m^2
    double coriolis;  // C(q, qd), kg·m^2/s  (torque contribution is C*qd)
    double spring;    // K q, N·m
    double damper;    // D qd, N·m
};

struct StepStats {
    long steps = 0;
    long saturations = 0;  // workspace-guard hits at |q| = pi
};

// Tip pose of the arc, base at origin, base tangent along +x.
PlanarPose tip_pose(const SegmentParams& params, double q);

// Center of mass of a uniform arc, same frame as tip_pose.
void com_position(const SegmentParams& params, double q, double& x, double& y);

// Shape function of the lumped-mass-at-CoM inertia.
Shape shape_fn(double q);

DynamicsTerms dynamics_terms(const SegmentParams& params, const RobotState& state);

// q̈ solved from the model; M(q) > 0 on the whole workspace.
double accel(const SegmentParams& params, const RobotState& state, double tau);

// One classical RK4 step with tau held constant (zero-order hold).
// Saturates at |q| = pi (guard, counted in stats / warned on stderr).
// Throws NonFiniteState if the step produces NaN/Inf.
RobotState step(const SegmentParams& params, const RobotState& state, double tau,
                double h, StepStats* stats = nullptr);

constexpr double kWorkspaceGuard = 3.14159265358979323846;

// Default physics step used by the harness; small enough that the fast
// pole D/M (≈ 4.3e3 1/s at the nominal parameters) stays inside the RK4
// stability region over the whole workspace.
constexpr double kDefaultPhysicsRate = 3000.0;  // Hz

}  // namespace softtrack
