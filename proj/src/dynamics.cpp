#include "softtrack/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>

namespace softtrack {

namespace {

// Series switch points: truncation error of the expansions below is under
// 1e-12 at these thresholds, while the closed forms start losing digits to
// cancellation. The second derivatives cancel hardest (their numerators are
// O(q^4) differences of O(1) terms), so they switch much earlier.
constexpr double kTipSeriesQ = 1e-6;
constexpr double kComSeriesQ = 1e-3;
constexpr double kCurvSeriesQ = 0.1;

// CoM of a uniform arc in normalized coordinates: com = L * (f(q), g(q)).
//   f(q) = (1 - cos q)/q^2,  g(q) = (q - sin q)/q^2
// and their q-derivatives, used for the inertia shape function.
double f_com(double q) {
    if (std::abs(q) < kComSeriesQ) {
        const double q2 = q * q;
        return 0.5 - q2 / 24.0 + q2 * q2 / 720.0;
    }
    return (1.0 - std::cos(q)) / (q * q);
}

double g_com(double q) {
    if (std::abs(q) < kComSeriesQ) {
        const double q2 = q * q;
        return q / 6.0 - q * q2 / 120.0 + q * q2 * q2 / 5040.0;
    }
    return (q - std::sin(q)) / (q * q);
}

double df_com(double q) {
    if (std::abs(q) < kComSeriesQ) {
        const double q2 = q * q;
        return -q / 12.0 + q * q2 / 180.0 - q * q2 * q2 / 6720.0;
    }
    return (q * std::sin(q) - 2.0 * (1.0 - std::cos(q))) / (q * q * q);
}

double dg_com(double q) {
    if (std::abs(q) < kComSeriesQ) {
        const double q2 = q * q;
        return 1.0 / 6.0 - q2 / 40.0 + q2 * q2 / 1008.0;
    }
    return (2.0 * std::sin(q) - q * (1.0 + std::cos(q))) / (q * q * q);
}

double d2f_com(double q) {
    if (std::abs(q) < kCurvSeriesQ) {
        const double q2 = q * q;
        return -1.0 / 12.0 + q2 / 60.0 - q2 * q2 / 1344.0 + q2 * q2 * q2 / 64800.0;
    }
    const double q2 = q * q;
    return (q2 * std::cos(q) - 4.0 * q * std::sin(q) - 6.0 * std::cos(q) + 6.0) / (q2 * q2);
}

double d2g_com(double q) {
    if (std::abs(q) < kCurvSeriesQ) {
        const double q2 = q * q;
        return q * (-1.0 / 20.0 + q2 / 252.0 - q2 * q2 / 8640.0);
    }
    const double q2 = q * q;
    return (q2 * std::sin(q) + 4.0 * q * std::cos(q) + 2.0 * q - 6.0 * std::sin(q)) / (q2 * q2);
}

struct Deriv {
    double dq;
    double dqd;
};

Deriv ode_rhs(const SegmentParams& p, const RobotState& s, double tau) {
    return {s.q_dot, accel(p, s, tau)};
}

}  // namespace

PlanarPose tip_pose(const SegmentParams& params, double q) {
    const double L = params.length;
    PlanarPose pose;
    pose.theta = q;
    if (std::abs(q) < kTipSeriesQ) {
        const double q2 = q * q;
        pose.x = L * (1.0 - q2 / 6.0 + q2 * q2 / 120.0);
        pose.y = L * (q / 2.0 - q * q2 / 24.0);
    } else {
        pose.x = L * std::sin(q) / q;
        pose.y = L * (1.0 - std::cos(q)) / q;
    }
    return pose;
}

void com_position(const SegmentParams& params, double q, double& x, double& y) {
    x = params.length * f_com(q);
    y = params.length * g_com(q);
}

Shape shape_fn(double q) {
    // a(q) = |d(com)/dq|^2 / L^2 = f'^2 + g'^2; even in q, a(0) = 1/36.
    const double fp = df_com(q);
    const double gp = dg_com(q);
    return {fp * fp + gp * gp,
            2.0 * (fp * d2f_com(q) + gp * d2g_com(q))};
}

DynamicsTerms dynamics_terms(const SegmentParams& params, const RobotState& state) {
    const Shape s = shape_fn(state.q);
    const double ml2 = params.mass * params.length * params.length;
    DynamicsTerms t;
    t.inertia = ml2 * s.a;
    // Single-DOF Christoffel symbol: C = (1/2) dM/dq * qd.
    t.coriolis = 0.5 * ml2 * s.da * state.q_dot;
    t.spring = params.stiffness * state.q;
    t.damper = params.damping * state.q_dot;
    return t;
}

double accel(const SegmentParams& params, const RobotState& state, double tau) {
    const DynamicsTerms t = dynamics_terms(params, state);
    return (tau - t.coriolis * state.q_dot - t.damper - t.spring) / t.inertia;
}

RobotState step(const SegmentParams& params, const RobotState& state, double tau,
                double h, StepStats* stats) {
    const Deriv k1 = ode_rhs(params, state, tau);
    const Deriv k2 = ode_rhs(params, {state.q + 0.5 * h * k1.dq, state.q_dot + 0.5 * h * k1.dqd}, tau);
    const Deriv k3 = ode_rhs(params, {state.q + 0.5 * h * k2.dq, state.q_dot + 0.5 * h * k2.dqd}, tau);
    const Deriv k4 = ode_rhs(params, {state.q + h * k3.dq, state.q_dot + h * k3.dqd}, tau);

    RobotState next;
    next.q = state.q + h / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    next.q_dot = state.q_dot + h / 6.0 * (k1.dqd + 2.0 * k2.dqd + 2.0 * k3.dqd + k4.dqd);

    if (!std::isfinite(next.q) || !std::isfinite(next.q_dot)) {
        throw NonFiniteState("integration produced a non-finite state (h too large or unstable gains)");
    }

    if (stats) stats->steps++;
    if (std::abs(next.q) > kWorkspaceGuard) {
        next.q = next.q > 0.0 ? kWorkspaceGuard : -kWorkspaceGuard;
        // kill outward velocity so the guard acts like a hard stop
        if (next.q * next.q_dot > 0.0) next.q_dot = 0.0;
        if (stats) {
            stats->saturations++;
        } else {
            static std::atomic<int> warned{0};
            if (warned.fetch_add(1) < 3) {
                std::fprintf(stderr, "softtrack: warning: workspace guard hit, |q| clamped to pi\n");
            }
        }
    }
    return next;
}

}  // namespace softtrack
