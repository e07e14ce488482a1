#pragma once
#include <Eigen/Dense>

#include "softtrack/dynamics.hpp"

namespace softtrack {

struct ControllerGains {
    double lambda = 3.2;  // 1/s
    double k_d = 0.8;     // N·m·s/rad
    Eigen::Matrix3d gamma = 1.2 * Eigen::Matrix3d::Identity();

    static ControllerGains with_scalar_gamma(double lambda, double k_d, double g) {
        ControllerGains c;
        c.lambda = lambda;
        c.k_d = k_d;
        c.gamma = g * Eigen::Matrix3d::Identity();
        return c;
    }
};

// theta = [m L^2, K, D]
using ParamEstimate = Eigen::Vector3d;

struct ReferenceSignals {
    double q_err = 0.0;    // q - q_d
    double q_r_dot = 0.0;  // virtual reference velocity
    double q_r_ddot = 0.0;
    double s = 0.0;        // sliding variable, q_dot - q_r_dot
};

ReferenceSignals reference(double q, double q_dot, double q_d, double q_d_dot,
                           double q_d_ddot, double lambda);

// Row regressor Y with Y * theta == M q_r_ddot + (C + D) q_r_dot + K q.
Eigen::RowVector3d regressor(double q, double q_dot, double q_r_dot, double q_r_ddot,
                             const Shape& shape);

// tau = Y theta_hat - K_D s
double control_law(const Eigen::RowVector3d& y, const ParamEstimate& theta_hat,
                   double s, double k_d);

// Explicit Euler update of theta_hat_dot = -Gamma Y^T s.
ParamEstimate adapt(const ParamEstimate& theta_hat, const Eigen::RowVector3d& y,
                    double s, const Eigen::Matrix3d& gamma, double h);

// Causal filtered differentiator: backward difference into a first-order
// low-pass with the given cutoff.
class RateFilter {
  public:
    explicit RateFilter(double cutoff_hz = 5.0) : cutoff_hz_(cutoff_hz) {}

    double update(double q, double h);
    void reset() { primed_ = false; rate_ = 0.0; }

  private:
    double cutoff_hz_;
    bool primed_ = false;
    double prev_q_ = 0.0;
    double rate_ = 0.0;
};

// Lyapunov candidate V = 1/2 M s^2 + 1/2 theta_err^T Gamma^-1 theta_err.
// Simulation-only diagnostic: needs the true parameters.
double lyapunov(double inertia, double s, const ParamEstimate& theta_err,
                const Eigen::Matrix3d& gamma);

// One adaptive-control session: parameter estimate plus rate-filter state.
class AdaptiveController {
  public:
    AdaptiveController(const ControllerGains& gains, const ParamEstimate& theta0,
                       double rate_cutoff_hz = 5.0, bool clamp_theta = false)
        : gains_(gains), theta_(theta0), filter_(rate_cutoff_hz), clamp_(clamp_theta) {}

    struct Output {
        double tau = 0.0;
        double s = 0.0;
        double q_err = 0.0;
        Eigen::RowVector3d y;
    };

    // Feedback (q, q_dot) in radians; computes tau with the current estimate,
    // then advances the estimate by one Euler step of the adaptation law.
    Output update(double q, double q_dot, double q_d, double q_d_dot, double q_d_ddot,
                  double h);

    // Filtered rate from a curvature stream (used when only q-hat is available).
    double estimate_rate(double q, double h) { return filter_.update(q, h); }

    const ParamEstimate& theta_hat() const { return theta_; }
    const ControllerGains& gains() const { return gains_; }

  private:
    ControllerGains gains_;
    ParamEstimate theta_;
    RateFilter filter_;
    bool clamp_ = false;
};

}  // namespace softtrack
