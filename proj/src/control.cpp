#include "softtrack/control.hpp"

#include <cmath>

namespace softtrack {

ReferenceSignals reference(double q, double q_dot, double q_d, double q_d_dot,
                           double q_d_ddot, double lambda) {
    ReferenceSignals r;
    r.q_err = q - q_d;
    r.q_r_dot = q_d_dot - lambda * r.q_err;
    r.q_r_ddot = q_d_ddot - lambda * (q_dot - q_d_dot);
    r.s = q_dot - r.q_r_dot;
    return r;
}

Eigen::RowVector3d regressor(double q, double q_dot, double q_r_dot, double q_r_ddot,
                             const Shape& shape) {
    // M = theta_1 a(q), C = 1/2 theta_1 a'(q) q_dot with theta_1 = m L^2, so
    // the first column carries the shape function only.
    return {shape.a * q_r_ddot + 0.5 * shape.da * q_dot * q_r_dot, q, q_r_dot};
}

double control_law(const Eigen::RowVector3d& y, const ParamEstimate& theta_hat,
                   double s, double k_d) {
    return y.dot(theta_hat) - k_d * s;
}

ParamEstimate adapt(const ParamEstimate& theta_hat, const Eigen::RowVector3d& y,
                    double s, const Eigen::Matrix3d& gamma, double h) {
    return theta_hat - h * (gamma * y.transpose() * s);
}

double RateFilter::update(double q, double h) {
    if (!primed_) {
        primed_ = true;
        prev_q_ = q;
        rate_ = 0.0;
        return rate_;
    }
    const double diff = (q - prev_q_) / h;
    prev_q_ = q;
    const double tau_f = 1.0 / (2.0 * M_PI * cutoff_hz_);
    const double alpha = h / (tau_f + h);
    rate_ += alpha * (diff - rate_);
    return rate_;
}

double lyapunov(double inertia, double s, const ParamEstimate& theta_err,
                const Eigen::Matrix3d& gamma) {
    return 0.5 * inertia * s * s +
           0.5 * theta_err.dot(gamma.ldlt().solve(theta_err));
}

AdaptiveController::Output AdaptiveController::update(double q, double q_dot, double q_d,
                                                      double q_d_dot, double q_d_ddot,
                                                      double h) {
    const ReferenceSignals ref =
        reference(q, q_dot, q_d, q_d_dot, q_d_ddot, gains_.lambda);
    const Shape shape = shape_fn(q);

    Output out;
    out.y = regressor(q, q_dot, ref.q_r_dot, ref.q_r_ddot, shape);
    out.s = ref.s;
    out.q_err = ref.q_err;
    out.tau = control_law(out.y, theta_, ref.s, gains_.k_d);

    theta_ = adapt(theta_, out.y, ref.s, gains_.gamma, h);
    if (clamp_) theta_ = theta_.cwiseMax(0.0);
    return out;
}

}  // namespace softtrack
