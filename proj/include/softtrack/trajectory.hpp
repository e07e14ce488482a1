#pragma once
#include <string>

namespace softtrack {

// Smooth curvature targets with analytic derivatives:
//   q_d(t) = offset + amp_sin sin(w t) + amp_cos cos(w t)
struct TrajectorySpec {
    std::string name = "custom";
    double offset = 0.0;
    double amp_sin = 0.0;
    double amp_cos = 0.0;
    double omega = 1.0;  // rad/s
    bool bidirectional = false;

    void eval(double t, double& q_d, double& q_d_dot, double& q_d_ddot) const;

    // uni_low, uni_high, bi_low, bi_high
    static TrajectorySpec preset(const std::string& name);
};

}  // namespace softtrack
