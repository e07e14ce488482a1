#include "softtrack/trajectory.hpp"

#include <cmath>

#include "softtrack/errors.hpp"

namespace softtrack {

void TrajectorySpec::eval(double t, double& q_d, double& q_d_dot, double& q_d_ddot) const {
    const double s = std::sin(omega * t);
    const double c = std::cos(omega * t);
    q_d = offset + amp_sin * s + amp_cos * c;
    q_d_dot = omega * (amp_sin * c - amp_cos * s);
    q_d_ddot = -omega * omega * (amp_sin * s + amp_cos * c);
}

TrajectorySpec TrajectorySpec::preset(const std::string& name) {
    constexpr double pi = 3.14159265358979323846;
    TrajectorySpec t;
    t.name = name;
    if (name == "uni_low") {
        t.offset = pi / 8.0;
        t.amp_cos = -pi / 9.0;
        t.omega = pi / 12.0;
    } else if (name == "uni_high") {
        t.offset = pi / 8.0;
        t.amp_cos = -pi / 9.0;
        t.omega = pi / 3.0;
    } else if (name == "bi_low") {
        t.amp_sin = pi / 6.0;
        t.omega = pi / 6.0;
        t.bidirectional = true;
    } else if (name == "bi_high") {
        t.amp_sin = pi / 6.0;
        t.omega = pi / 4.0;
        t.bidirectional = true;
    } else {
        throw ConfigError("unknown trajectory preset: " + name);
    }
    return t;
}

}  // namespace softtrack
