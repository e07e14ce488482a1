#include "softtrack/actuation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace softtrack {

namespace {

double clamp_duty(double u) { return std::clamp(u, 0.0, 255.0); }

double one_side(double duty, double lin, double quad) {
    const double x = clamp_duty(duty) / 255.0;
    return lin * x + quad * x * x;
}

// Run the plant with a constant duty until |q_dot| stays under tol for the
// hold window; returns the settled curvature.
double settle(const PlantActuator& act, const SegmentParams& params,
              double duty_a, double duty_b, const CalibrationOptions& opts) {
    const double tau = plant_torque(act, duty_a, duty_b);
    const double h = 1.0 / opts.physics_rate;
    RobotState s{};
    double quiet = 0.0;
    double t = 0.0;
    while (t < opts.max_settle_time) {
        s = step(params, s, tau, h);
        t += h;
        quiet = std::abs(s.q_dot) < opts.settle_qdot_tol ? quiet + h : 0.0;
        if (quiet >= opts.settle_hold) return s.q;
    }
    return s.q;  // best effort; the fit residual will expose a bad settle
}

CompartmentMap fit_map(char compartment, const std::vector<double>& duties,
                       const std::vector<double>& theta_ss, double k_nominal) {
    const int n = static_cast<int>(duties.size());

    // torque per the nominal-stiffness hypothesis; comp B bends negative
    Eigen::VectorXd tau(n);
    for (int i = 0; i < n; ++i) tau(i) = std::abs(k_nominal * theta_ss[i]);
    const double tau_ref = std::max(tau.maxCoeff(), 1e-12);

    // raw Vandermonde, for the normal-equations condition check
    Eigen::MatrixXd x_raw(n, 4);
    for (int i = 0; i < n; ++i) {
        x_raw(i, 0) = 1.0;
        for (int k = 1; k < 4; ++k) x_raw(i, k) = x_raw(i, k - 1) * tau(i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x_raw);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    const double cond_normal = smin > 0.0 ? (smax / smin) * (smax / smin)
                                          : std::numeric_limits<double>::infinity();
    if (cond_normal > 1e12) {
        throw FitIllConditioned("calibration fit: normal equations condition " +
                                std::to_string(cond_normal));
    }

    // solve on the normalized torque for accuracy, then unscale
    Eigen::MatrixXd x_s(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double ts = tau(i) / tau_ref;
        x_s(i, 0) = 1.0;
        x_s(i, 1) = ts;
        x_s(i, 2) = ts * ts;
        x_s(i, 3) = ts * ts * ts;
        y(i) = duties[i];
    }
    Eigen::Vector4d d = x_s.colPivHouseholderQr().solve(y);

    CompartmentMap map;
    map.compartment = compartment;
    map.tau_max = tau.maxCoeff();
    map.duty_grid = duties;
    map.theta_ss = theta_ss;
    double scale = 1.0;
    for (int k = 0; k < 4; ++k) {
        map.coeffs[k] = d(k) / scale;
        scale *= tau_ref;
    }
    const Eigen::VectorXd resid = x_s * d - y;
    map.residual_rms = std::sqrt(resid.squaredNorm() / n);
    return map;
}

}  // namespace

double plant_torque(const PlantActuator& act, double duty_a, double duty_b) {
    if (duty_a > 0.0 && duty_b > 0.0) {
        throw BothCompartmentsActive("both compartments commanded at once");
    }
    const double tau = one_side(duty_a, act.gain_lin_a, act.gain_quad_a) -
                       one_side(duty_b, act.gain_lin_b, act.gain_quad_b);
    return std::clamp(tau, -act.max_torque, act.max_torque);
}

double CompartmentMap::eval(double tau_abs) const {
    const double t = tau_abs;
    return clamp_duty(coeffs[0] + t * (coeffs[1] + t * (coeffs[2] + t * coeffs[3])));
}

CalibrationResult calibrate(const PlantActuator& act, const SegmentParams& params,
                            const std::vector<double>& duty_grid,
                            const CalibrationOptions& opts) {
    std::set<double> distinct(duty_grid.begin(), duty_grid.end());
    if (distinct.size() < 8) {
        throw std::invalid_argument("calibration needs >= 8 distinct duty values");
    }

    std::vector<double> theta_a, theta_b;
    theta_a.reserve(duty_grid.size());
    theta_b.reserve(duty_grid.size());
    for (double u : duty_grid) theta_a.push_back(settle(act, params, u, 0.0, opts));
    for (double u : duty_grid) theta_b.push_back(settle(act, params, 0.0, u, opts));

    return {fit_map('A', duty_grid, theta_a, opts.k_nominal),
            fit_map('B', duty_grid, theta_b, opts.k_nominal)};
}

DutyCommand torque_to_duty(const CalibrationResult& maps, double tau) {
    if (tau > 0.0) return {maps.map_a.eval(tau), 0.0};
    if (tau < 0.0) return {0.0, maps.map_b.eval(-tau)};
    return {0.0, 0.0};
}

namespace {

nlohmann::json map_to_json(const CompartmentMap& m) {
    return {{"compartment", std::string(1, m.compartment)},
            {"coeffs", m.coeffs},
            {"residual_rms", m.residual_rms},
            {"tau_max", m.tau_max},
            {"duty_grid", m.duty_grid},
            {"theta_ss", m.theta_ss}};
}

CompartmentMap map_from_json(const nlohmann::json& j) {
    CompartmentMap m;
    m.compartment = j.at("compartment").get<std::string>().at(0);
    m.coeffs = j.at("coeffs").get<std::array<double, 4>>();
    m.residual_rms = j.at("residual_rms").get<double>();
    m.tau_max = j.at("tau_max").get<double>();
    m.duty_grid = j.at("duty_grid").get<std::vector<double>>();
    m.theta_ss = j.at("theta_ss").get<std::vector<double>>();
    return m;
}

}  // namespace

void save_calibration(const CalibrationResult& maps, const std::string& path) {
    nlohmann::json j = {{"compartments", {map_to_json(maps.map_a), map_to_json(maps.map_b)}}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

CalibrationResult load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    CalibrationResult r;
    for (const auto& cj : j.at("compartments")) {
        CompartmentMap m = map_from_json(cj);
        (m.compartment == 'A' ? r.map_a : r.map_b) = m;
    }
    return r;
}

}  // namespace softtrack
