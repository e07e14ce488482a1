#include "softtrack/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

#include "softtrack/csv.hpp"
#include "softtrack/svg.hpp"

namespace softtrack {

namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SkinParams skin_from_config(const Config& cfg, const std::string& section, char side) {
    SkinParams s;
    s.side = side;
    s.gauge_factor = cfg.num(section, "gauge_factor", s.gauge_factor);
    s.r0 = cfg.num(section, "r0", s.r0);
    s.r_fixed = cfg.num(section, "r_fixed", s.r_fixed);
    s.vcc = cfg.num(section, "vcc", s.vcc);
    s.adc_bits = static_cast<int>(cfg.integer(section, "adc_bits", s.adc_bits));
    s.noise_sd = cfg.num(section, "noise_sd", s.noise_sd);
    s.lag_tau = cfg.num(section, "lag_tau", s.lag_tau);
    s.quad_gain = cfg.num(section, "quad_gain", s.quad_gain);
    if (!s.valid()) throw ConfigError("invalid skin parameters in [" + section + "]");
    return s;
}

// Integrate the plant from t0 over `interval` with the duty schedule,
// sub-stepping below the physics rate. Duties are looked up at sub-step
// start times.
void integrate_interval(const SegmentParams& seg, const PlantActuator& act,
                        const DutySchedule& schedule, RobotState& state, double t0,
                        double interval, double physics_rate, StepStats* stats) {
    const int n = std::max(1, static_cast<int>(std::ceil(interval * physics_rate)));
    const double h = interval / n;
    for (int i = 0; i < n; ++i) {
        const DutyCommand duty = schedule.at(t0 + i * h);
        const double tau = plant_torque(act, duty.duty_a, duty.duty_b);
        state = step(seg, state, tau, h, stats);
    }
}

// Two inflate/deflate cycles per active compartment, 5 s each phase; the
// recorded run starts from whatever state remains.
void precycle(const ExperimentConfig& cfg, RobotState& state, SensorRig& rig) {
    DutySchedule sched;
    double t = 0.0;
    const bool bi = cfg.mode == "bi";
    for (int cycle = 0; cycle < 2; ++cycle) {
        sched.events.push_back({t, cfg.duty_hi, 0.0});
        sched.events.push_back({t + 5.0, 0.0, 0.0});
        t += 10.0;
        if (bi) {
            sched.events.push_back({t, 0.0, cfg.duty_hi});
            sched.events.push_back({t + 5.0, 0.0, 0.0});
            t += 10.0;
        }
    }
    const double dt = 1.0 / cfg.sensor_rate;
    StepStats stats;
    for (double tk = 0.0; tk < t; tk += dt) {
        const DutyCommand duty = sched.at(tk);
        rig.sample(state, duty.duty_a, duty.duty_b, tk, dt);
        integrate_interval(cfg.segment, cfg.actuator, sched, state, tk, dt,
                           cfg.physics_rate, &stats);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
    ExperimentConfig e;

    e.mode = cfg.str("collect", "mode", "uni");
    if (e.mode != "uni" && e.mode != "bi") throw ConfigError("collect.mode must be uni or bi");
    const bool bi = e.mode == "bi";

    e.segment.mass = cfg.num("robot", "mass", e.segment.mass);
    e.segment.length = cfg.num("robot", "length", e.segment.length);
    e.segment.stiffness = cfg.num("robot", "stiffness", e.segment.stiffness);
    e.segment.damping = cfg.num("robot", "damping", e.segment.damping);
    e.segment.skin_offset = cfg.num("robot", "skin_offset", e.segment.skin_offset);
    if (!e.segment.valid()) throw ConfigError("invalid [robot] parameters");

    e.skin_a = skin_from_config(cfg, "skin_a", 'A');
    e.skin_b = skin_from_config(cfg, "skin_b", 'B');

    e.actuator.gain_lin_a = cfg.num("actuator", "gain_lin_a", e.actuator.gain_lin_a);
    e.actuator.gain_quad_a = cfg.num("actuator", "gain_quad_a", e.actuator.gain_quad_a);
    e.actuator.gain_lin_b = cfg.num("actuator", "gain_lin_b", e.actuator.gain_lin_b);
    e.actuator.gain_quad_b = cfg.num("actuator", "gain_quad_b", e.actuator.gain_quad_b);
    e.actuator.max_torque = cfg.num("actuator", "max_torque", e.actuator.max_torque);

    e.physics_rate = cfg.num("sim", "physics_rate", e.physics_rate);

    // per-mode defaults, overridable per key
    e.sensor_rate = cfg.num("collect", "sensor_rate", bi ? 60.0 : 85.0);
    e.sessions = static_cast<int>(cfg.integer("collect", "sessions", bi ? 7 : 8));
    e.total_points = static_cast<std::size_t>(
        cfg.integer("collect", "total_points", bi ? 107090 : 115410));
    e.switch_rate_lo = cfg.num("collect", "switch_rate_lo", bi ? 1.0 : 0.8);
    e.switch_rate_hi = cfg.num("collect", "switch_rate_hi", bi ? 4.0 : 1.2);
    e.duty_lo = cfg.num("collect", "duty_lo", 0.0);
    e.duty_hi = cfg.num("collect", "duty_hi", 255.0);
    e.precycle = cfg.boolean("collect", "precycle", false);
    e.collect_seed = static_cast<std::uint64_t>(cfg.integer("collect", "seed", 1));
    if (e.sessions < 1 || e.total_points < 10 || e.sensor_rate <= 0.0) {
        throw ConfigError("invalid [collect] parameters");
    }
    if (e.switch_rate_lo <= 0.0 || e.switch_rate_hi < e.switch_rate_lo) {
        throw ConfigError("invalid [collect] switch rate band");
    }

    e.training.lr = cfg.num("training", "lr", e.training.lr);
    e.training.beta1 = cfg.num("training", "beta1", e.training.beta1);
    e.training.beta2 = cfg.num("training", "beta2", e.training.beta2);
    e.training.eps = cfg.num("training", "eps", e.training.eps);
    e.training.l2 = cfg.num("training", "l2", e.training.l2);
    e.training.val_frequency =
        static_cast<int>(cfg.integer("training", "val_frequency", e.training.val_frequency));
    e.training.patience = static_cast<int>(cfg.integer("training", "patience", e.training.patience));
    e.training.seq_len = static_cast<int>(cfg.integer("training", "seq_len", e.training.seq_len));
    e.training.batch_size =
        static_cast<int>(cfg.integer("training", "batch_size", e.training.batch_size));
    e.training.max_epochs =
        static_cast<int>(cfg.integer("training", "max_epochs", e.training.max_epochs));
    e.training.hidden = static_cast<int>(cfg.integer("training", "hidden", e.training.hidden));
    e.training.dropout = cfg.num("training", "dropout", e.training.dropout);
    e.training.seed = static_cast<std::uint64_t>(cfg.integer("training", "seed", 7));

    const double gamma = cfg.num("controller", "gamma", 1.2);
    e.gains = ControllerGains::with_scalar_gamma(cfg.num("controller", "lambda", 3.2),
                                                 cfg.num("controller", "k_d", 0.8), gamma);
    e.theta0 = ParamEstimate(cfg.num("controller", "theta0_1", 0.6),
                             cfg.num("controller", "theta0_2", 0.1),
                             cfg.num("controller", "theta0_3", 0.1));
    e.rate_cutoff_hz = cfg.num("controller", "rate_filter_cutoff", 5.0);
    e.control_rate = cfg.num("controller", "control_rate", e.sensor_rate);
    e.clamp_theta = cfg.boolean("controller", "clamp_theta", false);

    e.track_duration = cfg.num("track", "duration", 120.0);
    e.track_seed = static_cast<std::uint64_t>(cfg.integer("track", "seed", 99));
    e.eval_duration = cfg.num("eval", "duration", 120.0);
    e.eval_seed = static_cast<std::uint64_t>(cfg.integer("eval", "seed", 1234));

    e.calib_points = static_cast<int>(cfg.integer("calibrate", "duty_points", 12));
    e.calib.settle_qdot_tol = cfg.num("calibrate", "settle_tol", 1e-5);
    e.calib.settle_hold = cfg.num("calibrate", "settle_hold", 0.5);
    e.calib.k_nominal = cfg.num("calibrate", "k_nominal", 1.0);
    e.calib.physics_rate = e.physics_rate;
    return e;
}

DutyCommand DutySchedule::at(double t) const {
    // events are ascending; find the last one at or before t
    auto it = std::upper_bound(events.begin(), events.end(), t,
                               [](double v, const DutyEvent& e) { return v < e.t; });
    if (it == events.begin()) return {0.0, 0.0};
    --it;
    return {it->duty_a, it->duty_b};
}

DutySchedule generate_actuation(double duration, bool bidirectional, double rate_lo_hz,
                                double rate_hi_hz, double duty_lo, double duty_hi,
                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> interval(1.0 / rate_hi_hz, 1.0 / rate_lo_hz);
    std::uniform_real_distribution<double> duty(duty_lo, duty_hi);
    std::uniform_int_distribution<int> side(0, 1);

    DutySchedule sched;
    double t = 0.0;
    while (t < duration) {
        DutyEvent e;
        e.t = t;
        const double u = duty(rng);
        if (bidirectional && side(rng) == 1) {
            e.duty_b = u;
        } else {
            e.duty_a = u;
        }
        sched.events.push_back(e);
        t += interval(rng);
    }
    return sched;
}

Dataset collect(const ExperimentConfig& cfg) {
    Dataset ds;
    ds.input_dim = cfg.input_dim();
    ds.sensor_rate = cfg.sensor_rate;
    ds.frames.reserve(cfg.total_points);

    const std::size_t base = cfg.total_points / cfg.sessions;
    const std::size_t extra = cfg.total_points % cfg.sessions;
    const bool bi = cfg.mode == "bi";

    for (int s = 0; s < cfg.sessions; ++s) {
        const std::size_t frames =
            base + (static_cast<std::size_t>(s) < extra ? 1 : 0);
        const double duration = static_cast<double>(frames) / cfg.sensor_rate;

        const DutySchedule sched = generate_actuation(
            duration + 1.0, bi, cfg.switch_rate_lo, cfg.switch_rate_hi, cfg.duty_lo,
            cfg.duty_hi, mix_seed(cfg.collect_seed, 2 * s));
        SensorRig rig(cfg.segment, cfg.skin_a, cfg.skin_b, mix_seed(cfg.collect_seed, 2 * s + 1));

        RobotState state;
        if (cfg.precycle) precycle(cfg, state, rig);

        ds.session_starts.push_back(ds.frames.size());
        StepStats stats;
        const double dt = 1.0 / cfg.sensor_rate;
        for (std::size_t k = 0; k < frames; ++k) {
            const double t = static_cast<double>(k) / cfg.sensor_rate;
            const DutyCommand duty = sched.at(t);
            LabeledFrame f;
            f.frame = rig.sample(state, duty.duty_a, duty.duty_b, t, dt);
            f.q_deg = state.q * kRadToDeg;
            ds.frames.push_back(f);
            integrate_interval(cfg.segment, cfg.actuator, sched, state, t, dt,
                               cfg.physics_rate, &stats);
        }
    }
    return ds;
}

CalibrationResult run_calibration(const ExperimentConfig& cfg) {
    std::vector<double> grid;
    for (int i = 0; i <= cfg.calib_points - 1; ++i) {
        grid.push_back(cfg.duty_hi * i / (cfg.calib_points - 1));
    }
    return calibrate(cfg.actuator, cfg.segment, grid, cfg.calib);
}

TrackingResult run_tracking(const ExperimentConfig& cfg, const TrajectorySpec& traj,
                            const LstmModel* model, const CalibrationResult& maps,
                            bool truth_feedback, const std::string& log_path) {
    if (!truth_feedback && model == nullptr) {
        throw Error("tracking without truth feedback needs a trained model");
    }

    const double dt = 1.0 / cfg.control_rate;
    const long ticks = static_cast<long>(std::llround(cfg.track_duration * cfg.control_rate));

    SensorRig rig(cfg.segment, cfg.skin_a, cfg.skin_b, mix_seed(cfg.track_seed, 17));
    AdaptiveController controller(cfg.gains, cfg.theta0, cfg.rate_cutoff_hz, cfg.clamp_theta);
    std::unique_ptr<InferenceSession> session;
    if (model) session = std::make_unique<InferenceSession>(*model);

    const ParamEstimate theta_true(cfg.segment.mass * cfg.segment.length * cfg.segment.length,
                                   cfg.segment.stiffness, cfg.segment.damping);

    std::unique_ptr<CsvWriter> log;
    if (!log_path.empty()) {
        log = std::make_unique<CsvWriter>(
            log_path, std::vector<std::string>{"t", "q_d_deg", "q_truth_deg", "q_hat_deg", "s",
                                               "tau", "duty_A", "duty_B", "theta_1", "theta_2",
                                               "theta_3", "V"});
    }

    TrackingResult result;
    RobotState state;
    DutyCommand duty;  // applied over the previous interval; (0,0) at start
    double track_se = 0.0, est_se = 0.0;
    double sat_dwell = 0.0;
    StepStats stats;

    for (long k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) / cfg.control_rate;

        // sensors see the current state and the currently applied duties
        const SensorFrame frame = rig.sample(state, duty.duty_a, duty.duty_b, t, dt);

        // Feedback curvature comes from the estimator or from ground truth;
        // either way its rate passes through the same filtered differentiator
        // (raw q_dot feedback through K_D would fight the fast pole D/M and
        // chatter at the control rate).
        double q_fb, q_hat_deg;
        if (truth_feedback) {
            q_fb = state.q;
            q_hat_deg = state.q * kRadToDeg;
        } else {
            q_hat_deg = session->predict(frame, &result.counters);
            q_fb = q_hat_deg / kRadToDeg;
        }
        const double qd_fb = controller.estimate_rate(q_fb, dt);

        double q_d, q_d_dot, q_d_ddot;
        traj.eval(t, q_d, q_d_dot, q_d_ddot);

        const AdaptiveController::Output out =
            controller.update(q_fb, qd_fb, q_d, q_d_dot, q_d_ddot, dt);
        duty = torque_to_duty(maps, out.tau);

        const double track_err_deg = (state.q - q_d) * kRadToDeg;
        track_se += track_err_deg * track_err_deg;
        const double est_err_deg = q_hat_deg - state.q * kRadToDeg;
        est_se += est_err_deg * est_err_deg;

        if (log) {
            const double inertia = dynamics_terms(cfg.segment, state).inertia;
            const double v = lyapunov(inertia, out.s, controller.theta_hat() - theta_true,
                                      cfg.gains.gamma);
            log->row(t, q_d * kRadToDeg, state.q * kRadToDeg, q_hat_deg, out.s, out.tau,
                     duty.duty_a, duty.duty_b, controller.theta_hat()(0),
                     controller.theta_hat()(1), controller.theta_hat()(2), v);
        }

        // plant: the new command is zero-order-held over [t, t+dt)
        DutySchedule hold;
        hold.events.push_back({0.0, duty.duty_a, duty.duty_b});
        const long sat_before = stats.saturations;
        integrate_interval(cfg.segment, cfg.actuator, hold, state, t, dt, cfg.physics_rate,
                           &stats);
        sat_dwell = stats.saturations > sat_before ? sat_dwell + dt : 0.0;
        if (sat_dwell > 1.0) {
            throw Diverged("curvature pinned at the workspace guard for over 1 s");
        }
    }

    result.ticks = ticks;
    result.saturations = stats.saturations;
    result.tracking_rmse_deg = std::sqrt(track_se / ticks);
    result.estimation_rmse_deg = std::sqrt(est_se / ticks);
    return result;
}

EvalResult evaluate(const ExperimentConfig& cfg, const LstmModel& model, std::uint64_t seed,
                    double duration, const std::string& csv_path) {
    const bool bi = cfg.mode == "bi";
    const DutySchedule sched =
        generate_actuation(duration + 1.0, bi, cfg.switch_rate_lo, cfg.switch_rate_hi,
                           cfg.duty_lo, cfg.duty_hi, mix_seed(seed, 3));
    SensorRig rig(cfg.segment, cfg.skin_a, cfg.skin_b, mix_seed(seed, 4));
    InferenceSession session(model);

    std::unique_ptr<CsvWriter> csv;
    if (!csv_path.empty()) {
        csv = std::make_unique<CsvWriter>(
            csv_path, std::vector<std::string>{"t", "raw_A", "raw_B", "duty_A", "duty_B",
                                               "q_truth_deg", "q_hat_deg"});
    }

    EvalResult result;
    RobotState state;
    StepStats stats;
    const double dt = 1.0 / cfg.sensor_rate;
    const long frames = static_cast<long>(std::llround(duration * cfg.sensor_rate));
    double se = 0.0;
    for (long k = 0; k < frames; ++k) {
        const double t = static_cast<double>(k) / cfg.sensor_rate;
        const DutyCommand duty = sched.at(t);
        const SensorFrame frame = rig.sample(state, duty.duty_a, duty.duty_b, t, dt);
        const double q_hat = session.predict(frame, &result.counters);
        const double q_truth = state.q * kRadToDeg;
        se += (q_hat - q_truth) * (q_hat - q_truth);
        if (csv) {
            csv->row(t, frame.raw_a, frame.raw_b, frame.duty_a, frame.duty_b, q_truth, q_hat);
        }
        integrate_interval(cfg.segment, cfg.actuator, sched, state, t, dt, cfg.physics_rate,
                           &stats);
    }
    result.frames = frames;
    result.rmse_deg = std::sqrt(se / frames);
    return result;
}

namespace {

std::vector<double> column(const CsvTable& t, int c) {
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) out.push_back(r[c]);
    return out;
}

}  // namespace

std::vector<std::string> export_plots(const std::string& run_csv, const std::string& out_dir) {
    const CsvTable t = read_csv(run_csv);
    fs::create_directories(out_dir);
    const int ct = t.require("t");
    const std::vector<double> time = column(t, ct);
    std::vector<std::string> panels;

    auto emit = [&](const std::string& name, const std::string& y_label,
                    const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
        std::vector<std::string> header{"t"};
        for (const auto& c : cols) header.push_back(c.first);
        CsvWriter w((fs::path(out_dir) / (name + ".csv")).string(), header);
        for (std::size_t i = 0; i < time.size(); ++i) {
            std::vector<double> vals{time[i]};
            for (const auto& c : cols) vals.push_back(c.second[i]);
            w.row_vec(vals);
        }
        std::vector<SvgSeries> series;
        for (const auto& c : cols) series.push_back({c.first, time, c.second});
        write_line_chart((fs::path(out_dir) / (name + ".svg")).string(), name, "t [s]", y_label,
                         series);
        panels.push_back(name);
    };

    if (t.col("raw_A") >= 0 && t.col("raw_B") >= 0) {
        emit("raw_strains", "ADC counts",
             {{"raw_A", column(t, t.col("raw_A"))}, {"raw_B", column(t, t.col("raw_B"))}});
    }
    if (t.col("duty_A") >= 0 && t.col("duty_B") >= 0) {
        emit("actuation", "duty",
             {{"duty_A", column(t, t.col("duty_A"))}, {"duty_B", column(t, t.col("duty_B"))}});
    }
    if (t.col("q_hat_deg") >= 0 && t.col("q_truth_deg") >= 0) {
        emit("prediction", "degree of curvature [deg]",
             {{"q_truth_deg", column(t, t.col("q_truth_deg"))},
              {"q_hat_deg", column(t, t.col("q_hat_deg"))}});
    }
    if (t.col("q_d_deg") >= 0 && t.col("q_truth_deg") >= 0) {
        emit("tracking", "degree of curvature [deg]",
             {{"q_d_deg", column(t, t.col("q_d_deg"))},
              {"q_truth_deg", column(t, t.col("q_truth_deg"))}});
        const std::vector<double> qd = column(t, t.col("q_d_deg"));
        const std::vector<double> qt = column(t, t.col("q_truth_deg"));
        std::vector<double> err(qd.size());
        for (std::size_t i = 0; i < qd.size(); ++i) err[i] = qt[i] - qd[i];
        emit("error", "tracking error [deg]", {{"error_deg", err}});
    }
    return panels;
}

}  // namespace softtrack
