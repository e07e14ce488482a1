#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softtrack/actuation.hpp"
#include "softtrack/config.hpp"
#include "softtrack/control.hpp"
#include "softtrack/dataset.hpp"
#include "softtrack/training.hpp"
#include "softtrack/trajectory.hpp"

namespace softtrack {

// Typed view of the layered configuration with per-mode defaults applied.
struct ExperimentConfig {
    SegmentParams segment;
    SkinParams skin_a;
    SkinParams skin_b;
    PlantActuator actuator;
    double physics_rate = kDefaultPhysicsRate;

    // data collection
    std::string mode = "uni";  // uni | bi
    double sensor_rate = 85.0;
    int sessions = 8;
    std::size_t total_points = 115410;
    double switch_rate_lo = 0.8;  // Hz
    double switch_rate_hi = 1.2;
    double duty_lo = 0.0;
    double duty_hi = 255.0;
    bool precycle = false;
    std::uint64_t collect_seed = 1;

    TrainConfig training;

    // controller
    ControllerGains gains;
    ParamEstimate theta0{0.6, 0.1, 0.1};
    double rate_cutoff_hz = 5.0;
    double control_rate = 85.0;
    bool clamp_theta = false;

    // tracking / evaluation runs
    double track_duration = 120.0;
    std::uint64_t track_seed = 99;
    double eval_duration = 120.0;
    std::uint64_t eval_seed = 1234;

    // calibration
    int calib_points = 12;
    CalibrationOptions calib;

    int input_dim() const { return mode == "bi" ? 4 : 2; }

    static ExperimentConfig from_config(const Config& cfg);
};

// Piecewise-constant random duty schedule; one compartment at a time.
struct DutyEvent {
    double t = 0.0;
    double duty_a = 0.0;
    double duty_b = 0.0;
};

struct DutySchedule {
    std::vector<DutyEvent> events;  // ascending start times
    DutyCommand at(double t) const;
};

DutySchedule generate_actuation(double duration, bool bidirectional, double rate_lo_hz,
                                double rate_hi_hz, double duty_lo, double duty_hi,
                                std::uint64_t seed);

// Runs the actuation -> dynamics -> sensing stack over the configured
// sessions and splits the concatenated frames 70/15/15.
Dataset collect(const ExperimentConfig& cfg);

CalibrationResult run_calibration(const ExperimentConfig& cfg);

struct TrackingResult {
    double tracking_rmse_deg = 0.0;    // q_truth vs q_d
    double estimation_rmse_deg = 0.0;  // q_hat vs q_truth (0 for truth feedback)
    long ticks = 0;
    long saturations = 0;
    FeatureCounters counters;
};

// Closed loop at the control rate; torque zero-order-held between updates.
// `model` may be null only with truth_feedback. Writes the run log CSV when
// log_path is non-empty. Throws Diverged if the workspace guard pins for
// more than a second.
TrackingResult run_tracking(const ExperimentConfig& cfg, const TrajectorySpec& traj,
                            const LstmModel* model, const CalibrationResult& maps,
                            bool truth_feedback, const std::string& log_path);

struct EvalResult {
    double rmse_deg = 0.0;
    long frames = 0;
    FeatureCounters counters;
};

// Held-out random-actuation estimation run (fresh seed), streaming inference.
EvalResult evaluate(const ExperimentConfig& cfg, const LstmModel& model,
                    std::uint64_t seed, double duration, const std::string& csv_path);

// Tidy per-panel CSVs plus an SVG chart per panel, from a run-log or
// evaluation CSV. Returns the panel base names written.
std::vector<std::string> export_plots(const std::string& run_csv, const std::string& out_dir);

}  // namespace softtrack
