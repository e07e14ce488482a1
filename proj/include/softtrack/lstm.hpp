#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "softtrack/errors.hpp"
#include "softtrack/sensing.hpp"

namespace softtrack {

// Single-layer LSTM regressor with a scalar dense head. Output is the
// degree of curvature in degrees. Gate rows are stacked [i; f; g; o] in
// w_gates/b_gates; each block is hidden x (input_dim + hidden) acting on
// the concatenated [x; h_prev].
struct LstmModel {
    int input_dim = 2;  // 2 = (duty_A, raw_A); 4 = (duty_A, duty_B, raw_A, raw_B)
    int hidden = 30;
    double dropout_rate = 0.1;

    Eigen::MatrixXd w_gates;  // (4*hidden) x (input_dim + hidden)
    Eigen::VectorXd b_gates;  // 4*hidden
    Eigen::RowVectorXd w_out; // 1 x hidden
    double b_out = 0.0;

    // per-channel affine map of raw inputs to [-1, 1]
    Eigen::VectorXd norm_lo;
    Eigen::VectorXd norm_hi;

    std::vector<std::string> input_labels;

    Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
};

LstmModel init_model(int input_dim, int hidden, double dropout_rate,
                     std::uint64_t seed, double out_weight_scale, double out_bias);

// One cell step on column vectors (the streaming/inference path).
void lstm_cell(const LstmModel& model, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev,
               Eigen::VectorXd& h, Eigen::VectorXd& c);

// Instrumentation for which frame fields the feature path touches.
struct FeatureCounters {
    long duty_a = 0;
    long duty_b = 0;
    long raw_a = 0;
    long raw_b = 0;
};

// Raw (unnormalized) feature vector for a frame, by model input width.
Eigen::VectorXd frame_features(const SensorFrame& frame, int input_dim,
                               FeatureCounters* counters = nullptr);

// Whole-sequence forward. train_mode applies inverted input dropout with
// masks drawn from `seed`; infer mode is deterministic. Returns degrees.
std::vector<double> forward(const LstmModel& model, const std::vector<SensorFrame>& frames,
                            bool train_mode, std::uint64_t seed = 0);

// Streaming inference with persistent (h, c); one thread per session.
class InferenceSession {
  public:
    explicit InferenceSession(const LstmModel& model);
    double predict(const SensorFrame& frame, FeatureCounters* counters = nullptr);
    void reset();

  private:
    const LstmModel* model_;
    Eigen::VectorXd h_;
    Eigen::VectorXd c_;
};

// A minibatch of equal-length sequences: x[t] is input_dim x batch (raw
// features), y(t, b) the target in degrees.
struct Batch {
    std::vector<Eigen::MatrixXd> x;
    Eigen::MatrixXd y;  // seq_len x batch
};

struct Gradients {
    Eigen::MatrixXd w_gates;
    Eigen::VectorXd b_gates;
    Eigen::RowVectorXd w_out;
    double b_out = 0.0;
};

// Mean squared error over every step of every sequence plus l2 * sum of
// squared weights (biases excluded). Dropout masks come from mask_seed so
// repeated calls see identical stochasticity (finite differences rely on
// this). Outputs are in degrees, so the loss is in squared degrees.
double loss(const LstmModel& model, const Batch& batch, double l2, std::uint64_t mask_seed);

// Same forward as loss(), plus exact BPTT gradients. Returns {mse_part, total_loss}.
std::pair<double, double> backward(const LstmModel& model, const Batch& batch, double l2,
                                   std::uint64_t mask_seed, Gradients& grads);

struct AdamState {
    Eigen::MatrixXd m_w, v_w;
    Eigen::VectorXd m_b, v_b;
    Eigen::RowVectorXd m_wo, v_wo;
    double m_bo = 0.0, v_bo = 0.0;
    long t = 0;
};

AdamState make_adam_state(const LstmModel& model);

void adam_step(LstmModel& model, AdamState& state, const Gradients& grads,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Root mean squared error, same units as the inputs (degrees here).
double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

void save_model(const LstmModel& model, const std::string& path,
                const std::string& metadata_json = "{}");
LstmModel load_model(const std::string& path);

}  // namespace softtrack
