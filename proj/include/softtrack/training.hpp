#pragma once
#include <cstdint>
#include <vector>

#include "softtrack/dataset.hpp"
#include "softtrack/lstm.hpp"

namespace softtrack {

struct TrainConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double l2 = 1e-4;
    int val_frequency = 25;  // iterations between validation checks
    int patience = 5;        // checks without improvement before stopping
    int seq_len = 100;
    int batch_size = 16;
    int max_epochs = 200;
    int hidden = 30;
    double dropout = 0.1;
    std::uint64_t seed = 7;
};

// Stop after `patience` consecutive checks without improvement.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    // Returns false once training should stop.
    bool observe(double val) {
        ++count_;
        if (val < best_) {
            best_ = val;
            best_check_ = count_;
            bad_ = 0;
        } else {
            ++bad_;
        }
        return bad_ < patience_;
    }

    double best() const { return best_; }
    int best_check() const { return best_check_; }
    bool improved_last() const { return bad_ == 0; }

  private:
    int patience_;
    int bad_ = 0;
    int count_ = 0;
    int best_check_ = 0;
    double best_ = 1e300;
};

struct TrainCheckpoint {
    long iteration = 0;
    double train_rmse = 0.0;      // over batches since the previous check
    double val_alpha_rmse = 0.0;  // degrees
};

struct TrainResult {
    LstmModel model;
    std::vector<TrainCheckpoint> history;
    double best_val_alpha_rmse = 0.0;
    double val_beta_rmse = 0.0;
    long iterations = 0;
};

// Streaming predictions over frames [begin, end), resetting the hidden
// state at every session boundary. Degrees.
std::vector<double> predict_range(const LstmModel& model, const Dataset& ds,
                                  std::size_t begin, std::size_t end);

double rmse_range(const LstmModel& model, const Dataset& ds, std::size_t begin,
                  std::size_t end);

// Adam + truncated BPTT with early stopping on the alpha-validation split;
// best-alpha weights are restored and beta-validation RMSE reported.
// Throws Diverged if the loss goes non-finite.
TrainResult train(const Dataset& ds, const TrainConfig& cfg, bool verbose = false);

}  // namespace softtrack
