#include "softtrack/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace softtrack {

namespace {

Batch make_batch(const Dataset& ds, const std::vector<std::size_t>& starts,
                 std::size_t first, std::size_t count, int seq_len, int input_dim) {
    Batch b;
    b.x.assign(seq_len, Eigen::MatrixXd(input_dim, count));
    b.y.resize(seq_len, count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t s = starts[first + k];
        for (int t = 0; t < seq_len; ++t) {
            b.x[t].col(k) = frame_features(ds.frames[s + t].frame, input_dim);
            b.y(t, k) = ds.frames[s + t].q_deg;
        }
    }
    return b;
}

}  // namespace

std::vector<double> predict_range(const LstmModel& model, const Dataset& ds,
                                  std::size_t begin, std::size_t end) {
    std::vector<double> out;
    out.reserve(end - begin);
    InferenceSession session(model);
    for (std::size_t si = 0; si < ds.session_starts.size(); ++si) {
        const std::size_t s_beg = ds.session_starts[si];
        const std::size_t s_end =
            si + 1 < ds.session_starts.size() ? ds.session_starts[si + 1] : ds.frames.size();
        const std::size_t lo = std::max(begin, s_beg);
        const std::size_t hi = std::min(end, s_end);
        if (lo >= hi) continue;
        session.reset();
        for (std::size_t i = lo; i < hi; ++i) out.push_back(session.predict(ds.frames[i].frame));
    }
    return out;
}

double rmse_range(const LstmModel& model, const Dataset& ds, std::size_t begin,
                  std::size_t end) {
    const std::vector<double> pred = predict_range(model, ds, begin, end);
    std::vector<double> truth;
    truth.reserve(pred.size());
    for (std::size_t si = 0; si < ds.session_starts.size(); ++si) {
        const std::size_t s_beg = ds.session_starts[si];
        const std::size_t s_end =
            si + 1 < ds.session_starts.size() ? ds.session_starts[si + 1] : ds.frames.size();
        for (std::size_t i = std::max(begin, s_beg); i < std::min(end, s_end); ++i) {
            truth.push_back(ds.frames[i].q_deg);
        }
    }
    return rmse(pred, truth);
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, bool verbose) {
    const SplitSizes sp = ds.splits();
    const std::size_t val_a_end = sp.train + sp.val_alpha;

    // normalization constants and target statistics from the train split only
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(ds.input_dim, 1e300);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(ds.input_dim, -1e300);
    double y_sum = 0.0, y_sq = 0.0;
    for (std::size_t i = 0; i < sp.train; ++i) {
        const Eigen::VectorXd x = frame_features(ds.frames[i].frame, ds.input_dim);
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
        y_sum += ds.frames[i].q_deg;
        y_sq += ds.frames[i].q_deg * ds.frames[i].q_deg;
    }
    const double y_mean = y_sum / sp.train;
    const double y_sd = std::sqrt(std::max(y_sq / sp.train - y_mean * y_mean, 1e-12));

    LstmModel model = init_model(ds.input_dim, cfg.hidden, cfg.dropout, cfg.seed,
                                 y_sd / std::sqrt(static_cast<double>(cfg.hidden)), y_mean);
    model.norm_lo = lo;
    model.norm_hi = hi;
    model.input_labels = ds.input_dim == 2
                             ? std::vector<std::string>{"duty_A", "raw_A"}
                             : std::vector<std::string>{"duty_A", "duty_B", "raw_A", "raw_B"};

    std::vector<std::size_t> starts = enumerate_windows(ds, 0, sp.train, cfg.seq_len);
    if (starts.empty()) throw Error("train split shorter than one sequence window");

    AdamState adam = make_adam_state(model);
    EarlyStopper stopper(cfg.patience);
    std::mt19937_64 rng(cfg.seed + 0x517cc1b727220a95ULL);

    TrainResult result;
    LstmModel best = model;
    long iteration = 0;
    double mse_accum = 0.0;
    long mse_count = 0;
    bool stop = false;

    for (int epoch = 0; epoch < cfg.max_epochs && !stop; ++epoch) {
        std::shuffle(starts.begin(), starts.end(), rng);
        for (std::size_t off = 0; off < starts.size() && !stop;
             off += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(cfg.batch_size, starts.size() - off);
            const Batch batch = make_batch(ds, starts, off, count, cfg.seq_len, ds.input_dim);

            Gradients grads;
            const auto [mse, total] = backward(model, batch, cfg.l2, rng(), grads);
            if (!std::isfinite(total)) throw Diverged("training loss became non-finite");
            adam_step(model, adam, grads, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

            mse_accum += mse;
            mse_count++;
            iteration++;

            if (iteration % cfg.val_frequency == 0) {
                const double val = rmse_range(model, ds, sp.train, val_a_end);
                result.history.push_back(
                    {iteration, std::sqrt(mse_accum / mse_count), val});
                mse_accum = 0.0;
                mse_count = 0;
                const bool go_on = stopper.observe(val);
                if (stopper.improved_last()) best = model;
                if (verbose) {
                    std::fprintf(stderr, "iter %6ld  train %.3f  val_alpha %.3f%s\n",
                                 iteration, result.history.back().train_rmse, val,
                                 stopper.improved_last() ? " *" : "");
                }
                if (!go_on) stop = true;
            }
        }
    }

    result.model = std::move(best);
    result.best_val_alpha_rmse = stopper.best();
    result.val_beta_rmse = rmse_range(result.model, ds, val_a_end, ds.frames.size());
    result.iterations = iteration;
    return result;
}

}  // namespace softtrack
