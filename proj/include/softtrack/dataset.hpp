#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "softtrack/sensing.hpp"

namespace softtrack {

struct LabeledFrame {
    SensorFrame frame;
    double q_deg = 0.0;  // ground truth, degrees
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t val_alpha = 0;
    std::size_t val_beta = 0;
};

// Contiguous 70/15/15 split with half-up rounding of the validation sets.
SplitSizes split_sizes(std::size_t total);

// Concatenated recording sessions with contiguous train/val splits.
// Frames keep temporal order; sequence windows never cross a session or a
// split boundary.
struct Dataset {
    std::vector<LabeledFrame> frames;
    std::vector<std::size_t> session_starts;  // ascending, first element 0
    int input_dim = 2;                        // 2 = uni, 4 = bi
    double sensor_rate = 85.0;                // Hz

    SplitSizes splits() const { return split_sizes(frames.size()); }
    std::size_t train_end() const { return splits().train; }
    std::size_t val_alpha_end() const { return splits().train + splits().val_alpha; }
};

// Start indices of non-overlapping seq_len windows fully inside [begin, end)
// and inside a single session.
std::vector<std::size_t> enumerate_windows(const Dataset& ds, std::size_t begin,
                                           std::size_t end, int seq_len);

// One CSV per session (t,raw_A,raw_B,duty_A,duty_B,q_truth_deg) plus a
// manifest.json tying them together.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir_or_manifest);

}  // namespace softtrack
