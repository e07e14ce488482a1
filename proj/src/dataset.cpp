#include "softtrack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "softtrack/csv.hpp"

namespace softtrack {

namespace fs = std::filesystem;

SplitSizes split_sizes(std::size_t total) {
    SplitSizes s;
    s.val_alpha = static_cast<std::size_t>(std::floor(0.15 * total + 0.5));
    s.val_beta = s.val_alpha;
    s.train = total - s.val_alpha - s.val_beta;
    return s;
}

std::vector<std::size_t> enumerate_windows(const Dataset& ds, std::size_t begin,
                                           std::size_t end, int seq_len) {
    std::vector<std::size_t> starts;
    const std::size_t len = static_cast<std::size_t>(seq_len);
    for (std::size_t si = 0; si < ds.session_starts.size(); ++si) {
        const std::size_t s_beg = ds.session_starts[si];
        const std::size_t s_end =
            si + 1 < ds.session_starts.size() ? ds.session_starts[si + 1] : ds.frames.size();
        std::size_t lo = std::max(begin, s_beg);
        const std::size_t hi = std::min(end, s_end);
        while (lo + len <= hi) {
            starts.push_back(lo);
            lo += len;
        }
    }
    return starts;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    std::vector<std::string> files;
    for (std::size_t si = 0; si < ds.session_starts.size(); ++si) {
        const std::size_t s_beg = ds.session_starts[si];
        const std::size_t s_end =
            si + 1 < ds.session_starts.size() ? ds.session_starts[si + 1] : ds.frames.size();
        char name[32];
        std::snprintf(name, sizeof(name), "session_%02zu.csv", si);
        files.emplace_back(name);
        CsvWriter w((fs::path(dir) / name).string(),
                    {"t", "raw_A", "raw_B", "duty_A", "duty_B", "q_truth_deg"});
        for (std::size_t i = s_beg; i < s_end; ++i) {
            const LabeledFrame& f = ds.frames[i];
            w.row(f.frame.t, f.frame.raw_a, f.frame.raw_b, f.frame.duty_a, f.frame.duty_b,
                  f.q_deg);
        }
    }
    const SplitSizes sp = ds.splits();
    nlohmann::json j = {{"mode", ds.input_dim == 2 ? "uni" : "bi"},
                        {"input_dim", ds.input_dim},
                        {"sensor_rate", ds.sensor_rate},
                        {"sessions", files},
                        {"total", ds.frames.size()},
                        {"split", {{"train", sp.train}, {"val_alpha", sp.val_alpha}, {"val_beta", sp.val_beta}}}};
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw Error("cannot write manifest in " + dir);
    out << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir_or_manifest) {
    fs::path manifest(dir_or_manifest);
    if (fs::is_directory(manifest)) manifest /= "manifest.json";
    std::ifstream in(manifest);
    if (!in) throw Error("cannot read " + manifest.string());
    nlohmann::json j;
    in >> j;

    Dataset ds;
    ds.input_dim = j.at("input_dim").get<int>();
    ds.sensor_rate = j.at("sensor_rate").get<double>();
    const fs::path dir = manifest.parent_path();
    for (const auto& name : j.at("sessions").get<std::vector<std::string>>()) {
        ds.session_starts.push_back(ds.frames.size());
        const CsvTable t = read_csv((dir / name).string());
        const int ct = t.require("t"), ca = t.require("raw_A"), cb = t.require("raw_B");
        const int cda = t.require("duty_A"), cdb = t.require("duty_B"),
                  cq = t.require("q_truth_deg");
        for (const auto& r : t.rows) {
            LabeledFrame f;
            f.frame.t = r[ct];
            f.frame.raw_a = static_cast<int>(r[ca]);
            f.frame.raw_b = static_cast<int>(r[cb]);
            f.frame.duty_a = r[cda];
            f.frame.duty_b = r[cdb];
            f.q_deg = r[cq];
            ds.frames.push_back(f);
        }
    }
    return ds;
}

}  // namespace softtrack
