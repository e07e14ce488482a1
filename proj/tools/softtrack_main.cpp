// softtrack: simulation workbench for a planar soft robot segment with
// piezoresistive sensing skins, learned curvature estimation, and adaptive
// curvature tracking.
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "softtrack/experiment.hpp"

namespace fs = std::filesystem;
using namespace softtrack;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration file");
    cmd->add_option("--set", args.overrides, "override, section.key=value")->take_all();
    cmd->add_option("--seed", args.seed, "seed override for this command");
}

Config load_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg = Config::parse_file(args.config_path);
    for (const auto& o : args.overrides) cfg.apply_override(o);
    return cfg;
}

int run_collect(const CommonArgs& args, const std::string& out_dir) {
    Config raw = load_config(args);
    if (args.seed >= 0) raw.apply_override("collect.seed=" + std::to_string(args.seed));
    ExperimentConfig cfg = ExperimentConfig::from_config(raw);
    Dataset ds = collect(cfg);
    save_dataset(ds, out_dir);
    const SplitSizes sp = ds.splits();
    std::printf("collected %zu frames (%d sessions, %s, %.0f Hz) -> %s\n", ds.frames.size(),
                cfg.sessions, cfg.mode.c_str(), cfg.sensor_rate, out_dir.c_str());
    std::printf("split train/val_alpha/val_beta = %zu/%zu/%zu\n", sp.train, sp.val_alpha,
                sp.val_beta);
    return 0;
}

int run_train(const CommonArgs& args, const std::string& data_path,
              const std::string& out_path) {
    Config raw = load_config(args);
    if (args.seed >= 0) raw.apply_override("training.seed=" + std::to_string(args.seed));
    ExperimentConfig cfg = ExperimentConfig::from_config(raw);
    Dataset ds = load_dataset(data_path);
    TrainResult res = train(ds, cfg.training, true);

    nlohmann::json meta = {{"iterations", res.iterations},
                           {"best_val_alpha_rmse_deg", res.best_val_alpha_rmse},
                           {"val_beta_rmse_deg", res.val_beta_rmse},
                           {"seed", cfg.training.seed},
                           {"data", data_path}};
    save_model(res.model, out_path, meta.dump());
    std::printf("trained %ld iterations; val_alpha %.3f deg, val_beta %.3f deg -> %s\n",
                res.iterations, res.best_val_alpha_rmse, res.val_beta_rmse, out_path.c_str());
    return 0;
}

int run_calibrate(const CommonArgs& args, const std::string& out_path) {
    ExperimentConfig cfg = ExperimentConfig::from_config(load_config(args));
    CalibrationResult maps = run_calibration(cfg);
    save_calibration(maps, out_path);
    std::printf("calibrated: residual RMS A %.4f counts, B %.4f counts -> %s\n",
                maps.map_a.residual_rms, maps.map_b.residual_rms, out_path.c_str());
    return 0;
}

int run_eval(const CommonArgs& args, const std::string& model_path,
             const std::string& out_csv) {
    Config raw = load_config(args);
    if (args.seed >= 0) raw.apply_override("eval.seed=" + std::to_string(args.seed));
    ExperimentConfig cfg = ExperimentConfig::from_config(raw);
    LstmModel model = load_model(model_path);
    EvalResult res = evaluate(cfg, model, cfg.eval_seed, cfg.eval_duration, out_csv);
    std::printf("held-out estimation RMSE %.3f deg over %ld frames\n", res.rmse_deg,
                res.frames);
    return 0;
}

int run_track(const CommonArgs& args, const std::string& model_path,
              const std::string& cal_path, const std::string& traj_name,
              bool truth_feedback, const std::string& out_csv) {
    Config raw = load_config(args);
    if (args.seed >= 0) raw.apply_override("track.seed=" + std::to_string(args.seed));
    ExperimentConfig cfg = ExperimentConfig::from_config(raw);
    const TrajectorySpec traj = TrajectorySpec::preset(traj_name);

    LstmModel model;
    const LstmModel* model_ptr = nullptr;
    if (!truth_feedback) {
        model = load_model(model_path);
        model_ptr = &model;
    }
    CalibrationResult maps = cal_path.empty() ? run_calibration(cfg) : load_calibration(cal_path);

    TrackingResult res = run_tracking(cfg, traj, model_ptr, maps, truth_feedback, out_csv);
    std::printf("%s: tracking RMSE %.3f deg", traj_name.c_str(), res.tracking_rmse_deg);
    if (!truth_feedback) std::printf(", estimation RMSE %.3f deg", res.estimation_rmse_deg);
    std::printf(" (%ld ticks)\n", res.ticks);
    return 0;
}

int run_export(const std::string& run_csv, const std::string& out_dir) {
    const auto panels = export_plots(run_csv, out_dir);
    std::printf("exported %zu panels to %s:", panels.size(), out_dir.c_str());
    for (const auto& p : panels) std::printf(" %s", p.c_str());
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"soft robot curvature estimation and adaptive tracking workbench"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string out, data, model_path, cal_path, traj = "uni_low", run_csv;
    bool truth_feedback = false;

    auto* c_cal = app.add_subcommand("calibrate", "fit the torque->duty maps");
    add_common(c_cal, common);
    c_cal->add_option("--out", out, "output JSON")->required();

    auto* c_col = app.add_subcommand("collect", "record a random-actuation dataset");
    add_common(c_col, common);
    c_col->add_option("--out", out, "output directory")->required();

    auto* c_tr = app.add_subcommand("train", "train the curvature estimator");
    add_common(c_tr, common);
    c_tr->add_option("--data", data, "dataset directory or manifest")->required();
    c_tr->add_option("--out", out, "model JSON path")->required();

    auto* c_ev = app.add_subcommand("eval", "held-out estimation RMSE");
    add_common(c_ev, common);
    c_ev->add_option("--model", model_path, "model JSON")->required();
    c_ev->add_option("--out", out, "per-step prediction CSV");

    auto* c_tk = app.add_subcommand("track", "closed-loop curvature tracking");
    add_common(c_tk, common);
    c_tk->add_option("--model", model_path, "model JSON (unless --truth-feedback)");
    c_tk->add_option("--cal", cal_path, "calibration JSON (default: calibrate on the fly)");
    c_tk->add_option("--trajectory", traj, "uni_low|uni_high|bi_low|bi_high");
    c_tk->add_flag("--truth-feedback", truth_feedback, "bypass the estimator (ablation)");
    c_tk->add_option("--out", out, "run log CSV");

    auto* c_ex = app.add_subcommand("export", "panel CSVs and SVG charts from a run log");
    c_ex->add_option("--run", run_csv, "run log or eval CSV")->required();
    c_ex->add_option("--out", out, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_cal->parsed()) return run_calibrate(common, out);
        if (c_col->parsed()) return run_collect(common, out);
        if (c_tr->parsed()) return run_train(common, data, out);
        if (c_ev->parsed()) return run_eval(common, model_path, out);
        if (c_tk->parsed()) return run_track(common, model_path, cal_path, traj,
                                             truth_feedback, out);
        if (c_ex->parsed()) return run_export(run_csv, out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const Diverged& e) {
        std::fprintf(stderr, "diverged: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
