#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slstt/config.hpp"
#include "slstt/pipeline.hpp"
#include "slstt/synth.hpp"
#include "slstt/weights_io.hpp"

using namespace slstt;

namespace {

std::vector<double> parse_directions(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(field, &pos));
            require(pos == field.size(), "");
        } catch (...) {
            fail("--directions expects comma-separated degrees, got '" + field + "'");
        }
    }
    require(!out.empty(), "--directions must list at least one angle");
    return out;
}

// Shared by train/evaluate: config file -> --set overrides -> typed views.
struct RunSetup {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string protocol = "sde";
    std::string dataset = "SYNTH";

    Config config() const {
        Config cfg = config_path.empty() ? Config() : Config::load(config_path);
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            require(eq != std::string::npos, "--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }

    ProtocolKind kind() const {
        if (protocol == "sde") return ProtocolKind::SDE;
        if (protocol == "cde") return ProtocolKind::CDE;
        fail("--protocol must be 'sde' or 'cde', got '" + protocol + "'");
    }
};

void add_setup_options(CLI::App* cmd, RunSetup& setup) {
    cmd->add_option("--config", setup.config_path, "flat key = value configuration file");
    cmd->add_option("--set", setup.overrides,
                    "override a configuration key, e.g. --set train.epochs=80");
    cmd->add_option("--protocol", setup.protocol, "evaluation protocol: sde or cde");
    cmd->add_option("--dataset", setup.dataset, "corpus for the sde protocol");
}

PreprocessParams preprocess_params_from(const Config& cfg, int input_side, int frames) {
    PreprocessParams params;
    params.input_side = input_side;
    params.frames = frames;
    params.target_count = cfg.get_int("preprocess.target_count", -1);
    const std::string midpoint = cfg.get_string("preprocess.midpoint", "blend");
    if (midpoint == "blend") {
        params.midpoint = MidpointMode::Blend;
    } else if (midpoint == "flowwarp") {
        params.midpoint = MidpointMode::FlowWarp;
    } else {
        fail("preprocess.midpoint must be 'blend' or 'flowwarp', got '" + midpoint + "'");
    }
    params.flow = flow_params_from(cfg);
    return params;
}

// The model's class count must agree with the protocol's label set; derive
// it when the configuration is silent, reject a mismatch loudly.
ModelSpec model_for_protocol(Config& cfg, const ProtocolSpec& spec) {
    const int classes = static_cast<int>(spec.label_set.size());
    if (cfg.has("model.classes")) {
        require(cfg.get_int("model.classes", 0) == classes,
                "model.classes disagrees with the protocol's " + std::to_string(classes) +
                    " labels");
    } else {
        cfg.set("model.classes", std::to_string(classes));
    }
    return model_spec_from(cfg);
}

MaterializedSet materialize_from(const Config& cfg, const Manifest& manifest,
                                 const ProtocolSpec& spec, const ModelSpec& model) {
    const PreprocessParams params =
        preprocess_params_from(cfg, model.embed.image_side, model.frames);
    return materialize(manifest, spec, params);
}

void write_predictions_csv(const std::string& path, const ProtocolReport& report) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot open for writing: " + path);
    os << "sample_id,true_label,predicted_label\n";
    for (const auto& fold : report.folds)
        for (std::size_t i = 0; i < fold.test_sample_ids.size(); ++i)
            os << fold.test_sample_ids[i] << ","
               << report.spec.label_set[static_cast<std::size_t>(fold.truths[i])] << ","
               << report.spec.label_set[static_cast<std::size_t>(fold.predictions[i])] << "\n";
    require(static_cast<bool>(os), "write failed: " + path);
}

void emit_report(const ProtocolReport& report, const std::string& json_path,
                 const std::string& csv_path, const std::string& predictions_path) {
    if (!json_path.empty()) {
        std::ofstream os(json_path);
        require(static_cast<bool>(os), "cannot open for writing: " + json_path);
        os << report_json(report) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream os(csv_path);
        require(static_cast<bool>(os), "cannot open for writing: " + csv_path);
        write_report_csv(os, report);
    }
    if (!predictions_path.empty()) write_predictions_csv(predictions_path, report);
    std::cout << "samples " << report.pooled.total() << "  folds " << report.folds.size()
              << "  accuracy " << report.accuracy << "  macro_f1 " << report.macro_f1
              << "  uf1 " << report.uf1_value << "  uar " << report.uar_value << "\n";
    if (!report.degenerate.empty()) {
        std::cout << "degenerate classes:";
        for (const auto& name : report.degenerate) std::cout << " " << name;
        std::cout << "\n";
    }
}

int run_synth(const std::string& out_dir, const SynthSpec& spec) {
    const auto records = synth_generate(spec, out_dir);
    std::cout << "wrote " << records.size() << " clips to " << out_dir << " (manifest.csv)\n";
    return 0;
}

int run_preprocess(const RunSetup& setup, const std::string& manifest_path,
                   const std::string& out_dir, const std::string& only_sample, int input_side,
                   int frames, bool visualize) {
    Config cfg = setup.config();
    const Manifest manifest = load_manifest(manifest_path);
    PreprocessParams params = preprocess_params_from(
        cfg, cfg.has("preprocess.input_side") ? cfg.get_int("preprocess.input_side", 32)
                                              : input_side,
        frames);
    int done = 0;
    for (const SampleRecord& record : manifest.samples) {
        if (!only_sample.empty() && record.sample_id != only_sample) continue;
        preprocess_to_dir(record, params, manifest.mean_frames.at(record.dataset), out_dir,
                          visualize);
        ++done;
    }
    require(done > 0, only_sample.empty() ? "manifest has no samples"
                                          : "no sample named '" + only_sample + "'");
    std::cout << "preprocessed " << done << " clips into " << out_dir << "\n";
    return 0;
}

int run_train(const RunSetup& setup, const std::string& manifest_path,
              const std::string& weights_path, const std::string& log_path) {
    Config cfg = setup.config();
    const Manifest manifest = load_manifest(manifest_path);
    const ProtocolSpec spec = make_protocol(setup.kind(), setup.kind() == ProtocolKind::CDE
                                                              ? ""
                                                              : setup.dataset,
                                            manifest.samples);
    const ModelSpec model = model_for_protocol(cfg, spec);
    const TrainConfig train_cfg = train_config_from(cfg);
    const MaterializedSet set = materialize_from(cfg, manifest, spec, model);

    std::ofstream log_stream;
    if (!log_path.empty()) {
        log_stream.open(log_path);
        require(static_cast<bool>(log_stream), "cannot open for writing: " + log_path);
    }
    NamedTensors init = init_model(model, train_cfg.seed);
    const TrainResult result = train(std::move(init), set.samples, model, train_cfg,
                                     log_path.empty() ? nullptr : &log_stream);
    save_weights(weights_path, result.weights);
    const EpochRecord& last = result.log.back();
    std::cout << "trained " << set.samples.size() << " samples (" << set.excluded
              << " excluded), " << last.epoch + 1 << " epochs, final loss " << last.loss
              << ", train accuracy " << last.train_accuracy << "\n";
    std::cout << "weights saved to " << weights_path << "\n";
    return 0;
}

int run_evaluate(const RunSetup& setup, const std::string& manifest_path,
                 const std::string& weights_path, const std::string& json_path,
                 const std::string& csv_path, const std::string& predictions_path) {
    Config cfg = setup.config();
    const Manifest manifest = load_manifest(manifest_path);
    const ProtocolSpec spec = make_protocol(setup.kind(), setup.kind() == ProtocolKind::CDE
                                                              ? ""
                                                              : setup.dataset,
                                            manifest.samples);
    const ModelSpec model = model_for_protocol(cfg, spec);
    const MaterializedSet set = materialize_from(cfg, manifest, spec, model);

    ProtocolReport report;
    if (!weights_path.empty()) {
        const NamedTensors weights = load_weights(weights_path);
        const std::vector<int> preds = predict(weights, set.samples, model);
        report = score_predictions(set.samples, preds, spec);
    } else {
        report = run_protocol(set.samples, spec, model, train_config_from(cfg));
    }
    if (set.excluded > 0) std::cout << "excluded " << set.excluded << " samples\n";
    emit_report(report, json_path, csv_path, predictions_path);
    return 0;
}

int run_metrics(const std::string& predictions_path, const std::string& json_path) {
    const auto pairs = load_predictions_csv(predictions_path);
    const ConfusionMatrix cm = confusion_from_pairs(pairs);
    const auto [accuracy, macro_f1] = accuracy_and_macro_f1(cm);

    nlohmann::json j;
    j["classes"] = cm.class_names;
    nlohmann::json rows = nlohmann::json::array();
    for (int t = 0; t < cm.classes(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
        rows.push_back(row);
    }
    j["confusion"] = rows;
    j["accuracy"] = accuracy;
    j["macro_f1"] = macro_f1;
    j["uf1"] = uf1(cm);
    j["uar"] = uar(cm);
    j["degenerate_classes"] = degenerate_classes(cm);
    const std::string text = j.dump(2);
    if (!json_path.empty()) {
        std::ofstream os(json_path);
        require(static_cast<bool>(os), "cannot open for writing: " + json_path);
        os << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"micro-expression pipeline: synthesis, preprocessing, training, evaluation"};
    app.require_subcommand(1);

    // synth
    std::string synth_out;
    SynthSpec synth_spec;
    std::string directions = "0,90,180";
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_spec.seed, "generator seed");
    synth->add_option("--subjects", synth_spec.subjects, "number of subjects");
    synth->add_option("--samples-per-subject", synth_spec.samples_per_subject,
                      "clips per subject");
    synth->add_option("--directions", directions, "class motion directions in degrees");
    synth->add_option("--side", synth_spec.image_side, "frame side length");
    synth->add_option("--frames", synth_spec.frames, "frames per clip");
    synth->add_option("--peak", synth_spec.peak_displacement, "apex displacement in pixels");
    synth->add_option("--noise", synth_spec.noise_std, "additive noise std");

    // preprocess
    RunSetup pre_setup;
    std::string pre_manifest, pre_out, pre_sample;
    int pre_side = 32, pre_frames = 11;
    bool pre_visualize = false;
    CLI::App* preprocess = app.add_subcommand(
        "preprocess", "write aligned frames, long-term flow and visualizations");
    preprocess->add_option("--manifest", pre_manifest, "dataset manifest CSV")->required();
    preprocess->add_option("--out", pre_out, "output directory")->required();
    preprocess->add_option("--sample", pre_sample, "process only this sample_id");
    preprocess->add_option("--input-side", pre_side, "working resolution");
    preprocess->add_option("--frames", pre_frames, "frames selected around the apex");
    preprocess->add_flag("--visualize", pre_visualize, "also write colorized flow (PPM)");
    preprocess->add_option("--config", pre_setup.config_path, "configuration file");
    preprocess->add_option("--set", pre_setup.overrides, "override a configuration key");

    // train
    RunSetup train_setup;
    std::string train_manifest, train_weights, train_log;
    CLI::App* train_cmd = app.add_subcommand("train", "train on every retained sample");
    train_cmd->add_option("--manifest", train_manifest, "dataset manifest CSV")->required();
    train_cmd->add_option("--out", train_weights, "weight file to write")->required();
    train_cmd->add_option("--log", train_log, "line-delimited JSON training log");
    add_setup_options(train_cmd, train_setup);

    // evaluate
    RunSetup eval_setup;
    std::string eval_manifest, eval_weights, eval_json, eval_csv, eval_predictions;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "LOSO protocol run, or fixed-weight scoring with --weights");
    evaluate->add_option("--manifest", eval_manifest, "dataset manifest CSV")->required();
    evaluate->add_option("--weights", eval_weights, "score these weights instead of LOSO");
    evaluate->add_option("--report-json", eval_json, "write the JSON report here");
    evaluate->add_option("--report-csv", eval_csv, "write confusion CSVs here");
    evaluate->add_option("--predictions", eval_predictions, "write per-sample predictions CSV");
    add_setup_options(evaluate, eval_setup);

    // metrics
    std::string metrics_predictions, metrics_json;
    CLI::App* metrics = app.add_subcommand("metrics", "score a predictions CSV");
    metrics->add_option("--predictions", metrics_predictions,
                        "CSV with sample_id,true_label,predicted_label")
        ->required();
    metrics->add_option("--out", metrics_json, "also write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            synth_spec.class_directions_deg = parse_directions(directions);
            return run_synth(synth_out, synth_spec);
        }
        if (preprocess->parsed())
            return run_preprocess(pre_setup, pre_manifest, pre_out, pre_sample, pre_side,
                                  pre_frames, pre_visualize);
        if (train_cmd->parsed())
            return run_train(train_setup, train_manifest, train_weights, train_log);
        if (evaluate->parsed())
            return run_evaluate(eval_setup, eval_manifest, eval_weights, eval_json, eval_csv,
                                eval_predictions);
        if (metrics->parsed()) return run_metrics(metrics_predictions, metrics_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
