#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "haptex/csv.hpp"
#include "haptex/dataset.hpp"
#include "haptex/eval.hpp"
#include "haptex/feature_file.hpp"
#include "haptex/image.hpp"
#include "haptex/model.hpp"
#include "haptex/pipeline.hpp"
#include "haptex/vision.hpp"

namespace fs = std::filesystem;
using namespace haptex;

namespace {

int g_log_level = 1;  // 0 errors, 1 info, 2 debug

void log_info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << "[haptex] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (g_log_level >= 2) std::cerr << "[haptex:debug] " << msg << "\n";
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_run_json(const fs::path& dir, const std::string& command,
                    const model::RunConfig& cfg, uint64_t seed,
                    const nlohmann::json& extra) {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = model::to_json(cfg);
  j["config_hash"] = model::config_hash(cfg);
  j["timestamp"] = iso_timestamp();
  j["selection"] = "best-validation checkpoint (early stopping)";
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(dir / "run.json");
  out << j.dump(2) << "\n";
}

model::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return model::RunConfig{};
  return model::load_run_config(path);
}

std::unique_ptr<model::TrainableModel> model_from_checkpoint(const nn::CheckpointData& ckpt) {
  const std::string type = ckpt.meta.value("model_type", "visuotactile");
  if (!ckpt.meta.contains("config"))
    throw FormatError("checkpoint carries no architecture config");
  const auto cfg = model::run_config_from_json(ckpt.meta.at("config"));
  auto out = model::make_model(cfg.model, 0);
  out->load_tensors(ckpt);
  if (cfg.model.type != type)
    throw FormatError("checkpoint model_type disagrees with its config");
  return out;
}

int run_preprocess(const std::string& in, const std::string& out) {
  if (fs::is_regular_file(in) && fs::path(in).filename() == "manifest.json") {
    log_info("preparing dataset listed in " + in);
    pipeline::prepare_dataset(in);
    return 0;
  }
  if (!fs::exists(fs::path(in) / "accel.csv"))
    throw IngestError("no accel.csv under " + in + " (expected a raw recording directory)");
  fs::create_directories(out);
  const auto rec = pipeline::read_recording(in);
  const auto processed = pipeline::preprocess(rec);
  const auto out_csv = fs::path(out) / "processed.csv";
  pipeline::write_processed_csv(out_csv.string(), processed);
  log_info("wrote " + out_csv.string());
  return 0;
}

int run_features_tactile(const std::string& in, const std::string& out,
                         const model::RunConfig& cfg) {
  const auto processed = pipeline::read_processed_csv(in);
  pipeline::PipelineConfig pcfg;
  const auto rows = pipeline::extract_tactile_features(processed, pcfg);
  pipeline::write_tactile_features(out, processed.texture_id, rows, cfg.sequence_len,
                                   cfg.sequence_stride);
  log_info("wrote " + out + " (" + std::to_string(rows.rows()) + " segments)");
  return 0;
}

int run_features_vision(const std::string& in, const std::string& out, uint64_t seed,
                        int augment_count, const std::string& deep_path) {
  const auto img = vision::load_gray(in);
  Eigen::MatrixXf bank(augment_count + 1, vision::kImageFeatureDim);

  const vision::FallbackDeepExtractor fallback(seed);
  auto features_of = [&](const vision::GrayImage& view) {
    if (!deep_path.empty()) {
      // precomputed deep features apply to the unaugmented image only
      return vision::image_feature_vector(view, vision::ingest_deep_features(deep_path));
    }
    return vision::image_feature_vector(view, fallback);
  };

  bank.row(0) = features_of(img).values.cast<float>().transpose();
  for (int k = 1; k <= augment_count; ++k) {
    const auto aug = vision::augment(img, derive_seed(seed, "augment-" + std::to_string(k)));
    // augmented views always use the fallback extractor; precomputed deep
    // features describe the unaugmented image only
    const auto v = vision::image_feature_vector(aug, fallback);
    bank.row(k) = v.values.cast<float>().transpose();
  }
  io::write_feature_file(out, "HVFT", bank);
  nlohmann::json sidecar{{"image", in}, {"seed", seed}, {"variants", augment_count + 1}};
  std::ofstream sc(out + ".json");
  sc << sidecar.dump(2) << "\n";
  log_info("wrote " + out);
  return 0;
}

int run_loocv(const std::string& config_path, const std::string& manifest,
              const std::string& out_dir, uint64_t seed, int jobs) {
  const auto cfg = load_config_or_default(config_path);
  fs::create_directories(out_dir);
  log_info("loading dataset from " + manifest);
  const auto data = data::load_training_set(manifest, cfg.sequence_len, cfg.sequence_stride);
  log_info("running LOOCV over " + std::to_string(data.textures.size()) + " textures, jobs=" +
           std::to_string(jobs));

  eval::LoocvOptions opts;
  opts.seed = seed;
  opts.jobs = jobs;
  const auto result = eval::loocv(data, cfg, opts);

  const fs::path dir(out_dir);
  eval::write_aggregate_csv((dir / "aggregate_report.csv").string(), result.aggregate);
  eval::write_fold_csv((dir / "folds.csv").string(), result.folds);
  eval::heatmap_export((dir / "heatmap.csv").string(), result.folds);
  write_run_json(dir, "loocv", cfg, seed,
                 {{"manifest", manifest},
                  {"jobs", jobs},
                  {"folds", result.aggregate.folds},
                  {"failed_folds", result.aggregate.failed_folds}});

  for (int a = 0; a < 4; ++a)
    std::printf("%s: mae=%.4f rmse=%.4f (mean-predictor mae=%.4f)\n",
                data::kAttributeNames[a], result.aggregate.mae[a], result.aggregate.rmse[a],
                result.aggregate.baseline_mae[a]);
  if (result.aggregate.failed_folds > 0) {
    std::cerr << result.aggregate.failed_folds << " fold(s) failed\n";
    return 4;
  }
  return 0;
}

int run_train(const std::string& config_path, const std::string& manifest,
              const std::string& out_dir, uint64_t seed) {
  auto cfg = load_config_or_default(config_path);
  if (seed != 0) cfg.train.seed = seed;
  fs::create_directories(out_dir);
  const auto data = data::load_training_set(manifest, cfg.sequence_len, cfg.sequence_stride);

  auto model = model::make_model(cfg.model, cfg.train.seed);
  std::vector<int> all(data.textures.size());
  std::iota(all.begin(), all.end(), 0);
  log_info("training on " + std::to_string(all.size()) + " textures");
  const auto result = model::train(*model, data, all, cfg.train);

  const fs::path dir(out_dir);
  auto ckpt = model->to_checkpoint();
  ckpt.meta["config"] = model::to_json(cfg);
  ckpt.meta["seed"] = cfg.train.seed;
  ckpt.meta["epochs_run"] = result.epochs_run;
  ckpt.meta["best_epoch"] = result.best_epoch;
  nn::save_checkpoint((dir / "checkpoint.hapt").string(), ckpt);
  model::write_history_csv((dir / "history.csv").string(), result.history);
  write_run_json(dir, "train", cfg, cfg.train.seed,
                 {{"manifest", manifest},
                  {"epochs_run", result.epochs_run},
                  {"best_epoch", result.best_epoch},
                  {"best_val_loss", result.best_val_loss}});
  log_info("best epoch " + std::to_string(result.best_epoch) + " of " +
           std::to_string(result.epochs_run));
  return 0;
}

int run_predict(const std::string& checkpoint, const std::string& manifest,
                const std::string& texture) {
  const auto ckpt = nn::load_checkpoint(checkpoint);
  const auto cfg = model::run_config_from_json(ckpt.meta.at("config"));
  auto model = model_from_checkpoint(ckpt);
  const auto data = data::load_training_set(manifest, cfg.sequence_len, cfg.sequence_stride);
  const int idx = data.find_texture(texture);
  if (idx < 0) throw ManifestError("texture not in manifest: " + texture);
  const auto pred = model::predict_texture(*model, data, idx);
  std::printf("texture_id,rs,fb,ss,hs\n%s,%.6f,%.6f,%.6f,%.6f\n", texture.c_str(), pred[0],
              pred[1], pred[2], pred[3]);
  return 0;
}

int run_report(const std::vector<std::string>& runs, const std::string& out_dir) {
  std::vector<eval::ComparisonRow> rows;
  for (const auto& run : runs) {
    const fs::path agg = fs::path(run) / "aggregate_report.csv";
    const auto csv = io::read_csv(agg.string());
    const int attr = csv.column("attribute");
    const int mae_col = csv.column("mae");
    eval::ComparisonRow row;
    row.system = fs::path(run).filename().string();
    if (row.system.empty()) row.system = run;
    for (const auto& r : csv.rows) {
      for (int a = 0; a < 4; ++a)
        if (r[attr] == data::kAttributeNames[a])
          row.mae[a] = io::parse_double(r[mae_col], agg.string());
    }
    rows.push_back(std::move(row));
  }
  fs::create_directories(out_dir);
  eval::comparison_report((fs::path(out_dir) / "comparison.md").string(),
                          (fs::path(out_dir) / "comparison.csv").string(), rows);
  log_info("wrote comparison tables under " + out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"haptic texture attribute prediction pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  uint64_t seed = 1;
  std::string config_path;
  std::string log_level = "info";
  app.add_option("--seed", seed, "run seed");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--log-level", log_level, "error|info|debug");

  auto* preprocess = app.add_subcommand("preprocess",
                                        "raw recording directory (or manifest) -> processed signals");
  std::string pre_in, pre_out;
  preprocess->add_option("raw_dir", pre_in, "raw recording directory or manifest.json")->required();
  preprocess->add_option("out_dir", pre_out, "output directory")->default_val(".");

  auto* features = app.add_subcommand("features", "feature extraction");
  features->require_subcommand(1);
  auto* f_tac = features->add_subcommand("tactile", "processed.csv -> HTFT feature file");
  std::string ft_in, ft_out;
  f_tac->add_option("in", ft_in)->required();
  f_tac->add_option("out", ft_out)->required();
  auto* f_vis = features->add_subcommand("vision", "image -> HVFT feature file");
  std::string fv_in, fv_out, fv_deep;
  int fv_augment = 0;
  f_vis->add_option("in", fv_in)->required();
  f_vis->add_option("out", fv_out)->required();
  f_vis->add_option("--augment", fv_augment, "number of augmented variants");
  f_vis->add_option("--deep-features", fv_deep, "precomputed 49x2048 HVFT file");

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  int synth_textures = 12;
  double synth_duration = 60.0;
  int synth_images = 8;
  int synth_participants = 1;
  std::string synth_out = "synth_dataset";
  bool synth_prepare = false;
  synth->add_option("--textures", synth_textures);
  synth->add_option("--duration", synth_duration, "raw recording seconds");
  synth->add_option("--images", synth_images, "image-feature variants per texture");
  synth->add_option("--participants", synth_participants);
  synth->add_option("--out", synth_out);
  synth->add_flag("--prepare", synth_prepare, "also run preprocessing + tactile features");

  auto* train_cmd = app.add_subcommand("train", "train on every texture in the manifest");
  std::string train_manifest, train_out = "run_train";
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--out", train_out);

  auto* loocv_cmd = app.add_subcommand("loocv", "leave-one-texture-out cross validation");
  std::string loocv_manifest, loocv_out = "run_loocv";
  int jobs = 1;
  loocv_cmd->add_option("--manifest", loocv_manifest)->required();
  loocv_cmd->add_option("--out", loocv_out);
  loocv_cmd->add_option("--jobs", jobs, "parallel fold workers");

  auto* predict_cmd = app.add_subcommand("predict", "predict attributes for one texture");
  std::string pr_checkpoint, pr_manifest, pr_texture;
  predict_cmd->add_option("--checkpoint", pr_checkpoint)->required();
  predict_cmd->add_option("--manifest", pr_manifest)->required();
  predict_cmd->add_option("--texture", pr_texture)->required();

  auto* report_cmd = app.add_subcommand("report", "comparison table across run directories");
  std::vector<std::string> report_runs;
  std::string report_out = "report";
  report_cmd->add_option("--runs", report_runs)->required()->expected(-1);
  report_cmd->add_option("--out", report_out);

  CLI11_PARSE(app, argc, argv);

  g_log_level = log_level == "debug" ? 2 : log_level == "error" ? 0 : 1;

  try {
    if (preprocess->parsed()) return run_preprocess(pre_in, pre_out);
    if (f_tac->parsed())
      return run_features_tactile(ft_in, ft_out, load_config_or_default(config_path));
    if (f_vis->parsed()) return run_features_vision(fv_in, fv_out, seed, fv_augment, fv_deep);
    if (synth->parsed()) {
      data::SynthConfig cfg;
      cfg.seed = seed;
      cfg.n_textures = synth_textures;
      cfg.duration_s = synth_duration;
      cfg.images_per_texture = synth_images;
      cfg.participants = synth_participants;
      data::synth_generate(synth_out, cfg);
      log_info("synthetic dataset written to " + synth_out);
      if (synth_prepare) {
        const auto run_cfg = load_config_or_default(config_path);
        pipeline::prepare_dataset((fs::path(synth_out) / "manifest.json").string(), {},
                                  run_cfg.sequence_len, run_cfg.sequence_stride);
        log_info("dataset prepared (processed signals + tactile features)");
      }
      return 0;
    }
    if (train_cmd->parsed()) return run_train(config_path, train_manifest, train_out, seed);
    if (loocv_cmd->parsed())
      return run_loocv(config_path, loocv_manifest, loocv_out, seed, jobs);
    if (predict_cmd->parsed()) return run_predict(pr_checkpoint, pr_manifest, pr_texture);
    if (report_cmd->parsed()) return run_report(report_runs, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingAbort& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  log_debug("no subcommand dispatched");
  return 1;
}
