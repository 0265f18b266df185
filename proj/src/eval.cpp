#include "haptex/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "haptex/dataset.hpp"
#include "haptex/rng.hpp"

namespace haptex::eval {

double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw ShapeError("mae: length mismatch");
  if (y.size() < 1) throw ShapeError("mae: empty input");
  return (y - y_hat).cwiseAbs().mean();
}

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw ShapeError("rmse: length mismatch");
  if (y.size() < 1) throw ShapeError("rmse: empty input");
  return std::sqrt((y - y_hat).squaredNorm() / static_cast<double>(y.size()));
}

namespace {

// per-attribute errors on the 0-100 scale for a single texture
void texture_errors(const Eigen::Vector4d& target, const Eigen::Vector4d& prediction,
                    Eigen::Vector4d& out_mae, Eigen::Vector4d& out_rmse) {
  for (int a = 0; a < 4; ++a) {
    Eigen::VectorXd y(1), y_hat(1);
    y[0] = rescale_to_0_100(target[a]);
    y_hat[0] = rescale_to_0_100(prediction[a]);
    out_mae[a] = mae(y, y_hat);
    out_rmse[a] = rmse(y, y_hat);
  }
}

FoldReport run_fold(const model::TrainingSet& data, const model::RunConfig& cfg,
                    const LoocvOptions& opts, int held_out) {
  const auto& held = data.textures[held_out];
  FoldReport report;
  report.held_out = held.id;
  report.class_label = held.class_label;
  report.target = held.target;

  std::vector<int> train_indices;
  Eigen::Vector4d mean_target = Eigen::Vector4d::Zero();
  for (int t = 0; t < static_cast<int>(data.textures.size()); ++t) {
    if (t == held_out) continue;
    train_indices.push_back(t);
    mean_target += data.textures[t].target;
  }
  mean_target /= static_cast<double>(train_indices.size());
  texture_errors(held.target, mean_target, report.baseline_mae, report.baseline_rmse);

  try {
    if (opts.predictor_override) {
      report.prediction = opts.predictor_override(data, held_out);
    } else {
      const uint64_t fold_seed = opts.seed ^ fnv1a64(held.id);
      auto model = model::make_model(cfg.model, fold_seed);
      model::TrainConfig train_cfg = cfg.train;
      train_cfg.seed = fold_seed;
      const auto result = model::train(*model, data, train_indices, train_cfg);
      report.epochs_run = result.epochs_run;
      report.best_epoch = result.best_epoch;
      for (const auto& inst : model::texture_instances(data, held_out))
        report.instance_predictions.push_back(model->predict(data, inst));
      report.prediction = model::predict_texture(*model, data, held_out);
    }
    texture_errors(held.target, report.prediction, report.mae, report.rmse);
  } catch (const TrainingAbort& e) {
    report.failed = true;
    report.error = e.what();
  }
  return report;
}

}  // namespace

AggregateReport aggregate_folds(const std::vector<FoldReport>& folds) {
  AggregateReport agg;
  agg.folds = static_cast<int>(folds.size());
  std::map<std::string, std::pair<Eigen::Vector4d, int>> per_class;
  int ok = 0;
  for (const auto& fold : folds) {
    if (fold.failed) {
      ++agg.failed_folds;
      continue;
    }
    ++ok;
    agg.mae += fold.mae;
    agg.rmse += fold.rmse;
    agg.baseline_mae += fold.baseline_mae;
    agg.baseline_rmse += fold.baseline_rmse;
    auto& [sum, count] = per_class[fold.class_label];
    if (count == 0) sum.setZero();
    sum += fold.mae;
    ++count;
  }
  if (ok > 0) {
    agg.mae /= ok;
    agg.rmse /= ok;
    agg.baseline_mae /= ok;
    agg.baseline_rmse /= ok;
  }
  for (const auto& [cls, acc] : per_class)
    agg.class_mae.push_back({cls, acc.first / acc.second});
  return agg;
}

LoocvResult loocv(const model::TrainingSet& data, const model::RunConfig& cfg,
                  const LoocvOptions& opts) {
  const int n = static_cast<int>(data.textures.size());
  if (n < 3) throw ConfigError("loocv: need at least 3 textures");

  LoocvResult result;
  result.folds.resize(n);

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) result.folds[i] = run_fold(data, cfg, opts, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(jobs);
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            result.folds[i] = run_fold(data, cfg, opts, i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  result.aggregate = aggregate_folds(result.folds);
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void write_fold_csv(const std::string& path, const std::vector<FoldReport>& folds) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write fold report: " + path);
  out << "held_out,class,attr,target,prediction,mae,rmse,epochs,best_epoch,failed\n";
  for (const auto& fold : folds) {
    for (int a = 0; a < 4; ++a) {
      out << fold.held_out << ',' << fold.class_label << ',' << data::kAttributeNames[a]
          << ',' << fmt(fold.target[a]) << ',' << fmt(fold.prediction[a]) << ','
          << fmt(fold.mae[a]) << ',' << fmt(fold.rmse[a]) << ',' << fold.epochs_run << ','
          << fold.best_epoch << ',' << (fold.failed ? 1 : 0) << "\n";
    }
  }
}

void write_aggregate_csv(const std::string& path, const AggregateReport& agg) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write aggregate report: " + path);
  out << "attribute,mae,rmse,baseline_mae,baseline_rmse\n";
  for (int a = 0; a < 4; ++a) {
    out << data::kAttributeNames[a] << ',' << fmt(agg.mae[a]) << ',' << fmt(agg.rmse[a])
        << ',' << fmt(agg.baseline_mae[a]) << ',' << fmt(agg.baseline_rmse[a]) << "\n";
  }
}

void heatmap_export(const std::string& path, const std::vector<FoldReport>& folds) {
  if (folds.empty()) throw ArgError("heatmap_export: no folds");
  const auto agg = aggregate_folds(folds);
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write heatmap: " + path);
  out << "class,attr,mae\n";
  for (const auto& cls : agg.class_mae)
    for (int a = 0; a < 4; ++a)
      out << cls.class_label << ',' << data::kAttributeNames[a] << ',' << fmt(cls.mae[a])
          << "\n";
}

void comparison_report(const std::string& md_path, const std::string& csv_path,
                       const std::vector<ComparisonRow>& rows) {
  if (rows.empty()) throw ArgError("comparison_report: no systems");

  Eigen::Vector4d best = rows[0].mae;
  for (const auto& row : rows) best = best.cwiseMin(row.mae);

  std::ofstream csv(csv_path);
  if (!csv) throw FormatError("cannot write comparison csv: " + csv_path);
  csv << "system,rs,fb,ss,hs,best_rs,best_fb,best_ss,best_hs\n";
  for (const auto& row : rows) {
    csv << row.system;
    for (int a = 0; a < 4; ++a) csv << ',' << fmt(row.mae[a]);
    for (int a = 0; a < 4; ++a) csv << ',' << (row.mae[a] == best[a] ? 1 : 0);
    csv << "\n";
  }

  std::ofstream md(md_path);
  if (!md) throw FormatError("cannot write comparison table: " + md_path);
  md << "| System | R-S | F-B | S-S | H-S |\n";
  md << "| --- | --- | --- | --- | --- |\n";
  for (const auto& row : rows) {
    md << "| " << row.system;
    for (int a = 0; a < 4; ++a) {
      const std::string v = fmt(row.mae[a]);
      md << " | " << (row.mae[a] == best[a] ? "**" + v + "**" : v);
    }
    md << " |\n";
  }
}

}  // namespace haptex::eval
