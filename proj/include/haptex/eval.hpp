#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "haptex/model.hpp"

namespace haptex::eval {

// Affine map from the -100..100 rating scale onto 0..100 (unclamped).
inline double rescale_to_0_100(double v) { return (v + 100.0) / 2.0; }

double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);
double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

struct FoldReport {
  std::string held_out;
  std::string class_label;
  Eigen::Vector4d prediction = Eigen::Vector4d::Zero();  // texture-level mean
  Eigen::Vector4d target = Eigen::Vector4d::Zero();
  Eigen::Vector4d mae = Eigen::Vector4d::Zero();   // per attribute, 0-100 scale
  Eigen::Vector4d rmse = Eigen::Vector4d::Zero();
  Eigen::Vector4d baseline_mae = Eigen::Vector4d::Zero();   // constant-mean predictor
  Eigen::Vector4d baseline_rmse = Eigen::Vector4d::Zero();
  std::vector<Eigen::Vector4d> instance_predictions;
  int epochs_run = 0;
  int best_epoch = 0;
  bool failed = false;
  std::string error;
};

struct ClassMae {
  std::string class_label;
  Eigen::Vector4d mae = Eigen::Vector4d::Zero();
};

struct AggregateReport {
  Eigen::Vector4d mae = Eigen::Vector4d::Zero();
  Eigen::Vector4d rmse = Eigen::Vector4d::Zero();
  Eigen::Vector4d baseline_mae = Eigen::Vector4d::Zero();
  Eigen::Vector4d baseline_rmse = Eigen::Vector4d::Zero();
  std::vector<ClassMae> class_mae;  // ordered by class label
  int folds = 0;
  int failed_folds = 0;
};

struct LoocvOptions {
  uint64_t seed = 1;
  int jobs = 1;
  // test hook: skips training and predicts the held-out texture directly
  std::function<Eigen::Vector4d(const model::TrainingSet&, int)> predictor_override;
};

struct LoocvResult {
  std::vector<FoldReport> folds;
  AggregateReport aggregate;
};

// One fold per texture: train on the rest (fold seed = run seed xor
// hash(texture id)), predict the held-out texture, report per-attribute
// MAE/RMSE on the 0-100 scale alongside a constant-mean-predictor baseline.
LoocvResult loocv(const model::TrainingSet& data, const model::RunConfig& cfg,
                  const LoocvOptions& opts);

AggregateReport aggregate_folds(const std::vector<FoldReport>& folds);

void write_fold_csv(const std::string& path, const std::vector<FoldReport>& folds);
void write_aggregate_csv(const std::string& path, const AggregateReport& aggregate);

// `class,attr,mae` rows ordered by class label then attribute index.
void heatmap_export(const std::string& path, const std::vector<FoldReport>& folds);

struct ComparisonRow {
  std::string system;
  Eigen::Vector4d mae = Eigen::Vector4d::Zero();
};

// Markdown + CSV table, one row per system; the lowest MAE per attribute
// column is flagged (ties flag every holder).
void comparison_report(const std::string& md_path, const std::string& csv_path,
                       const std::vector<ComparisonRow>& rows);

}  // namespace haptex::eval
