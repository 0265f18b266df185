#include <cmath>
#include <fstream>
#include <numeric>

#include "haptex/model.hpp"
#include "haptex/nn/optimizer.hpp"

namespace haptex::model {

bool EarlyStopper::observe(int epoch, double val_loss) {
  if (val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
    wait_ = 0;
    improved_ = true;
  } else {
    ++wait_;
    improved_ = false;
  }
  return wait_ >= patience_;
}

namespace {

int variant_count(const TrainingSet& data, int texture) {
  return static_cast<int>(data.textures[texture].image_variants.rows());
}

std::vector<Matrix> snapshot(const std::vector<ParamRef>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(*p.value);
  return out;
}

void restore(const std::vector<ParamRef>& params, const std::vector<Matrix>& saved) {
  for (size_t i = 0; i < params.size(); ++i) *params[i].value = saved[i];
}

double validation_loss(const TrainableModel& model, const TrainingSet& data,
                       const std::vector<Instance>& val) {
  Matrix preds(val.size(), 4), targets(val.size(), 4);
  for (size_t i = 0; i < val.size(); ++i) {
    preds.row(i) = model.predict(data, val[i]).transpose();
    targets.row(i) = data.textures[val[i].texture].target.transpose();
  }
  return nn::rmse_loss(preds, targets).value;
}

}  // namespace

TrainResult train(TrainableModel& model, const TrainingSet& data,
                  const std::vector<int>& texture_indices, const TrainConfig& cfg) {
  if (texture_indices.empty()) throw ConfigError("train: no textures selected");
  for (int t : texture_indices) {
    const auto& tx = data.textures.at(t);
    if (tx.sequences.empty())
      throw ConfigError("train: texture " + tx.id + " has no sequences");
    if (tx.image_variants.rows() < 1)
      throw ConfigError("train: texture " + tx.id + " has no image features");
  }

  // texture-stratified validation split
  std::vector<Instance> train_insts, val_insts;
  Rng split_rng(derive_seed(cfg.seed, "val-split"));
  for (int t : texture_indices) {
    const auto& tx = data.textures[t];
    const int v = variant_count(data, t);
    std::vector<int> order(tx.sequences.size());
    std::iota(order.begin(), order.end(), 0);
    split_rng.shuffle(order);
    int n_val = 0;
    if (order.size() >= 2) {
      n_val = std::max<int>(1, std::llround(cfg.val_fraction * order.size()));
      n_val = std::min<int>(n_val, static_cast<int>(order.size()) - 1);
    }
    for (size_t i = 0; i < order.size(); ++i) {
      Instance inst{t, order[i], order[i] % v};
      if (static_cast<int>(i) < n_val) {
        val_insts.push_back(inst);
      } else {
        train_insts.push_back(inst);
      }
    }
  }
  if (train_insts.empty() || val_insts.empty())
    throw ConfigError("train: validation split needs at least one instance per side");

  if (cfg.standardize) model.fit_scalers(data, train_insts);

  if (auto* vt = dynamic_cast<VisuoTactileModel*>(&model)) {
    vt->set_recon_weight(cfg.recon_weight);
    if (cfg.pretrain_epochs > 0) {
      nn::Adam pre_opt(vt->hv_params(), {.lr = cfg.lr});
      for (int epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "pretrain-" + std::to_string(epoch)));
        std::vector<Instance> order = train_insts;
        rng.shuffle(order);
        for (size_t at = 0; at < order.size(); at += cfg.batch_size) {
          const size_t n = std::min<size_t>(cfg.batch_size, order.size() - at);
          model.zero_grads();
          vt->recon_batch_step(data, std::span<const Instance>(order.data() + at, n));
          pre_opt.step();
        }
      }
    }
  }

  nn::Adam opt(model.params(), {.lr = cfg.lr});

  TrainResult result;
  EarlyStopper stopper(cfg.patience);
  std::vector<Matrix> best = snapshot(model.params());

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    // per-epoch pairing of sequences with image-feature variants
    std::vector<Instance> order = train_insts;
    for (auto& inst : order)
      inst.variant = rng.uniform_int(0, variant_count(data, inst.texture) - 1);
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const size_t n = std::min<size_t>(cfg.batch_size, order.size() - at);
      model.zero_grads();
      const double loss =
          model.batch_step(data, std::span<const Instance>(order.data() + at, n));
      if (!std::isfinite(loss))
        throw TrainingAbort("non-finite loss at epoch " + std::to_string(epoch));
      opt.step();
      loss_sum += loss * static_cast<double>(n);
    }
    const double train_loss = loss_sum / static_cast<double>(order.size());
    const double val_loss = validation_loss(model, data, val_insts);

    result.history.push_back({epoch, train_loss, val_loss});
    result.epochs_run = epoch;

    const bool stop = stopper.observe(epoch, val_loss);
    if (stopper.improved()) best = snapshot(model.params());
    if (stop) break;
  }

  restore(model.params(), best);
  result.best_epoch = stopper.best_epoch();
  result.best_val_loss = stopper.best_loss();
  return result;
}

std::vector<Instance> texture_instances(const TrainingSet& data, int texture_index) {
  const auto& tx = data.textures.at(texture_index);
  if (tx.sequences.empty()) throw ArgError("texture has no instances: " + tx.id);
  const int v = std::max<int>(1, static_cast<int>(tx.image_variants.rows()));
  std::vector<Instance> out;
  out.reserve(tx.sequences.size());
  for (size_t i = 0; i < tx.sequences.size(); ++i)
    out.push_back({texture_index, static_cast<int>(i), static_cast<int>(i) % v});
  return out;
}

Eigen::Vector4d predict_texture(const TrainableModel& model, const TrainingSet& data,
                                int texture_index) {
  const auto insts = texture_instances(data, texture_index);
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (const auto& inst : insts) acc += model.predict(data, inst);
  return acc / static_cast<double>(insts.size());
}

void write_history_csv(const std::string& path, const std::vector<TrainHistoryRow>& history) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write history: " + path);
  out << "epoch,train_loss,val_loss\n";
  char buf[128];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", row.epoch, row.train_loss,
                  row.val_loss);
    out << buf;
  }
}

}  // namespace haptex::model
