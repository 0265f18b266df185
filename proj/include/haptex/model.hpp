#pragma once

#include <json.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "haptex/nn/checkpoint.hpp"
#include "haptex/nn/convlstm.hpp"
#include "haptex/nn/layers.hpp"

namespace haptex::model {

using nn::Matrix;
using nn::ParamRef;
using nn::Vector;

// ---------------------------------------------------------------------------
// Configuration

struct HvNetConfig {
  int input_dim = 2304;
  std::vector<int> encoder_filters{256, 256, 128, 64, 32};
  std::vector<int> encoder_kernels{4, 4, 3, 3, 3};
  // empty = mirror the encoder in reverse order
  std::vector<int> decoder_filters;
  std::vector<int> decoder_kernels;
  int feature_hidden = 512;
  int feature_dim = 128;
  enum class Tap { bottleneck, decoder_output };
  Tap tap = Tap::bottleneck;
};

struct HtNetConfig {
  int input_dim = 526;  // spatial length of each step
  int seq_len = 8;
  std::vector<int> filters{128, 256, 128, 128, 256, 128};
  int kernel = 3;
  std::vector<int> pool_after{2, 4, 5};  // 1-based layer indices
  bool peephole = true;
};

struct FusionConfig {
  int hidden1 = 128;
  int hidden2 = 128;  // pooled down by 2 before the next layer
  int hidden3 = 32;
  int outputs = 4;
  double output_scale = 100.0;  // linear head scaled onto the rating range
};

struct TrainConfig {
  int max_epochs = 200;
  int patience = 10;
  double val_fraction = 0.1;
  int batch_size = 16;
  uint64_t seed = 1;
  double lr = 1e-3;
  double recon_weight = 0.1;  // lambda for the reconstruction term
  int pretrain_epochs = 0;    // reconstruction-only warmup of the autoencoder
  bool standardize = true;
};

struct ModelConfig {
  std::string type = "visuotactile";  // or "ann"
  HvNetConfig hv;
  HtNetConfig ht;
  FusionConfig fusion;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  int sequence_len = 8;
  int sequence_stride = 4;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
uint64_t config_hash(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Dataset currency for training and evaluation

struct TextureData {
  std::string id;
  std::string class_label;
  Eigen::Vector4d target;                  // R-S, F-B, S-S, H-S on -100..100
  std::vector<Matrix> sequences;           // each seq_len x 526
  Matrix image_variants;                   // variants x 2304
};

struct TrainingSet {
  std::vector<TextureData> textures;

  int find_texture(const std::string& id) const;  // -1 if absent
};

struct Instance {
  int texture = 0;
  int sequence = 0;
  int variant = 0;
};

// ---------------------------------------------------------------------------
// Networks

// Visual stream: 1D convolutional autoencoder over the 2304-entry image
// feature vector plus a dense projection head.
class HvNet {
 public:
  explicit HvNet(HvNetConfig cfg);

  void init(Rng& rng);

  struct Output {
    Vector feature;
    Vector reconstruction;
  };
  Output forward(const Vector& x);
  void backward(const Vector& dfeature, const Vector& dreconstruction);

  // cache-free feature path (decoder only runs for the decoder_output tap)
  Vector infer_feature(const Vector& x) const;

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  const std::vector<int>& encoder_lengths() const { return encoder_lengths_; }
  int bottleneck_len() const { return encoder_lengths_.back(); }
  const HvNetConfig& config() const { return cfg_; }

 private:
  Matrix run_encoder(const Vector& x, bool cache);
  Matrix encode(const Vector& x) const;  // cache-free
  Vector head_input(const Matrix& bottleneck, const Matrix& decoder_out) const;

  HvNetConfig cfg_;
  std::vector<int> encoder_lengths_;  // after each pooling stage
  std::vector<nn::Conv1d> enc_;
  std::vector<nn::MaxPool1d> enc_pool_;
  std::vector<nn::Upsample1d> dec_up_;
  std::vector<nn::Conv1d> dec_;
  nn::Conv1d recon_;
  nn::Dense feat1_, feat2_;
  Matrix bottleneck_cache_, decoder_out_cache_;
};

// Tactile stream: stacked 1D ConvLSTM layers with temporal pooling and a
// final spatial average.
class HtNet {
 public:
  explicit HtNet(HtNetConfig cfg);

  void init(Rng& rng);

  Vector forward(const Matrix& seq);  // seq rows are steps
  void backward(const Vector& dfeature);

  Vector infer(const Matrix& seq) const;

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  int output_dim() const { return cfg_.filters.back(); }
  // sequence lengths after each layer (pooling applied), starting at seq_len
  std::vector<int> time_trace() const;
  const HtNetConfig& config() const { return cfg_; }

 private:
  class TimeMaxPool {
   public:
    std::vector<Matrix> forward(const std::vector<Matrix>& seq);
    std::vector<Matrix> backward(const std::vector<Matrix>& dseq) const;
    std::vector<Matrix> apply(const std::vector<Matrix>& seq) const;

   private:
    size_t in_len_ = 0;
    std::vector<Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>> take_first_;
  };

  HtNetConfig cfg_;
  std::vector<nn::ConvLstm1d> layers_;
  std::vector<TimeMaxPool> pools_;
  std::vector<int> pool_stage_;  // pool index after layer i, or -1
  int final_steps_ = 0;
};

// Fusion head: concat -> dense -> dense -> window-2 max pool -> dense -> 4.
class FusionHead {
 public:
  FusionHead(FusionConfig cfg, int vis_dim, int tac_dim);

  void init(Rng& rng);

  Vector forward(const Vector& visual, const Vector& tactile);
  std::pair<Vector, Vector> backward(const Vector& dout);

  Vector infer(const Vector& visual, const Vector& tactile) const;

  void collect_params(std::vector<ParamRef>& out);
  void zero_grads();

  const FusionConfig& config() const { return cfg_; }

 private:
  FusionConfig cfg_;
  int vis_dim_, tac_dim_;
  nn::Dense d1_, d2_, d3_, out_;
  nn::MaxPool1d pool_;
};

// ---------------------------------------------------------------------------
// Trainable models

class TrainableModel {
 public:
  virtual ~TrainableModel() = default;

  virtual void fit_scalers(const TrainingSet& data, std::span<const Instance> train) = 0;
  // forward + backward over one batch; accumulates parameter gradients and
  // returns the batch loss
  virtual double batch_step(const TrainingSet& data, std::span<const Instance> batch) = 0;
  virtual Eigen::Vector4d predict(const TrainingSet& data, const Instance& inst) const = 0;
  virtual std::vector<ParamRef> params() = 0;
  virtual void zero_grads() = 0;
  virtual nn::CheckpointData to_checkpoint() = 0;
  virtual void load_tensors(const nn::CheckpointData& data) = 0;
};

// Per-dimension standardization fitted on the training split.
struct Scaler {
  Vector mean;
  Vector std;

  void fit(const Matrix& rows);
  Vector apply(const Vector& x) const;
  Matrix apply_rows(const Matrix& rows) const;
  void reset(int dim);
};

class VisuoTactileModel : public TrainableModel {
 public:
  VisuoTactileModel(ModelConfig cfg, uint64_t seed);

  struct Output {
    Eigen::Vector4d attributes;
    Vector reconstruction;  // of the standardized visual input
    Vector visual_scaled;
  };
  Output forward(const Matrix& seq, const Vector& visual);
  Eigen::Vector4d predict_features(const Matrix& seq, const Vector& visual) const;

  void fit_scalers(const TrainingSet& data, std::span<const Instance> train) override;
  double batch_step(const TrainingSet& data, std::span<const Instance> batch) override;
  Eigen::Vector4d predict(const TrainingSet& data, const Instance& inst) const override;
  std::vector<ParamRef> params() override;
  void zero_grads() override;
  nn::CheckpointData to_checkpoint() override;
  void load_tensors(const nn::CheckpointData& data) override;

  // reconstruction-only batch for autoencoder pretraining
  double recon_batch_step(const TrainingSet& data, std::span<const Instance> batch);
  std::vector<ParamRef> hv_params();

  HvNet& hv() { return hv_; }
  HtNet& ht() { return ht_; }
  FusionHead& fusion() { return fusion_; }
  const ModelConfig& config() const { return cfg_; }
  double recon_weight() const { return recon_weight_; }
  void set_recon_weight(double w) { recon_weight_ = w; }

 private:
  ModelConfig cfg_;
  HvNet hv_;
  HtNet ht_;
  FusionHead fusion_;
  Scaler tac_scaler_, vis_scaler_;
  double recon_weight_ = 0.1;
};

// Multimodal dense baseline: two parallel branches (128, 256, 256, 128),
// fused through two 64-unit layers and a linear 4-output head.
class AnnBaseline : public TrainableModel {
 public:
  AnnBaseline(int tactile_dim, int visual_dim, uint64_t seed, double output_scale = 100.0);

  Eigen::Vector4d forward_vectors(const Vector& tactile, const Vector& visual);
  Eigen::Vector4d infer_vectors(const Vector& tactile, const Vector& visual) const;
  int64_t param_count() const;

  void fit_scalers(const TrainingSet& data, std::span<const Instance> train) override;
  double batch_step(const TrainingSet& data, std::span<const Instance> batch) override;
  Eigen::Vector4d predict(const TrainingSet& data, const Instance& inst) const override;
  std::vector<ParamRef> params() override;
  void zero_grads() override;
  nn::CheckpointData to_checkpoint() override;
  void load_tensors(const nn::CheckpointData& data) override;

 private:
  Vector backward_vectors(const Eigen::Vector4d& dout);  // returns nothing useful

  double output_scale_;
  std::vector<nn::Dense> tac_branch_, vis_branch_;
  nn::Dense fuse1_, fuse2_, out_;
  Scaler tac_scaler_, vis_scaler_;
};

std::unique_ptr<TrainableModel> make_model(const ModelConfig& cfg, uint64_t seed);

// ---------------------------------------------------------------------------
// Training

// Early stopping on validation loss: strict improvement resets the counter;
// `patience` consecutive non-improving epochs stop the run.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // returns true when training should stop after this epoch
  bool observe(int epoch, double val_loss);
  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int wait_ = 0;
  int best_epoch_ = 0;
  bool improved_ = false;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct TrainHistoryRow {
  int epoch;
  double train_loss;
  double val_loss;
};

struct TrainResult {
  std::vector<TrainHistoryRow> history;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Trains on the listed textures with a texture-stratified validation split,
// early stopping, and best-checkpoint restoration.
TrainResult train(TrainableModel& model, const TrainingSet& data,
                  const std::vector<int>& texture_indices, const TrainConfig& cfg);

// Mean prediction over all of a texture's instances (deterministic pairing:
// sequence i uses image variant i mod V).
Eigen::Vector4d predict_texture(const TrainableModel& model, const TrainingSet& data,
                                int texture_index);

std::vector<Instance> texture_instances(const TrainingSet& data, int texture_index);

void write_history_csv(const std::string& path, const std::vector<TrainHistoryRow>& history);

}  // namespace haptex::model
