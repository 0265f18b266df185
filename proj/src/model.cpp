#include "haptex/model.hpp"

#include <cmath>
#include <fstream>

namespace haptex::model {

namespace {

std::vector<int> reversed(std::vector<int> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config JSON

namespace {

nlohmann::json hv_to_json(const HvNetConfig& c) {
  return {{"input_dim", c.input_dim},
          {"encoder_filters", c.encoder_filters},
          {"encoder_kernels", c.encoder_kernels},
          {"decoder_filters", c.decoder_filters},
          {"decoder_kernels", c.decoder_kernels},
          {"feature_hidden", c.feature_hidden},
          {"feature_dim", c.feature_dim},
          {"tap", c.tap == HvNetConfig::Tap::bottleneck ? "bottleneck" : "decoder_output"}};
}

HvNetConfig hv_from_json(const nlohmann::json& j) {
  HvNetConfig c;
  c.input_dim = j.value("input_dim", c.input_dim);
  c.encoder_filters = j.value("encoder_filters", c.encoder_filters);
  c.encoder_kernels = j.value("encoder_kernels", c.encoder_kernels);
  c.decoder_filters = j.value("decoder_filters", c.decoder_filters);
  c.decoder_kernels = j.value("decoder_kernels", c.decoder_kernels);
  c.feature_hidden = j.value("feature_hidden", c.feature_hidden);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  const std::string tap = j.value("tap", "bottleneck");
  if (tap == "bottleneck") {
    c.tap = HvNetConfig::Tap::bottleneck;
  } else if (tap == "decoder_output") {
    c.tap = HvNetConfig::Tap::decoder_output;
  } else {
    throw ConfigError("unknown hvnet tap: " + tap);
  }
  return c;
}

nlohmann::json ht_to_json(const HtNetConfig& c) {
  return {{"input_dim", c.input_dim}, {"seq_len", c.seq_len},   {"filters", c.filters},
          {"kernel", c.kernel},       {"pool_after", c.pool_after}, {"peephole", c.peephole}};
}

HtNetConfig ht_from_json(const nlohmann::json& j) {
  HtNetConfig c;
  c.input_dim = j.value("input_dim", c.input_dim);
  c.seq_len = j.value("seq_len", c.seq_len);
  c.filters = j.value("filters", c.filters);
  c.kernel = j.value("kernel", c.kernel);
  c.pool_after = j.value("pool_after", c.pool_after);
  c.peephole = j.value("peephole", c.peephole);
  return c;
}

nlohmann::json fusion_to_json(const FusionConfig& c) {
  return {{"hidden1", c.hidden1},
          {"hidden2", c.hidden2},
          {"hidden3", c.hidden3},
          {"outputs", c.outputs},
          {"output_scale", c.output_scale}};
}

FusionConfig fusion_from_json(const nlohmann::json& j) {
  FusionConfig c;
  c.hidden1 = j.value("hidden1", c.hidden1);
  c.hidden2 = j.value("hidden2", c.hidden2);
  c.hidden3 = j.value("hidden3", c.hidden3);
  c.outputs = j.value("outputs", c.outputs);
  c.output_scale = j.value("output_scale", c.output_scale);
  return c;
}

nlohmann::json train_to_json(const TrainConfig& c) {
  return {{"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"val_fraction", c.val_fraction},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"lr", c.lr},
          {"recon_weight", c.recon_weight},
          {"pretrain_epochs", c.pretrain_epochs},
          {"standardize", c.standardize}};
}

TrainConfig train_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.lr = j.value("lr", c.lr);
  c.recon_weight = j.value("recon_weight", c.recon_weight);
  c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
  c.standardize = j.value("standardize", c.standardize);
  return c;
}

}  // namespace

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"version", 1},
          {"model_type", cfg.model.type},
          {"hvnet", hv_to_json(cfg.model.hv)},
          {"htnet", ht_to_json(cfg.model.ht)},
          {"fusion", fusion_to_json(cfg.model.fusion)},
          {"train", train_to_json(cfg.train)},
          {"sequence", {{"s", cfg.sequence_len}, {"stride", cfg.sequence_stride}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  if (j.value("version", 1) != 1) throw ConfigError("unsupported config version");
  cfg.model.type = j.value("model_type", cfg.model.type);
  if (cfg.model.type != "visuotactile" && cfg.model.type != "ann")
    throw ConfigError("unknown model_type: " + cfg.model.type);
  if (j.contains("hvnet")) cfg.model.hv = hv_from_json(j.at("hvnet"));
  if (j.contains("htnet")) cfg.model.ht = ht_from_json(j.at("htnet"));
  if (j.contains("fusion")) cfg.model.fusion = fusion_from_json(j.at("fusion"));
  if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
  if (j.contains("sequence")) {
    cfg.sequence_len = j.at("sequence").value("s", cfg.sequence_len);
    cfg.sequence_stride = j.at("sequence").value("stride", cfg.sequence_stride);
  }
  cfg.model.ht.seq_len = cfg.sequence_len;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(to_json(cfg).dump()); }

int TrainingSet::find_texture(const std::string& id) const {
  for (size_t i = 0; i < textures.size(); ++i)
    if (textures[i].id == id) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// HvNet

HvNet::HvNet(HvNetConfig cfg)
    : cfg_(std::move(cfg)),
      recon_("hv/recon", 3, 1, 1, nn::Act::linear),
      feat1_("hv/feat1", 1, 1, nn::Act::relu),
      feat2_("hv/feat2", 1, 1, nn::Act::relu) {
  if (cfg_.encoder_filters.empty() ||
      cfg_.encoder_filters.size() != cfg_.encoder_kernels.size())
    throw ConfigError("hvnet: encoder filters/kernels mismatch");
  if (cfg_.decoder_filters.empty()) cfg_.decoder_filters = reversed(cfg_.encoder_filters);
  if (cfg_.decoder_kernels.empty()) cfg_.decoder_kernels = reversed(cfg_.encoder_kernels);
  if (cfg_.decoder_filters.size() != cfg_.decoder_kernels.size())
    throw ConfigError("hvnet: decoder filters/kernels mismatch");

  const auto n = cfg_.encoder_filters.size();
  int len = cfg_.input_dim;
  int ch = 1;
  for (size_t i = 0; i < n; ++i) {
    enc_.emplace_back("hv/enc" + std::to_string(i), cfg_.encoder_kernels[i], ch,
                      cfg_.encoder_filters[i], nn::Act::relu);
    enc_pool_.emplace_back();
    if (len % 2 != 0)
      throw ConfigError("hvnet: input_dim must halve cleanly at every pooling stage");
    len /= 2;
    encoder_lengths_.push_back(len);
    ch = cfg_.encoder_filters[i];
  }

  int dch = ch;
  for (size_t i = 0; i < cfg_.decoder_filters.size(); ++i) {
    dec_up_.emplace_back();
    dec_.emplace_back("hv/dec" + std::to_string(i), cfg_.decoder_kernels[i], dch,
                      cfg_.decoder_filters[i], nn::Act::relu);
    dch = cfg_.decoder_filters[i];
  }
  recon_ = nn::Conv1d("hv/recon", 3, dch, 1, nn::Act::linear);

  const int head_in = cfg_.tap == HvNetConfig::Tap::bottleneck
                          ? bottleneck_len() * cfg_.encoder_filters.back()
                          : cfg_.decoder_filters.back();
  feat1_ = nn::Dense("hv/feat1", head_in, cfg_.feature_hidden, nn::Act::relu);
  feat2_ = nn::Dense("hv/feat2", cfg_.feature_hidden, cfg_.feature_dim, nn::Act::relu);
}

void HvNet::init(Rng& rng) {
  for (auto& c : enc_) c.init(rng);
  for (auto& c : dec_) c.init(rng);
  recon_.init(rng);
  feat1_.init(rng);
  feat2_.init(rng);
}

Matrix HvNet::run_encoder(const Vector& x, bool cache) {
  if (x.size() != cfg_.input_dim)
    throw ShapeError("hvnet: expected input of " + std::to_string(cfg_.input_dim) +
                     ", got " + std::to_string(x.size()));
  Matrix m = x;
  m.resize(x.size(), 1);
  for (size_t i = 0; i < enc_.size(); ++i) {
    if (cache) {
      m = enc_pool_[i].forward(enc_[i].forward(m));
    } else {
      m = nn::maxpool2(enc_[i].apply(m));
    }
  }
  return m;
}

Matrix HvNet::encode(const Vector& x) const {
  if (x.size() != cfg_.input_dim)
    throw ShapeError("hvnet: expected input of " + std::to_string(cfg_.input_dim) +
                     ", got " + std::to_string(x.size()));
  Matrix m = x;
  m.resize(x.size(), 1);
  for (const auto& conv : enc_) m = nn::maxpool2(conv.apply(m));
  return m;
}

Vector HvNet::head_input(const Matrix& bottleneck, const Matrix& decoder_out) const {
  if (cfg_.tap == HvNetConfig::Tap::bottleneck)
    return Eigen::Map<const Vector>(bottleneck.data(), bottleneck.size());
  return decoder_out.colwise().mean();
}

HvNet::Output HvNet::forward(const Vector& x) {
  bottleneck_cache_ = run_encoder(x, true);

  Matrix d = bottleneck_cache_;
  for (size_t i = 0; i < dec_.size(); ++i) d = dec_[i].forward(dec_up_[i].forward(d));
  decoder_out_cache_ = d;
  const Matrix r = recon_.forward(d);

  const Vector head = head_input(bottleneck_cache_, decoder_out_cache_);
  Output out;
  out.feature = feat2_.forward(feat1_.forward(head));
  out.reconstruction = r.col(0);
  return out;
}

Vector HvNet::infer_feature(const Vector& x) const {
  const Matrix bottleneck = encode(x);
  Matrix d;
  if (cfg_.tap == HvNetConfig::Tap::decoder_output) {
    d = bottleneck;
    for (size_t i = 0; i < dec_.size(); ++i) d = dec_[i].apply(nn::upsample2(d));
  }
  const Vector head = head_input(bottleneck, d);
  return feat2_.apply(feat1_.apply(head));
}

void HvNet::backward(const Vector& dfeature, const Vector& dreconstruction) {
  const Vector dhead = feat1_.backward(feat2_.backward(dfeature));

  Matrix dr = dreconstruction;
  dr.resize(dreconstruction.size(), 1);
  Matrix dd = recon_.backward(dr);
  if (cfg_.tap == HvNetConfig::Tap::decoder_output)
    dd.rowwise() += dhead.transpose() / static_cast<double>(decoder_out_cache_.rows());

  for (size_t i = dec_.size(); i-- > 0;)
    dd = dec_up_[i].backward(dec_[i].backward(dd));

  Matrix dbott = dd;
  if (cfg_.tap == HvNetConfig::Tap::bottleneck)
    dbott += Eigen::Map<const Matrix>(dhead.data(), bottleneck_cache_.rows(),
                                      bottleneck_cache_.cols());

  for (size_t i = enc_.size(); i-- > 0;)
    dbott = enc_[i].backward(enc_pool_[i].backward(dbott));
}

void HvNet::collect_params(std::vector<ParamRef>& out) {
  for (auto& c : enc_) c.collect_params(out);
  for (auto& c : dec_) c.collect_params(out);
  recon_.collect_params(out);
  feat1_.collect_params(out);
  feat2_.collect_params(out);
}

void HvNet::zero_grads() {
  for (auto& c : enc_) c.zero_grads();
  for (auto& c : dec_) c.zero_grads();
  recon_.zero_grads();
  feat1_.zero_grads();
  feat2_.zero_grads();
}

// ---------------------------------------------------------------------------
// HtNet

HtNet::HtNet(HtNetConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.filters.empty()) throw ConfigError("htnet: needs at least one layer");
  int ch = 1;
  int steps = cfg_.seq_len;
  pool_stage_.assign(cfg_.filters.size(), -1);
  for (size_t i = 0; i < cfg_.filters.size(); ++i) {
    layers_.emplace_back("ht/lstm" + std::to_string(i), cfg_.input_dim, ch,
                         cfg_.filters[i], cfg_.kernel, cfg_.peephole);
    ch = cfg_.filters[i];
    const bool pooled = std::find(cfg_.pool_after.begin(), cfg_.pool_after.end(),
                                  static_cast<int>(i) + 1) != cfg_.pool_after.end();
    if (pooled) {
      if (steps % 2 != 0)
        throw ConfigError("htnet: sequence length incompatible with the pooling schedule");
      steps /= 2;
      pool_stage_[i] = static_cast<int>(pools_.size());
      pools_.emplace_back();
    }
  }
  final_steps_ = steps;
}

void HtNet::init(Rng& rng) {
  for (auto& l : layers_) l.init(rng);
}

std::vector<int> HtNet::time_trace() const {
  std::vector<int> trace{cfg_.seq_len};
  int steps = cfg_.seq_len;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (pool_stage_[i] >= 0) steps /= 2;
    trace.push_back(steps);
  }
  return trace;
}

Vector HtNet::forward(const Matrix& seq) {
  if (seq.rows() != cfg_.seq_len || seq.cols() != cfg_.input_dim)
    throw ShapeError("htnet: expected sequence " + std::to_string(cfg_.seq_len) + "x" +
                     std::to_string(cfg_.input_dim));
  std::vector<Matrix> xs;
  xs.reserve(cfg_.seq_len);
  for (int t = 0; t < cfg_.seq_len; ++t) xs.push_back(seq.row(t).transpose());

  for (size_t i = 0; i < layers_.size(); ++i) {
    xs = layers_[i].forward(xs);
    if (pool_stage_[i] >= 0) xs = pools_[pool_stage_[i]].forward(xs);
  }
  return xs.back().colwise().mean();
}

Vector HtNet::infer(const Matrix& seq) const {
  if (seq.rows() != cfg_.seq_len || seq.cols() != cfg_.input_dim)
    throw ShapeError("htnet: expected sequence " + std::to_string(cfg_.seq_len) + "x" +
                     std::to_string(cfg_.input_dim));
  std::vector<Matrix> xs;
  xs.reserve(cfg_.seq_len);
  for (int t = 0; t < cfg_.seq_len; ++t) xs.push_back(seq.row(t).transpose());

  for (size_t i = 0; i < layers_.size(); ++i) {
    const auto& cell = layers_[i];
    Matrix h = Matrix::Zero(cell.length(), cell.hidden_channels());
    Matrix c = h;
    std::vector<Matrix> hs;
    hs.reserve(xs.size());
    for (const auto& x : xs) {
      auto [hn, cn] = cell.step(x, h, c);
      h = std::move(hn);
      c = std::move(cn);
      hs.push_back(h);
    }
    if (pool_stage_[i] >= 0) hs = pools_[pool_stage_[i]].apply(hs);
    xs = std::move(hs);
  }
  return xs.back().colwise().mean();
}

void HtNet::backward(const Vector& dfeature) {
  const auto& last = layers_.back();
  const double inv_len = 1.0 / static_cast<double>(cfg_.input_dim);
  Matrix dlast(cfg_.input_dim, last.hidden_channels());
  for (int c = 0; c < last.hidden_channels(); ++c)
    dlast.col(c).setConstant(dfeature[c] * inv_len);

  std::vector<Matrix> dseq(final_steps_,
                           Matrix::Zero(cfg_.input_dim, last.hidden_channels()));
  dseq.back() = dlast;

  for (size_t i = layers_.size(); i-- > 0;) {
    if (pool_stage_[i] >= 0) dseq = pools_[pool_stage_[i]].backward(dseq);
    dseq = layers_[i].backward(dseq);
  }
}

void HtNet::collect_params(std::vector<ParamRef>& out) {
  for (auto& l : layers_) l.collect_params(out);
}

void HtNet::zero_grads() {
  for (auto& l : layers_) l.zero_grads();
}

std::vector<Matrix> HtNet::TimeMaxPool::forward(const std::vector<Matrix>& seq) {
  in_len_ = seq.size();
  take_first_.clear();
  std::vector<Matrix> out;
  const size_t n_out = (seq.size() + 1) / 2;
  out.reserve(n_out);
  take_first_.reserve(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    const size_t a = 2 * i;
    const size_t b = std::min(a + 1, seq.size() - 1);
    take_first_.emplace_back((seq[a].array() >= seq[b].array()).cast<uint8_t>());
    out.push_back(seq[a].cwiseMax(seq[b]));
  }
  return out;
}

std::vector<Matrix> HtNet::TimeMaxPool::apply(const std::vector<Matrix>& seq) const {
  std::vector<Matrix> out;
  const size_t n_out = (seq.size() + 1) / 2;
  out.reserve(n_out);
  for (size_t i = 0; i < n_out; ++i) {
    const size_t a = 2 * i;
    const size_t b = std::min(a + 1, seq.size() - 1);
    out.push_back(seq[a].cwiseMax(seq[b]));
  }
  return out;
}

std::vector<Matrix> HtNet::TimeMaxPool::backward(const std::vector<Matrix>& dseq) const {
  std::vector<Matrix> dx(in_len_);
  for (size_t i = 0; i < dseq.size(); ++i) {
    const size_t a = 2 * i;
    const size_t b = std::min(a + 1, in_len_ - 1);
    const Matrix mask = take_first_[i].cast<double>();
    if (b == a) {
      dx[a] = dseq[i];
    } else {
      dx[a] = dseq[i].cwiseProduct(mask);
      dx[b] = dseq[i].cwiseProduct((1.0 - mask.array()).matrix());
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// FusionHead

FusionHead::FusionHead(FusionConfig cfg, int vis_dim, int tac_dim)
    : cfg_(cfg),
      vis_dim_(vis_dim),
      tac_dim_(tac_dim),
      d1_("fusion/d1", vis_dim + tac_dim, cfg.hidden1, nn::Act::relu),
      d2_("fusion/d2", cfg.hidden1, cfg.hidden2, nn::Act::relu),
      d3_("fusion/d3", (cfg.hidden2 + 1) / 2, cfg.hidden3, nn::Act::relu),
      out_("fusion/out", cfg.hidden3, cfg.outputs, nn::Act::linear) {}

void FusionHead::init(Rng& rng) {
  d1_.init(rng);
  d2_.init(rng);
  d3_.init(rng);
  out_.init(rng);
}

Vector FusionHead::forward(const Vector& visual, const Vector& tactile) {
  if (visual.size() != vis_dim_ || tactile.size() != tac_dim_)
    throw ShapeError("fusion: stream feature dimensions mismatch");
  Vector cat(vis_dim_ + tac_dim_);
  cat << visual, tactile;
  Matrix h2 = d2_.forward(d1_.forward(cat));
  h2.resize(h2.size(), 1);
  const Matrix pooled = pool_.forward(h2);
  const Vector y = out_.forward(d3_.forward(pooled.col(0)));
  return cfg_.output_scale * y;
}

Vector FusionHead::infer(const Vector& visual, const Vector& tactile) const {
  if (visual.size() != vis_dim_ || tactile.size() != tac_dim_)
    throw ShapeError("fusion: stream feature dimensions mismatch");
  Vector cat(vis_dim_ + tac_dim_);
  cat << visual, tactile;
  Matrix h2 = d2_.apply(d1_.apply(cat));
  h2.resize(h2.size(), 1);
  const Matrix pooled = nn::maxpool2(h2);
  const Vector y = out_.apply(d3_.apply(pooled.col(0)));
  return cfg_.output_scale * y;
}

std::pair<Vector, Vector> FusionHead::backward(const Vector& dout) {
  const Vector dpooled = d3_.backward(out_.backward(cfg_.output_scale * dout));
  Matrix dp = dpooled;
  dp.resize(dpooled.size(), 1);
  const Matrix dh2 = pool_.backward(dp);
  const Vector dcat = d1_.backward(d2_.backward(
      Eigen::Map<const Vector>(dh2.data(), dh2.size())));
  return {dcat.head(vis_dim_), dcat.tail(tac_dim_)};
}

void FusionHead::collect_params(std::vector<ParamRef>& out) {
  d1_.collect_params(out);
  d2_.collect_params(out);
  d3_.collect_params(out);
  out_.collect_params(out);
}

void FusionHead::zero_grads() {
  d1_.zero_grads();
  d2_.zero_grads();
  d3_.zero_grads();
  out_.zero_grads();
}

// ---------------------------------------------------------------------------
// Scaler

void Scaler::fit(const Matrix& rows) {
  mean = rows.colwise().mean();
  Vector var = (rows.rowwise() - mean.transpose()).array().square().colwise().mean();
  std = var.array().sqrt().max(1e-8);
}

Vector Scaler::apply(const Vector& x) const {
  if (mean.size() == 0) return x;
  return (x - mean).cwiseQuotient(std);
}

Matrix Scaler::apply_rows(const Matrix& rows) const {
  if (mean.size() == 0) return rows;
  return (rows.rowwise() - mean.transpose()).array().rowwise() /
         std.transpose().array();
}

void Scaler::reset(int dim) {
  mean = Vector::Zero(dim);
  std = Vector::Ones(dim);
}

// ---------------------------------------------------------------------------
// VisuoTactileModel

VisuoTactileModel::VisuoTactileModel(ModelConfig cfg, uint64_t seed)
    : cfg_(std::move(cfg)),
      hv_(cfg_.hv),
      ht_(cfg_.ht),
      fusion_(cfg_.fusion, cfg_.hv.feature_dim, cfg_.ht.filters.back()) {
  if (cfg_.fusion.outputs != 4)
    throw ConfigError("visuotactile model predicts exactly 4 attributes");
  Rng rng(derive_seed(seed, "model-init"));
  hv_.init(rng);
  ht_.init(rng);
  fusion_.init(rng);
  tac_scaler_.reset(cfg_.ht.input_dim);
  vis_scaler_.reset(cfg_.hv.input_dim);
}

VisuoTactileModel::Output VisuoTactileModel::forward(const Matrix& seq, const Vector& visual) {
  Output out;
  out.visual_scaled = vis_scaler_.apply(visual);
  const Matrix seq_scaled = tac_scaler_.apply_rows(seq);
  const auto hv_out = hv_.forward(out.visual_scaled);
  const Vector tac_feat = ht_.forward(seq_scaled);
  const Vector pred = fusion_.forward(hv_out.feature, tac_feat);
  out.attributes = pred;
  out.reconstruction = hv_out.reconstruction;
  return out;
}

Eigen::Vector4d VisuoTactileModel::predict_features(const Matrix& seq,
                                                    const Vector& visual) const {
  const Vector vis_scaled = vis_scaler_.apply(visual);
  const Matrix seq_scaled = tac_scaler_.apply_rows(seq);
  return fusion_.infer(hv_.infer_feature(vis_scaled), ht_.infer(seq_scaled));
}

void VisuoTactileModel::fit_scalers(const TrainingSet& data, std::span<const Instance> train) {
  Eigen::Index tac_rows = 0;
  for (const auto& inst : train)
    tac_rows += data.textures[inst.texture].sequences[inst.sequence].rows();
  Matrix tac(tac_rows, cfg_.ht.input_dim);
  Eigen::Index at = 0;
  std::vector<bool> seen(data.textures.size(), false);
  Eigen::Index vis_rows = 0;
  for (const auto& inst : train) {
    const auto& s = data.textures[inst.texture].sequences[inst.sequence];
    tac.middleRows(at, s.rows()) = s;
    at += s.rows();
    if (!seen[inst.texture]) {
      seen[inst.texture] = true;
      vis_rows += data.textures[inst.texture].image_variants.rows();
    }
  }
  Matrix vis(vis_rows, cfg_.hv.input_dim);
  at = 0;
  for (size_t t = 0; t < data.textures.size(); ++t) {
    if (!seen[t]) continue;
    const auto& v = data.textures[t].image_variants;
    vis.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  tac_scaler_.fit(tac);
  vis_scaler_.fit(vis);
}

double VisuoTactileModel::batch_step(const TrainingSet& data,
                                     std::span<const Instance> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const double denom = static_cast<double>(b) * cfg_.hv.input_dim;

  if (b == 1) {
    // layer caches from a single forward are still valid, so the gradient
    // pass can run without recomputing the network
    const auto& tx = data.textures[batch[0].texture];
    const auto out = forward(tx.sequences[batch[0].sequence],
                             tx.image_variants.row(batch[0].variant).transpose());
    Matrix pred(1, 4), target(1, 4);
    pred.row(0) = out.attributes.transpose();
    target.row(0) = tx.target.transpose();
    const auto lg = nn::rmse_loss(pred, target);
    const Vector recon_err = out.reconstruction - out.visual_scaled;
    const Vector drecon = recon_weight_ > 0.0
                              ? Vector(2.0 * recon_weight_ / denom * recon_err)
                              : Vector(Vector::Zero(cfg_.hv.input_dim));
    const auto [dvis, dtac] = fusion_.backward(lg.grad.row(0).transpose());
    hv_.backward(dvis, drecon);
    ht_.backward(dtac);
    return lg.value + recon_weight_ * recon_err.squaredNorm() / denom;
  }

  Matrix preds(b, 4), targets(b, 4);
  std::vector<Vector> recon_err(batch.size());

  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& tx = data.textures[batch[i].texture];
    const auto out = forward(tx.sequences[batch[i].sequence],
                             tx.image_variants.row(batch[i].variant).transpose());
    preds.row(i) = out.attributes.transpose();
    targets.row(i) = tx.target.transpose();
    recon_err[i] = out.reconstruction - out.visual_scaled;
  }

  const auto lg = nn::rmse_loss(preds, targets);
  double recon_mse = 0.0;
  for (const auto& e : recon_err) recon_mse += e.squaredNorm();
  recon_mse /= denom;

  // the batch loss couples instances only through scalar normalizers, so a
  // second forward per instance restores the caches for its backward pass
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& tx = data.textures[batch[i].texture];
    forward(tx.sequences[batch[i].sequence],
            tx.image_variants.row(batch[i].variant).transpose());
    const Vector drecon = recon_weight_ > 0.0
                              ? Vector(2.0 * recon_weight_ / denom * recon_err[i])
                              : Vector(Vector::Zero(cfg_.hv.input_dim));
    const auto [dvis, dtac] = fusion_.backward(lg.grad.row(i).transpose());
    hv_.backward(dvis, drecon);
    ht_.backward(dtac);
  }
  return lg.value + recon_weight_ * recon_mse;
}

double VisuoTactileModel::recon_batch_step(const TrainingSet& data,
                                           std::span<const Instance> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  const double denom = static_cast<double>(b) * cfg_.hv.input_dim;
  double mse = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& tx = data.textures[batch[i].texture];
    const Vector vis =
        vis_scaler_.apply(tx.image_variants.row(batch[i].variant).transpose());
    const auto out = hv_.forward(vis);
    const Vector err = out.reconstruction - vis;
    mse += err.squaredNorm();
    hv_.backward(Vector::Zero(cfg_.hv.feature_dim), Vector(2.0 / denom * err));
  }
  return mse / denom;
}

Eigen::Vector4d VisuoTactileModel::predict(const TrainingSet& data,
                                           const Instance& inst) const {
  const auto& tx = data.textures[inst.texture];
  return predict_features(tx.sequences[inst.sequence],
                          tx.image_variants.row(inst.variant).transpose());
}

std::vector<ParamRef> VisuoTactileModel::params() {
  std::vector<ParamRef> out;
  hv_.collect_params(out);
  ht_.collect_params(out);
  fusion_.collect_params(out);
  return out;
}

std::vector<ParamRef> VisuoTactileModel::hv_params() {
  std::vector<ParamRef> out;
  hv_.collect_params(out);
  return out;
}

void VisuoTactileModel::zero_grads() {
  hv_.zero_grads();
  ht_.zero_grads();
  fusion_.zero_grads();
}

nn::CheckpointData VisuoTactileModel::to_checkpoint() {
  nn::CheckpointData data;
  data.meta["config"] = to_json(RunConfig{cfg_, {}, cfg_.ht.seq_len, 4});
  data.meta["model_type"] = cfg_.type;
  for (const auto& p : params()) data.tensors.emplace_back(p.name, *p.value);
  data.tensors.emplace_back("scaler/tac_mean", tac_scaler_.mean);
  data.tensors.emplace_back("scaler/tac_std", tac_scaler_.std);
  data.tensors.emplace_back("scaler/vis_mean", vis_scaler_.mean);
  data.tensors.emplace_back("scaler/vis_std", vis_scaler_.std);
  return data;
}

void VisuoTactileModel::load_tensors(const nn::CheckpointData& data) {
  auto find = [&](const std::string& name) -> const Matrix& {
    for (const auto& [n, t] : data.tensors)
      if (n == name) return t;
    throw FormatError("checkpoint missing tensor: " + name);
  };
  for (auto& p : params()) {
    const Matrix& t = find(p.name);
    if (t.rows() != p.value->rows() || t.cols() != p.value->cols())
      throw FormatError("checkpoint tensor shape mismatch: " + p.name);
    *p.value = t;
  }
  tac_scaler_.mean = find("scaler/tac_mean");
  tac_scaler_.std = find("scaler/tac_std");
  vis_scaler_.mean = find("scaler/vis_mean");
  vis_scaler_.std = find("scaler/vis_std");
}

// ---------------------------------------------------------------------------
// AnnBaseline

namespace {

std::vector<nn::Dense> make_branch(const std::string& prefix, int in_dim) {
  const int sizes[4] = {128, 256, 256, 128};
  std::vector<nn::Dense> branch;
  int d = in_dim;
  for (int i = 0; i < 4; ++i) {
    branch.emplace_back(prefix + std::to_string(i), d, sizes[i], nn::Act::relu);
    d = sizes[i];
  }
  return branch;
}

}  // namespace

AnnBaseline::AnnBaseline(int tactile_dim, int visual_dim, uint64_t seed, double output_scale)
    : output_scale_(output_scale),
      tac_branch_(make_branch("ann/tac", tactile_dim)),
      vis_branch_(make_branch("ann/vis", visual_dim)),
      fuse1_("ann/fuse1", 256, 64, nn::Act::relu),
      fuse2_("ann/fuse2", 64, 64, nn::Act::relu),
      out_("ann/out", 64, 4, nn::Act::linear) {
  Rng rng(derive_seed(seed, "ann-init"));
  for (auto& d : tac_branch_) d.init(rng);
  for (auto& d : vis_branch_) d.init(rng);
  fuse1_.init(rng);
  fuse2_.init(rng);
  out_.init(rng);
  tac_scaler_.reset(tactile_dim);
  vis_scaler_.reset(visual_dim);
}

Eigen::Vector4d AnnBaseline::forward_vectors(const Vector& tactile, const Vector& visual) {
  Vector t = tac_scaler_.apply(tactile);
  for (auto& d : tac_branch_) t = d.forward(t);
  Vector v = vis_scaler_.apply(visual);
  for (auto& d : vis_branch_) v = d.forward(v);
  Vector cat(256);
  cat << t, v;
  return output_scale_ * out_.forward(fuse2_.forward(fuse1_.forward(cat)));
}

Eigen::Vector4d AnnBaseline::infer_vectors(const Vector& tactile, const Vector& visual) const {
  Vector t = tac_scaler_.apply(tactile);
  for (const auto& d : tac_branch_) t = d.apply(t);
  Vector v = vis_scaler_.apply(visual);
  for (const auto& d : vis_branch_) v = d.apply(v);
  Vector cat(256);
  cat << t, v;
  return output_scale_ * out_.apply(fuse2_.apply(fuse1_.apply(cat)));
}

Vector AnnBaseline::backward_vectors(const Eigen::Vector4d& dout) {
  const Vector dcat =
      fuse1_.backward(fuse2_.backward(out_.backward(output_scale_ * dout)));
  Vector dt = dcat.head(128);
  for (size_t i = tac_branch_.size(); i-- > 0;) dt = tac_branch_[i].backward(dt);
  Vector dv = dcat.tail(128);
  for (size_t i = vis_branch_.size(); i-- > 0;) dv = vis_branch_[i].backward(dv);
  return dt;
}

int64_t AnnBaseline::param_count() const {
  int64_t n = 0;
  for (const auto& d : tac_branch_) n += d.weights.size() + d.bias.size();
  for (const auto& d : vis_branch_) n += d.weights.size() + d.bias.size();
  n += fuse1_.weights.size() + fuse1_.bias.size();
  n += fuse2_.weights.size() + fuse2_.bias.size();
  n += out_.weights.size() + out_.bias.size();
  return n;
}

void AnnBaseline::fit_scalers(const TrainingSet& data, std::span<const Instance> train) {
  Matrix tac(train.size(), tac_scaler_.mean.size());
  for (size_t i = 0; i < train.size(); ++i) {
    const auto& tx = data.textures[train[i].texture];
    tac.row(i) = tx.sequences[train[i].sequence].colwise().mean();
  }
  std::vector<bool> seen(data.textures.size(), false);
  Eigen::Index vis_rows = 0;
  for (const auto& inst : train)
    if (!seen[inst.texture]) {
      seen[inst.texture] = true;
      vis_rows += data.textures[inst.texture].image_variants.rows();
    }
  Matrix vis(vis_rows, vis_scaler_.mean.size());
  Eigen::Index at = 0;
  for (size_t t = 0; t < data.textures.size(); ++t) {
    if (!seen[t]) continue;
    vis.middleRows(at, data.textures[t].image_variants.rows()) =
        data.textures[t].image_variants;
    at += data.textures[t].image_variants.rows();
  }
  tac_scaler_.fit(tac);
  vis_scaler_.fit(vis);
}

double AnnBaseline::batch_step(const TrainingSet& data, std::span<const Instance> batch) {
  const auto b = static_cast<Eigen::Index>(batch.size());
  Matrix preds(b, 4), targets(b, 4);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& tx = data.textures[batch[i].texture];
    preds.row(i) = forward_vectors(tx.sequences[batch[i].sequence].colwise().mean(),
                                   tx.image_variants.row(batch[i].variant).transpose())
                       .transpose();
    targets.row(i) = tx.target.transpose();
  }
  const auto lg = nn::rmse_loss(preds, targets);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& tx = data.textures[batch[i].texture];
    forward_vectors(tx.sequences[batch[i].sequence].colwise().mean(),
                    tx.image_variants.row(batch[i].variant).transpose());
    backward_vectors(lg.grad.row(i).transpose());
  }
  return lg.value;
}

Eigen::Vector4d AnnBaseline::predict(const TrainingSet& data, const Instance& inst) const {
  const auto& tx = data.textures[inst.texture];
  return infer_vectors(tx.sequences[inst.sequence].colwise().mean(),
                       tx.image_variants.row(inst.variant).transpose());
}

std::vector<ParamRef> AnnBaseline::params() {
  std::vector<ParamRef> out;
  for (auto& d : tac_branch_) d.collect_params(out);
  for (auto& d : vis_branch_) d.collect_params(out);
  fuse1_.collect_params(out);
  fuse2_.collect_params(out);
  out_.collect_params(out);
  return out;
}

void AnnBaseline::zero_grads() {
  for (auto& d : tac_branch_) d.zero_grads();
  for (auto& d : vis_branch_) d.zero_grads();
  fuse1_.zero_grads();
  fuse2_.zero_grads();
  out_.zero_grads();
}

nn::CheckpointData AnnBaseline::to_checkpoint() {
  nn::CheckpointData data;
  data.meta["model_type"] = "ann";
  for (const auto& p : params()) data.tensors.emplace_back(p.name, *p.value);
  data.tensors.emplace_back("scaler/tac_mean", tac_scaler_.mean);
  data.tensors.emplace_back("scaler/tac_std", tac_scaler_.std);
  data.tensors.emplace_back("scaler/vis_mean", vis_scaler_.mean);
  data.tensors.emplace_back("scaler/vis_std", vis_scaler_.std);
  return data;
}

void AnnBaseline::load_tensors(const nn::CheckpointData& data) {
  auto find = [&](const std::string& name) -> const Matrix& {
    for (const auto& [n, t] : data.tensors)
      if (n == name) return t;
    throw FormatError("checkpoint missing tensor: " + name);
  };
  for (auto& p : params()) {
    const Matrix& t = find(p.name);
    if (t.rows() != p.value->rows() || t.cols() != p.value->cols())
      throw FormatError("checkpoint tensor shape mismatch: " + p.name);
    *p.value = t;
  }
  tac_scaler_.mean = find("scaler/tac_mean");
  tac_scaler_.std = find("scaler/tac_std");
  vis_scaler_.mean = find("scaler/vis_mean");
  vis_scaler_.std = find("scaler/vis_std");
}

std::unique_ptr<TrainableModel> make_model(const ModelConfig& cfg, uint64_t seed) {
  if (cfg.type == "visuotactile")
    return std::make_unique<VisuoTactileModel>(cfg, seed);
  if (cfg.type == "ann")
    return std::make_unique<AnnBaseline>(cfg.ht.input_dim, cfg.hv.input_dim, seed,
                                         cfg.fusion.output_scale);
  throw ConfigError("unknown model type: " + cfg.type);
}

}  // namespace haptex::model
