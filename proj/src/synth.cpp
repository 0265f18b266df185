#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "haptex/csv.hpp"
#include "haptex/dataset.hpp"
#include "haptex/feature_file.hpp"
#include "haptex/rng.hpp"
#include "haptex/vision.hpp"

namespace haptex::data {

namespace fs = std::filesystem;

const std::vector<std::string>& synth_class_labels() {
  static const std::vector<std::string> classes = {
      "wood",   "rubber", "paper",  "hardboard", "sandpaper", "fabric",
      "jeans",  "towel",  "carpet", "foam",      "plastic",   "mesh",
      "aluminum", "synthetic", "leather", "cork"};
  return classes;
}

namespace {

std::string texture_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "T%02d", index + 1);
  return buf;
}

Rng texture_rng(uint64_t seed, int index, const char* stream) {
  return Rng(derive_seed(seed, std::string(stream) + "-" + std::to_string(index)));
}

}  // namespace

Eigen::Vector4d synth_latents(uint64_t seed, int index) {
  Rng rng = texture_rng(seed, index, "latent");
  Eigen::Vector4d u;
  for (int a = 0; a < 4; ++a) u[a] = rng.uniform(-100.0, 100.0);
  return u;
}

Eigen::MatrixXd synth_accel(const Eigen::Vector4d& u, uint64_t seed, int index,
                            double rate_hz, double duration_s) {
  Rng rng = texture_rng(seed, index, "accel");
  const auto n = static_cast<Eigen::Index>(std::llround(rate_hz * duration_s));

  // rough-smooth drives the band center; flat-bumpy the low-frequency bump.
  // Contact physics couples the other two attributes into the vibration as
  // well: harder surfaces ring louder and over a wider band (level and band
  // width track hard-soft), while slip shows up as a squeal tone near 160 Hz
  // plus envelope wander (slip-tone amplitude and AM depth track
  // sticky-slippery).
  const double center_hz = 80.0 + 1.6 * (u[0] + 100.0);
  const double bump_amp = 0.15 + 0.85 * (u[1] + 100.0) / 200.0;
  const double level = 0.5 + 2.0 * (u[3] + 100.0) / 200.0;
  const double band_width = 0.08 + 0.37 * (u[3] + 100.0) / 200.0;
  const double slip_amp = 0.02 + 1.18 * (u[2] + 100.0) / 200.0;
  const double am_depth = 0.05 + 0.40 * (u[2] + 100.0) / 200.0;
  const double am_freq = rng.uniform(0.6, 1.0);
  const double am_phase = rng.uniform(0.0, 2.0 * M_PI);

  constexpr int kComponents = 30;
  struct Tone {
    double freq, amp, phase;
    Eigen::Vector3d dir;
  };
  std::vector<Tone> tones;
  tones.reserve(kComponents + 2);
  for (int j = 0; j < kComponents; ++j) {
    Tone t;
    t.freq = std::min(420.0, rng.uniform((1.0 - band_width) * center_hz,
                                         (1.0 + band_width) * center_hz));
    t.amp = rng.uniform(0.85, 1.0) * (2.0 / std::sqrt(double(kComponents)));
    t.phase = rng.uniform(0.0, 2.0 * M_PI);
    Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
    t.dir = d.norm() > 1e-9 ? d.normalized() : Eigen::Vector3d(0, 0, 1);
    tones.push_back(t);
  }
  {
    Tone bump;
    bump.freq = rng.uniform(26.0, 34.0);
    bump.amp = bump_amp;
    bump.phase = rng.uniform(0.0, 2.0 * M_PI);
    bump.dir = Eigen::Vector3d(0.3, 0.2, 0.95).normalized();
    tones.push_back(bump);
  }
  {
    Tone slip;
    slip.freq = rng.uniform(430.0, 460.0);
    slip.amp = slip_amp;
    slip.phase = rng.uniform(0.0, 2.0 * M_PI);
    Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
    slip.dir = d.norm() > 1e-9 ? d.normalized() : Eigen::Vector3d(1, 0, 0);
    tones.push_back(slip);
  }

  Eigen::MatrixXd out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    for (const auto& tone : tones)
      a += tone.dir * (tone.amp * std::sin(2.0 * M_PI * tone.freq * t + tone.phase));
    const double envelope =
        level * (1.0 + am_depth * std::sin(2.0 * M_PI * am_freq * t + am_phase));
    a *= envelope;
    a.z() += 9.81;  // gravity rides on z until band-passing
    out.row(i) = a.transpose();
  }
  // broadband contact noise also rides on the contact level
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) out(i, c) += 0.02 * level * rng.normal();
  return out;
}

Eigen::MatrixXd synth_force(const Eigen::Vector4d& u, uint64_t seed, int index,
                            double rate_hz, double duration_s) {
  Rng rng = texture_rng(seed, index, "force");
  const auto n = static_cast<Eigen::Index>(std::llround(rate_hz * duration_s));

  // hard-soft drives the mean normal force
  const double mean_force = 0.8 + 2.4 * (u[3] + 100.0) / 200.0;
  const double p1 = rng.uniform(0.0, 2.0 * M_PI), p2 = rng.uniform(0.0, 2.0 * M_PI);
  const double p3 = rng.uniform(0.0, 2.0 * M_PI);

  Eigen::MatrixXd out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    out(i, 0) = 0.1 * std::sin(2.0 * M_PI * 0.23 * t + p1);
    out(i, 1) = 0.1 * std::sin(2.0 * M_PI * 0.31 * t + p2);
    out(i, 2) = mean_force + 0.25 * std::sin(2.0 * M_PI * 0.2 * t + p3) +
                0.15 * std::sin(2.0 * M_PI * 0.37 * t + p1);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) out(i, c) += 0.005 * rng.normal();
  return out;
}

Eigen::MatrixXd synth_kinematics(const Eigen::Vector4d& u, uint64_t seed, int index,
                                 double rate_hz, double duration_s) {
  Rng rng = texture_rng(seed, index, "kinematics");
  const auto n = static_cast<Eigen::Index>(std::llround(rate_hz * duration_s));

  // sticky-slippery drives the scanning-speed spread
  const double spread = 0.04 + 0.5 * (u[2] + 100.0) / 200.0;
  const double base = 0.12;
  double phases[6];
  for (auto& p : phases) p = rng.uniform(0.0, 2.0 * M_PI);

  Eigen::MatrixXd out(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    out(i, 0) = base + spread * (std::sin(2.0 * M_PI * 0.29 * t + phases[0]) +
                                 0.5 * std::sin(2.0 * M_PI * 0.71 * t + phases[1]));
    out(i, 1) = base + spread * (std::sin(2.0 * M_PI * 0.37 * t + phases[2]) +
                                 0.5 * std::sin(2.0 * M_PI * 0.83 * t + phases[3]));
    out(i, 2) = 0.02 * std::sin(2.0 * M_PI * 0.41 * t + phases[4]);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) out(i, c) += 0.002 * rng.normal();
  return out;
}

Eigen::MatrixXd synth_image_features(const Eigen::Vector4d& u, uint64_t seed, int index,
                                     int variants) {
  // Smooth random-projection basis over all four latents, fixed per dataset
  // seed. Appearance carries every attribute (material identity reveals
  // hardness, slip, relief and grain), with macro structure weighted most.
  Rng basis_rng(derive_seed(seed, "image-basis"));
  const int dim = vision::kImageFeatureDim;
  Eigen::MatrixXd w(dim, 4);
  Eigen::VectorXd phase(dim);
  // gentle slopes keep each projection near-monotone over the latent box
  for (int i = 0; i < dim; ++i) {
    for (int a = 0; a < 4; ++a) w(i, a) = basis_rng.uniform(-0.7, 0.7);
    phase[i] = basis_rng.uniform(0.0, 2.0 * M_PI);
  }

  const Eigen::Vector4d x = u / 100.0;
  Rng noise_rng = texture_rng(seed, index, "image-noise");

  Eigen::MatrixXd out(variants, dim);
  for (int v = 0; v < variants; ++v) {
    for (int i = 0; i < vision::kDeepDim; ++i)
      out(v, i) = std::sin(w.row(i).dot(x) + phase[i]) + 0.05 * noise_rng.normal();
    double sum = 0.0;
    for (int i = vision::kDeepDim; i < dim; ++i) {
      const double g =
          0.5 + 0.5 * std::sin(w.row(i).dot(x) + phase[i]) + 0.02 * noise_rng.normal();
      out(v, i) = std::max(0.0, g);
      sum += out(v, i);
    }
    out.row(v).tail(vision::kGlcmDim) /= sum;
  }
  return out;
}

void synth_generate(const std::string& out_dir, const SynthConfig& cfg) {
  if (cfg.n_textures < 4) throw ConfigError("synth: need at least 4 textures");
  if (cfg.duration_s < 10.0) throw ConfigError("synth: duration must be at least 10 s");
  if (cfg.images_per_texture < 1 || cfg.participants < 1)
    throw ConfigError("synth: images and participants must be positive");

  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / "raw");
  fs::create_directories(fs::path(out_dir) / "features");

  Manifest manifest;
  manifest.ratings_csv = "ratings_aggregated.csv";
  std::vector<AttributeRatings> aggregated;
  std::vector<ParticipantRating> participant_rows;

  const auto& classes = synth_class_labels();
  for (int i = 0; i < cfg.n_textures; ++i) {
    const std::string id = texture_name(i);
    const std::string cls = classes[i % classes.size()];
    const Eigen::Vector4d u = synth_latents(cfg.seed, i);

    const fs::path raw = fs::path(out_dir) / "raw" / id;
    fs::create_directories(raw);

    auto write_channel = [&](const char* file, const char* header,
                             const Eigen::MatrixXd& values, double rate) {
      Eigen::VectorXd t(values.rows());
      for (Eigen::Index k = 0; k < values.rows(); ++k) t[k] = static_cast<double>(k) / rate;
      io::write_timed_csv((raw / file).string(), header, t, values, 6);
    };
    write_channel("accel.csv", "t_s,ax,ay,az",
                  synth_accel(u, cfg.seed, i, cfg.accel_rate_hz, cfg.duration_s),
                  cfg.accel_rate_hz);
    write_channel("force.csv", "t_s,fx,fy,fz",
                  synth_force(u, cfg.seed, i, cfg.force_rate_hz, cfg.duration_s),
                  cfg.force_rate_hz);
    write_channel("kinematics.csv", "t_s,vx,vy,vz",
                  synth_kinematics(u, cfg.seed, i, cfg.kinematics_rate_hz, cfg.duration_s),
                  cfg.kinematics_rate_hz);

    nlohmann::json meta{{"texture_id", id},
                        {"class_label", cls},
                        {"surface_normal", {0.0, 0.0, 1.0}},
                        {"units", {{"accel", "m/s^2"}, {"force", "N"}, {"velocity", "m/s"}}}};
    std::ofstream meta_out(raw / "meta.json");
    meta_out << meta.dump(2) << "\n";

    const std::string img_rel = "features/" + id + "_images.hvft";
    const Eigen::MatrixXd img =
        synth_image_features(u, cfg.seed, i, cfg.images_per_texture);
    io::write_feature_file((fs::path(out_dir) / img_rel).string(), "HVFT",
                           img.cast<float>());
    {
      nlohmann::json sidecar{{"texture_id", id}, {"source", "synthetic"}};
      std::ofstream sc(fs::path(out_dir) / (img_rel + ".json"));
      sc << sidecar.dump(2) << "\n";
    }

    AttributeRatings agg;
    agg.texture_id = id;
    agg.class_label = cls;
    agg.values = u;
    aggregated.push_back(agg);

    Rng rating_rng = texture_rng(cfg.seed, i, "ratings");
    for (int p = 0; p < cfg.participants; ++p) {
      ParticipantRating r;
      r.participant_id = "P" + std::to_string(p + 1);
      r.texture_id = id;
      for (int a = 0; a < 4; ++a) {
        const double truth = (u[a] + 100.0) / 2.0;
        const double noisy = p == 0 ? truth : truth + 3.0 * rating_rng.normal();
        r.sliders[a] = std::clamp(noisy, 0.0, 100.0);
      }
      participant_rows.push_back(std::move(r));
    }

    ManifestEntry entry;
    entry.texture_id = id;
    entry.class_label = cls;
    entry.raw_dir = "raw/" + id;
    entry.image_features = img_rel;
    manifest.textures.push_back(std::move(entry));
  }

  write_aggregated_ratings((fs::path(out_dir) / "ratings_aggregated.csv").string(),
                           aggregated);
  write_participant_ratings((fs::path(out_dir) / "ratings_participants.csv").string(),
                            participant_rows);
  save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
}

}  // namespace haptex::data
