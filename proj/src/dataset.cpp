#include "haptex/dataset.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "haptex/csv.hpp"
#include "haptex/feature_file.hpp"
#include "haptex/tactile.hpp"
#include "haptex/vision.hpp"

namespace haptex::data {

namespace fs = std::filesystem;

std::vector<AttributeRatings> aggregate_ratings(const std::vector<ParticipantRating>& ratings) {
  if (ratings.empty()) throw AggregateError("aggregate_ratings: no ratings");
  std::map<std::string, std::pair<Eigen::Vector4d, int>> sums;
  for (const auto& r : ratings) {
    for (int a = 0; a < 4; ++a)
      if (r.sliders[a] < 0.0 || r.sliders[a] > 100.0)
        throw AggregateError("slider out of [0,100] for texture " + r.texture_id);
    auto& [sum, count] = sums[r.texture_id];
    if (count == 0) sum.setZero();
    sum += r.sliders;
    ++count;
  }
  std::vector<AttributeRatings> out;
  out.reserve(sums.size());
  for (const auto& [id, acc] : sums) {
    AttributeRatings agg;
    agg.texture_id = id;
    const Eigen::Vector4d mean = acc.first / static_cast<double>(acc.second);
    agg.values = 2.0 * mean - Eigen::Vector4d::Constant(100.0);
    out.push_back(std::move(agg));
  }
  return out;
}

std::vector<ParticipantRating> read_participant_ratings(const std::string& path) {
  const auto csv = io::read_csv(path);
  const int pid = csv.column("participant_id");
  const int tid = csv.column("texture_id");
  const int cols[4] = {csv.column("rs"), csv.column("fb"), csv.column("ss"),
                       csv.column("hs")};
  std::vector<ParticipantRating> out;
  out.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    ParticipantRating r;
    r.participant_id = row[pid];
    r.texture_id = row[tid];
    for (int a = 0; a < 4; ++a) r.sliders[a] = io::parse_double(row[cols[a]], path);
    out.push_back(std::move(r));
  }
  return out;
}

void write_participant_ratings(const std::string& path,
                               const std::vector<ParticipantRating>& ratings) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write ratings: " + path);
  out << "participant_id,texture_id,rs,fb,ss,hs\n";
  char buf[160];
  for (const auto& r : ratings) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g\n",
                  r.participant_id.c_str(), r.texture_id.c_str(), r.sliders[0],
                  r.sliders[1], r.sliders[2], r.sliders[3]);
    out << buf;
  }
}

std::vector<AttributeRatings> read_aggregated_ratings(const std::string& path) {
  const auto csv = io::read_csv(path);
  const int tid = csv.column("texture_id");
  const int cls = csv.column("class");
  const int cols[4] = {csv.column("rs"), csv.column("fb"), csv.column("ss"),
                       csv.column("hs")};
  std::vector<AttributeRatings> out;
  out.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    AttributeRatings r;
    r.texture_id = row[tid];
    r.class_label = row[cls];
    for (int a = 0; a < 4; ++a) r.values[a] = io::parse_double(row[cols[a]], path);
    out.push_back(std::move(r));
  }
  return out;
}

void write_aggregated_ratings(const std::string& path,
                              const std::vector<AttributeRatings>& ratings) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write ratings: " + path);
  out << "texture_id,class,rs,fb,ss,hs\n";
  char buf[200];
  for (const auto& r : ratings) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%.17g\n", r.texture_id.c_str(),
                  r.class_label.c_str(), r.values[0], r.values[1], r.values[2],
                  r.values[3]);
    out << buf;
  }
}

std::vector<RelevanceScore> relevance_scores(const std::vector<AdjectiveMark>& marks) {
  if (marks.empty()) throw ArgError("relevance_scores: empty adjective matrix");
  std::map<std::string, double> totals;
  std::map<std::string, int> participant_ids;
  std::map<std::string, int> texture_ids;
  for (const auto& m : marks) {
    if (m.mark != 0 && m.mark != 1)
      throw FormatError("adjective mark must be 0 or 1 for " + m.adjective);
    totals[m.adjective] += m.mark;
    participant_ids.emplace(m.participant_id, 1);
    texture_ids.emplace(m.texture_id, 1);
  }
  const double denom =
      static_cast<double>(participant_ids.size()) * static_cast<double>(texture_ids.size());
  std::vector<RelevanceScore> out;
  out.reserve(totals.size());
  for (const auto& [adj, total] : totals) out.push_back({adj, total / denom});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.adjective < b.adjective;
  });
  return out;
}

std::vector<std::string> relevance_filter(const std::vector<AdjectiveMark>& marks,
                                          double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ArgError("relevance threshold must lie in (0, 1]");
  std::vector<std::string> out;
  for (const auto& s : relevance_scores(marks))
    if (s.score >= threshold) out.push_back(s.adjective);
  return out;
}

std::vector<AdjectiveMark> read_adjective_marks(const std::string& path) {
  const auto csv = io::read_csv(path);
  const int pid = csv.column("participant_id");
  const int tid = csv.column("texture_id");
  const int adj = csv.column("adjective");
  const int mark = csv.column("mark");
  std::vector<AdjectiveMark> out;
  out.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    AdjectiveMark m;
    m.participant_id = row[pid];
    m.texture_id = row[tid];
    m.adjective = row[adj];
    m.mark = static_cast<int>(io::parse_double(row[mark], path));
    out.push_back(std::move(m));
  }
  return out;
}

void hps_export(const std::string& path, std::vector<AttributeRatings> ratings) {
  if (ratings.empty()) throw ArgError("hps_export: no ratings");
  std::sort(ratings.begin(), ratings.end(),
            [](const auto& a, const auto& b) { return a.texture_id < b.texture_id; });
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write hps export: " + path);
  out << "texture_id,x_hs,y_fb,size_rs,color_ss,class\n";
  char buf[200];
  for (const auto& r : ratings) {
    // axes per the bubble-plot convention: x hard-soft, y flat-bumpy,
    // size rough-smooth, color sticky-slippery
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%s\n", r.texture_id.c_str(),
                  r.values[3], r.values[1], r.values[0], r.values[2],
                  r.class_label.c_str());
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

nlohmann::json entry_to_json(const ManifestEntry& e) {
  return {{"texture_id", e.texture_id},   {"class", e.class_label},
          {"raw_dir", e.raw_dir},         {"processed_csv", e.processed_csv},
          {"tactile_features", e.tactile_features},
          {"image_features", e.image_features},
          {"split_tag", e.split_tag}};
}

ManifestEntry entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.texture_id = j.value("texture_id", std::string{});
  e.class_label = j.value("class", std::string{});
  e.raw_dir = j.value("raw_dir", std::string{});
  e.processed_csv = j.value("processed_csv", std::string{});
  e.tactile_features = j.value("tactile_features", std::string{});
  e.image_features = j.value("image_features", std::string{});
  e.split_tag = j.value("split_tag", std::string{});
  if (e.texture_id.empty()) throw ManifestError("manifest entry without texture_id");
  return e;
}

void require_exists(const fs::path& base, const std::string& rel,
                    const std::string& texture_id) {
  if (rel.empty()) return;
  const fs::path p = base / rel;
  if (!fs::exists(p))
    throw ManifestError("manifest references missing path for texture " + texture_id +
                        ": " + p.string());
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError("malformed manifest " + path + ": " + e.what());
  }
  if (j.value("version", 0) != 1) throw ManifestError("unsupported manifest version");

  Manifest m;
  m.ratings_csv = j.value("ratings_csv", std::string{});
  for (const auto& entry : j.value("textures", nlohmann::json::array()))
    m.textures.push_back(entry_from_json(entry));

  const fs::path base = fs::path(path).parent_path();
  if (!m.ratings_csv.empty() && !fs::exists(base / m.ratings_csv))
    throw ManifestError("manifest references missing ratings csv: " +
                        (base / m.ratings_csv).string());
  for (const auto& e : m.textures) {
    require_exists(base, e.raw_dir, e.texture_id);
    require_exists(base, e.processed_csv, e.texture_id);
    require_exists(base, e.tactile_features, e.texture_id);
    require_exists(base, e.image_features, e.texture_id);
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
  nlohmann::json j;
  j["version"] = 1;
  j["ratings_csv"] = manifest.ratings_csv;
  nlohmann::json textures = nlohmann::json::array();
  for (const auto& e : manifest.textures) textures.push_back(entry_to_json(e));
  j["textures"] = textures;
  std::ofstream out(path);
  if (!out) throw ManifestError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

model::TrainingSet load_training_set(const std::string& manifest_path, int s, int stride) {
  const Manifest manifest = load_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  if (manifest.ratings_csv.empty())
    throw ManifestError("manifest has no ratings_csv; targets unavailable");
  const auto ratings = read_aggregated_ratings((base / manifest.ratings_csv).string());

  model::TrainingSet data;
  for (const auto& e : manifest.textures) {
    model::TextureData tx;
    tx.id = e.texture_id;
    tx.class_label = e.class_label;

    const auto rating = std::find_if(ratings.begin(), ratings.end(), [&](const auto& r) {
      return r.texture_id == e.texture_id;
    });
    if (rating == ratings.end())
      throw ManifestError("no ratings for texture " + e.texture_id);
    tx.target = rating->values;

    if (e.tactile_features.empty())
      throw ManifestError("texture " + e.texture_id + " has no tactile features");
    const Eigen::MatrixXf rows =
        io::read_feature_file((base / e.tactile_features).string(), "HTFT");
    if (rows.cols() != tactile::kTactileFeatureDim)
      throw FormatError(e.tactile_features + ": expected 526 feature columns");
    std::vector<Eigen::VectorXd> segments;
    segments.reserve(rows.rows());
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
      segments.push_back(rows.row(r).cast<double>().transpose());
    for (auto& seq : tactile::build_sequences(segments, s, stride, e.texture_id))
      tx.sequences.push_back(std::move(seq.steps));

    if (e.image_features.empty())
      throw ManifestError("texture " + e.texture_id + " has no image features");
    const Eigen::MatrixXf vis =
        io::read_feature_file((base / e.image_features).string(), "HVFT");
    if (vis.cols() != vision::kImageFeatureDim)
      throw FormatError(e.image_features + ": expected 2304 feature columns");
    tx.image_variants = vis.cast<double>();

    data.textures.push_back(std::move(tx));
  }
  return data;
}

}  // namespace haptex::data
