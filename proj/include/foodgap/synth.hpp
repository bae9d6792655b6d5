#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foodgap/gap.hpp"
#include "foodgap/ingest.hpp"
#include "foodgap/vocab.hpp"

namespace foodgap {

struct PlantedEffect {
  std::string tag;
  std::string metric;  // any registry alias, e.g. Obese
  Family family = Family::gap;
  double target_r = 0.0;
  double noise_sd = 0.1;  // per-user jitter of tag usage rates
};

struct SubjectivePlant {
  std::string label;
  std::string tag;
  std::string metric;
  double target_r = 0.0;
};

struct SynthPlan {
  std::uint64_t seed = 42;
  std::size_t counties = 194;
  std::size_t users_per_county = 10;
  std::size_t images_per_user = 10;
  std::size_t vocab_size = 40;
  std::vector<PlantedEffect> effects;
  std::vector<SubjectivePlant> subjective;
};

// "tag:metric:family:r:sd" and "label:tag:metric:r".
PlantedEffect parse_plant(const std::string& spec);
SubjectivePlant parse_subjective_plant(const std::string& spec);

struct RealizedEffect {
  std::string tag;
  std::string metric;  // registry label
  std::string family;  // gap | human | machine | subjective:<label>
  double target_r;
  double realized_r;
};

struct SynthData {
  SynthPlan plan;
  Vocabulary vocab;
  std::vector<Post> posts;  // county filled in
  std::vector<Fips> counties;
  HealthTable health;
  std::vector<RealizedEffect> realized;

  std::string posts_jsonl;
  std::string counties_geojson;
  std::string health_csv;
  std::string vocab_csv;
  std::string truth_json;
};

// Counties are disjoint squares on a grid and posts fall strictly inside
// their county. Planted metrics are built from the realized county feature so
// the full-sample correlation equals the target.
SynthData generate(const SynthPlan& plan);

// Writes posts.jsonl, counties.geojson, health.csv, vocab.csv, truth.json and
// a ready-to-use synth.cfg into dir.
void write_synth(const SynthData& data, const std::string& dir);

// Naive single-threaded reference for the feature matrices: dense vectors,
// plain loops, no shared code with the aggregation path beyond parsing.
struct OracleSubjective {
  std::map<Fips, std::vector<std::optional<double>>> values;  // after imputation
  std::map<Fips, double> baseline;
};

struct OracleFeatures {
  std::map<Fips, std::vector<double>> gap, human, machine;
  std::map<std::string, OracleSubjective> subjective;
};

OracleFeatures oracle_features(std::span<const Post> posts, const Vocabulary& vocab,
                               Weighting weighting, const std::vector<std::string>& labels);
// Parses the files and assigns counties by exhaustive scan.
OracleFeatures oracle_features(const std::string& posts_path, const std::string& counties_path,
                               const std::string& vocab_path, Weighting weighting,
                               const std::vector<std::string>& labels);

// Pearson r straight from the definition; fills the truth record.
double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace foodgap
