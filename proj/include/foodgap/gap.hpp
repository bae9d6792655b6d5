#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "foodgap/ingest.hpp"
#include "foodgap/vocab.hpp"

namespace foodgap {

// (tag id, value) pairs sorted by id; zeros are not stored.
using SparseVector = std::vector<std::pair<TagId, double>>;

double sparse_get(const SparseVector& v, TagId id);
double sparse_sum(const SparseVector& v);
double sparse_l1(const SparseVector& v);

struct TagDistribution {
  SparseVector weights;  // positive, summing to 1
};

// Machine minus human weight per tag.
struct GapVector {
  SparseVector values;
};

enum class Family { gap, human, machine };
enum class Weighting { uniform, score };

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view s);
std::string_view weighting_name(Weighting w);
std::optional<Weighting> parse_weighting(std::string_view s);

struct ImageDistributions {
  TagDistribution human;
  TagDistribution machine;
};

// Vocabulary-intersected, normalized human and machine distributions for one
// image; nullopt unless both sides keep at least one tag. Human tags are
// always weighted uniformly.
std::optional<ImageDistributions> image_distributions(const Post& post, const Vocabulary& vocab,
                                                      Weighting weighting);

GapVector image_gap(const TagDistribution& human, const TagDistribution& machine);

struct FeatureMatrix {
  Family family = Family::gap;
  std::map<Fips, SparseVector> rows;
  std::vector<std::size_t> support;  // per tag id: counties with a nonzero entry
  std::vector<Fips> uncovered;       // counties in the corpus with no valid image

  double value(const Fips& county, TagId tag) const;
};

// Image vectors are averaged per (county, user), then user vectors are
// averaged per county, so every user carries unit weight in their county.
FeatureMatrix aggregate(const Corpus& corpus, const Vocabulary& vocab, Family family,
                        Weighting weighting, unsigned threads = 1);

void fill_support(FeatureMatrix& m, std::size_t vocab_size);

// Dense CSV: header `fips,<tag>...` in vocabulary order; values round-trip.
std::string feature_matrix_csv(const FeatureMatrix& m, const Vocabulary& vocab);
std::string support_csv(const FeatureMatrix& m, const Vocabulary& vocab);
FeatureMatrix parse_feature_matrix(std::string_view csv, const Vocabulary& vocab, Family family);

// Shared dense layout. Absent entries are written as `missing_text`.
std::string dense_matrix_csv(const std::map<Fips, SparseVector>& rows, const Vocabulary& vocab,
                             std::string_view missing_text);
// Empty cells are skipped; zero cells are kept only when keep_zeros is set.
std::map<Fips, SparseVector> parse_dense_matrix(std::string_view csv, const Vocabulary& vocab,
                                                bool keep_zeros);

}  // namespace foodgap
