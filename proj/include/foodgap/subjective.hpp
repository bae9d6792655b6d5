#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "foodgap/gap.hpp"

namespace foodgap {

// County-level P(label | machine tag). Rows store observed zeros; a missing
// entry means the tag never appeared on a valid image in that county.
struct CondProbMatrix {
  std::string label;
  std::map<Fips, SparseVector> rows;
  std::set<std::pair<Fips, TagId>> imputed;
  std::map<Fips, double> baseline;  // unconditional P(label)
  std::vector<TagId> dropped;       // tags observed in no county

  std::optional<double> value(const Fips& county, TagId tag) const;
};

// Per image, every vocabulary machine tag contributes 1 if the raw human tags
// contain `label`, else 0. Indicators are averaged per (county, user) over the
// images carrying the tag, then over the county's users that have such an
// image.
CondProbMatrix conditional_probs(const Corpus& corpus, std::string_view label,
                                 const Vocabulary& vocab, unsigned threads = 1);

// Fills each missing (county, tag) with the mean of that tag's observed
// values; tags observed nowhere are removed and listed in `dropped`.
CondProbMatrix impute(CondProbMatrix matrix, std::size_t vocab_size);

std::string cond_prob_csv(const CondProbMatrix& m, const Vocabulary& vocab);
std::string imputed_mask_csv(const CondProbMatrix& m, const Vocabulary& vocab);
std::string baseline_csv(const CondProbMatrix& m);
CondProbMatrix parse_cond_prob(std::string_view label, std::string_view matrix_csv,
                               std::string_view mask_csv, std::string_view baseline_csv,
                               const Vocabulary& vocab);

}  // namespace foodgap
