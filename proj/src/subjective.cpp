#include "foodgap/subjective.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <sstream>

namespace foodgap {

std::optional<double> CondProbMatrix::value(const Fips& county, TagId tag) const {
  auto it = rows.find(county);
  if (it == rows.end()) return std::nullopt;
  auto e = std::lower_bound(it->second.begin(), it->second.end(), tag,
                            [](const auto& p, TagId t) { return p.first < t; });
  if (e == it->second.end() || e->first != tag) return std::nullopt;
  return e->second;
}

namespace {

struct CountyResult {
  SparseVector row;
  double baseline = 0.0;
  bool covered = false;
};

CountyResult county_conditionals(const std::vector<Post>& posts, std::size_t begin, std::size_t end,
                                 std::string_view label, const Vocabulary& vocab) {
  struct TagStats {
    CompensatedSum sum;
    std::size_t users = 0;
  };
  std::map<TagId, TagStats> per_tag;
  CompensatedSum baseline_sum;
  std::size_t users = 0;

  std::size_t ub = begin;
  while (ub < end) {
    std::size_t ue = ub;
    while (ue < end && posts[ue].user == posts[ub].user) ++ue;

    std::map<TagId, std::pair<std::size_t, std::size_t>> counts;  // tag -> (images, labelled)
    std::size_t images = 0, labelled = 0;
    for (std::size_t i = ub; i < ue; ++i) {
      const Post& p = posts[i];
      if (!image_distributions(p, vocab, Weighting::uniform)) continue;
      ++images;
      bool has_label = std::find(p.human_tags.begin(), p.human_tags.end(), label) != p.human_tags.end();
      if (has_label) ++labelled;
      std::vector<TagId> ids;
      for (const auto& m : p.machine_tags)
        if (auto id = vocab.find(m.tag)) ids.push_back(*id);
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (TagId id : ids) {
        auto& c = counts[id];
        ++c.first;
        if (has_label) ++c.second;
      }
    }
    if (images > 0) {
      ++users;
      baseline_sum.add(static_cast<double>(labelled) / static_cast<double>(images));
      for (const auto& [id, c] : counts) {
        auto& s = per_tag[id];
        s.sum.add(static_cast<double>(c.second) / static_cast<double>(c.first));
        ++s.users;
      }
    }
    ub = ue;
  }

  CountyResult r;
  if (users == 0) return r;
  r.covered = true;
  r.baseline = baseline_sum.value() / static_cast<double>(users);
  for (const auto& [id, s] : per_tag)
    r.row.emplace_back(id, s.sum.value() / static_cast<double>(s.users));
  return r;
}

}  // namespace

CondProbMatrix conditional_probs(const Corpus& corpus, std::string_view label,
                                 const Vocabulary& vocab, unsigned threads) {
  CondProbMatrix out;
  out.label = std::string(label);
  const auto& posts = corpus.posts;
  std::vector<std::pair<std::size_t, std::size_t>> counties;
  for (std::size_t i = 0; i < posts.size();) {
    if (!posts[i].county) throw Error(ErrorKind::internal, "conditional_probs: post without county");
    std::size_t j = i;
    while (j < posts.size() && posts[j].county == posts[i].county) ++j;
    counties.emplace_back(i, j);
    i = j;
  }
  std::vector<CountyResult> results(counties.size());
  parallel_for(counties.size(), threads, [&](std::size_t c) {
    results[c] = county_conditionals(posts, counties[c].first, counties[c].second, label, vocab);
  });
  for (std::size_t c = 0; c < counties.size(); ++c) {
    if (!results[c].covered) continue;
    const Fips& fips = *posts[counties[c].first].county;
    out.rows.emplace(fips, std::move(results[c].row));
    out.baseline.emplace(fips, results[c].baseline);
  }
  return out;
}

CondProbMatrix impute(CondProbMatrix m, std::size_t vocab_size) {
  std::vector<CompensatedSum> sums(vocab_size);
  std::vector<std::size_t> observed(vocab_size, 0);
  for (const auto& [fips, row] : m.rows)
    for (const auto& [id, v] : row)
      if (!m.imputed.count({fips, id})) {
        sums[id].add(v);
        ++observed[id];
      }

  m.dropped.clear();
  for (TagId id = 0; id < vocab_size; ++id)
    if (observed[id] == 0) m.dropped.push_back(id);

  for (auto& [fips, row] : m.rows) {
    SparseVector filled;
    filled.reserve(vocab_size - m.dropped.size());
    std::size_t k = 0;
    for (TagId id = 0; id < vocab_size; ++id) {
      bool present = k < row.size() && row[k].first == id;
      if (observed[id] == 0) {
        if (present) ++k;
        continue;
      }
      if (present) {
        filled.push_back(row[k++]);
      } else {
        filled.emplace_back(id, sums[id].value() / static_cast<double>(observed[id]));
        m.imputed.insert({fips, id});
      }
    }
    row = std::move(filled);
  }
  return m;
}

std::string cond_prob_csv(const CondProbMatrix& m, const Vocabulary& vocab) {
  return dense_matrix_csv(m.rows, vocab, "");
}

std::string imputed_mask_csv(const CondProbMatrix& m, const Vocabulary& vocab) {
  std::map<Fips, SparseVector> mask;
  for (const auto& [fips, row] : m.rows) {
    SparseVector r;
    r.reserve(row.size());
    for (const auto& [id, v] : row) r.emplace_back(id, m.imputed.count({fips, id}) ? 1.0 : 0.0);
    mask.emplace(fips, std::move(r));
  }
  return dense_matrix_csv(mask, vocab, "");
}

std::string baseline_csv(const CondProbMatrix& m) {
  std::string out = "fips,baseline\n";
  for (const auto& [fips, v] : m.baseline) out += fips.str() + "," + format_double(v) + "\n";
  return out;
}

CondProbMatrix parse_cond_prob(std::string_view label, std::string_view matrix_csv,
                               std::string_view mask_csv, std::string_view baseline_text,
                               const Vocabulary& vocab) {
  CondProbMatrix m;
  m.label = std::string(label);
  m.rows = parse_dense_matrix(matrix_csv, vocab, true);
  for (const auto& [fips, row] : parse_dense_matrix(mask_csv, vocab, false))
    for (const auto& [id, v] : row) m.imputed.insert({fips, id});

  std::vector<bool> seen(vocab.size(), false);
  for (const auto& [fips, row] : m.rows)
    for (const auto& [id, v] : row) seen[id] = true;
  for (TagId id = 0; id < vocab.size(); ++id)
    if (!seen[id]) m.dropped.push_back(id);

  std::istringstream in{std::string(baseline_text)};
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    auto f = split_csv(line);
    auto fips = f.size() == 2 ? Fips::parse(f[0]) : std::nullopt;
    double v = 0;
    if (!fips || std::from_chars(f[1].data(), f[1].data() + f[1].size(), v).ec != std::errc())
      throw data_error("baseline file: bad row '" + line + "'");
    m.baseline.emplace(*fips, v);
  }
  return m;
}

}  // namespace foodgap
