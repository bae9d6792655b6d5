#include "foodgap/gap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <sstream>

namespace foodgap {

double sparse_get(const SparseVector& v, TagId id) {
  auto it = std::lower_bound(v.begin(), v.end(), id,
                             [](const auto& e, TagId t) { return e.first < t; });
  return it != v.end() && it->first == id ? it->second : 0.0;
}

double sparse_sum(const SparseVector& v) {
  CompensatedSum s;
  for (const auto& [id, x] : v) s.add(x);
  return s.value();
}

double sparse_l1(const SparseVector& v) {
  CompensatedSum s;
  for (const auto& [id, x] : v) s.add(std::abs(x));
  return s.value();
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::gap: return "gap";
    case Family::human: return "human";
    case Family::machine: return "machine";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view s) {
  if (s == "gap") return Family::gap;
  if (s == "human") return Family::human;
  if (s == "machine") return Family::machine;
  return std::nullopt;
}

std::string_view weighting_name(Weighting w) {
  return w == Weighting::uniform ? "uniform" : "score";
}

std::optional<Weighting> parse_weighting(std::string_view s) {
  if (s == "uniform") return Weighting::uniform;
  if (s == "score") return Weighting::score;
  return std::nullopt;
}

namespace {

// Normalized weights may round to a total just above 1; shave the largest
// weight until the stored values sum to at most 1, so the L1 bound of a gap
// vector holds exactly.
void cap_mass(SparseVector& w) {
  for (;;) {
    CompensatedSum s;
    for (const auto& [id, x] : w) s.add(x);
    if (!s.exceeds(1.0)) return;
    auto top = std::max_element(w.begin(), w.end(),
                                [](const auto& a, const auto& b) { return a.second < b.second; });
    top->second = std::nextafter(top->second, 0.0);
  }
}

TagDistribution uniform_over(std::vector<TagId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  TagDistribution d;
  const double k = static_cast<double>(ids.size());
  double w = 1.0 / k;
  // Round down if k copies of w would overshoot 1.
  if (std::fma(k, w, -1.0) > 0.0) w = std::nextafter(w, 0.0);
  for (TagId id : ids) d.weights.emplace_back(id, w);
  return d;
}

}  // namespace

std::optional<ImageDistributions> image_distributions(const Post& post, const Vocabulary& vocab,
                                                      Weighting weighting) {
  std::vector<TagId> human;
  for (const auto& h : post.human_tags)
    if (auto id = vocab.find(h)) human.push_back(*id);

  std::vector<std::pair<TagId, double>> machine;
  for (const auto& m : post.machine_tags)
    if (auto id = vocab.find(m.tag)) machine.emplace_back(*id, m.score.value_or(1.0));

  if (human.empty() || machine.empty()) return std::nullopt;

  ImageDistributions out;
  out.human = uniform_over(std::move(human));

  std::sort(machine.begin(), machine.end());
  double total = 0.0;
  for (const auto& [id, s] : machine) total += s;
  if (weighting == Weighting::uniform || total <= 0.0) {
    // All-zero scores carry no ranking information; fall back to uniform.
    std::vector<TagId> ids;
    for (const auto& [id, s] : machine) ids.push_back(id);
    out.machine = uniform_over(std::move(ids));
  } else {
    for (const auto& [id, s] : machine)
      if (s > 0.0) out.machine.weights.emplace_back(id, s / total);
    cap_mass(out.machine.weights);
  }
  return out;
}

GapVector image_gap(const TagDistribution& human, const TagDistribution& machine) {
  GapVector g;
  const auto& h = human.weights;
  const auto& m = machine.weights;
  std::size_t i = 0, j = 0;
  while (i < h.size() || j < m.size()) {
    TagId id;
    double v;
    if (j == m.size() || (i < h.size() && h[i].first < m[j].first)) {
      id = h[i].first;
      v = -h[i].second;
      ++i;
    } else if (i == h.size() || m[j].first < h[i].first) {
      id = m[j].first;
      v = m[j].second;
      ++j;
    } else {
      id = h[i].first;
      v = m[j].second - h[i].second;
      ++i;
      ++j;
    }
    if (v != 0.0) g.values.emplace_back(id, v);
  }
  return g;
}

double FeatureMatrix::value(const Fips& county, TagId tag) const {
  auto it = rows.find(county);
  return it == rows.end() ? 0.0 : sparse_get(it->second, tag);
}

namespace {

class SparseAccumulator {
 public:
  void add(const SparseVector& v) {
    for (const auto& [id, x] : v) sums_[id].add(x);
  }
  SparseVector mean(std::size_t n) const {
    SparseVector out;
    const double d = static_cast<double>(n);
    for (const auto& [id, s] : sums_) {
      double v = s.value() / d;
      if (v != 0.0) out.emplace_back(id, v);
    }
    return out;
  }

 private:
  std::map<TagId, CompensatedSum> sums_;
};

SparseVector image_vector(const Post& post, const Vocabulary& vocab, Family family,
                          Weighting weighting, bool& valid) {
  auto d = image_distributions(post, vocab, weighting);
  valid = d.has_value();
  if (!valid) return {};
  switch (family) {
    case Family::gap: return image_gap(d->human, d->machine).values;
    case Family::human: return d->human.weights;
    case Family::machine: return d->machine.weights;
  }
  return {};
}

// [begin, end) index ranges of consecutive posts sharing a key.
template <typename Key>
std::vector<std::pair<std::size_t, std::size_t>> runs(std::size_t begin, std::size_t end, Key key) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = begin;
  for (std::size_t i = begin + 1; i <= end; ++i)
    if (i == end || !(key(i) == key(start))) {
      out.emplace_back(start, i);
      start = i;
    }
  return out;
}

}  // namespace

void fill_support(FeatureMatrix& m, std::size_t vocab_size) {
  m.support.assign(vocab_size, 0);
  for (const auto& [fips, row] : m.rows)
    for (const auto& [id, x] : row)
      if (x != 0.0) ++m.support[id];
}

FeatureMatrix aggregate(const Corpus& corpus, const Vocabulary& vocab, Family family,
                        Weighting weighting, unsigned threads) {
  const auto& posts = corpus.posts;
  FeatureMatrix out;
  out.family = family;
  if (posts.empty()) {
    fill_support(out, vocab.size());
    return out;
  }
  for (const auto& p : posts)
    if (!p.county) throw Error(ErrorKind::internal, "aggregate: post " + p.id + " has no county");

  auto counties = runs(0, posts.size(), [&](std::size_t i) { return *posts[i].county; });
  std::vector<std::optional<SparseVector>> county_rows(counties.size());

  parallel_for(counties.size(), threads, [&](std::size_t c) {
    auto [cb, ce] = counties[c];
    SparseAccumulator county_acc;
    std::size_t users = 0;
    for (auto [ub, ue] : runs(cb, ce, [&](std::size_t i) { return posts[i].user; })) {
      SparseAccumulator user_acc;
      std::size_t images = 0;
      for (std::size_t i = ub; i < ue; ++i) {
        bool valid = false;
        auto v = image_vector(posts[i], vocab, family, weighting, valid);
        if (!valid) continue;
        user_acc.add(v);
        ++images;
      }
      if (images == 0) continue;
      county_acc.add(user_acc.mean(images));
      ++users;
    }
    if (users > 0) county_rows[c] = county_acc.mean(users);
  });

  for (std::size_t c = 0; c < counties.size(); ++c) {
    const Fips& fips = *posts[counties[c].first].county;
    if (county_rows[c]) out.rows.emplace(fips, std::move(*county_rows[c]));
    else out.uncovered.push_back(fips);
  }
  fill_support(out, vocab.size());
  return out;
}

std::string dense_matrix_csv(const std::map<Fips, SparseVector>& rows, const Vocabulary& vocab,
                             std::string_view missing_text) {
  std::string out = "fips";
  for (const auto& t : vocab.tags()) out += "," + t.text;
  out += "\n";
  for (const auto& [fips, row] : rows) {
    out += fips.str();
    std::size_t k = 0;
    for (TagId id = 0; id < vocab.size(); ++id) {
      out += ',';
      if (k < row.size() && row[k].first == id) out += format_double(row[k++].second);
      else out += missing_text;
    }
    out += "\n";
  }
  return out;
}

std::map<Fips, SparseVector> parse_dense_matrix(std::string_view csv, const Vocabulary& vocab,
                                                bool keep_zeros) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::vector<std::optional<TagId>> columns;
  std::map<Fips, SparseVector> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (columns.empty()) {
      if (fields.empty() || fields[0] != "fips") throw data_error("feature matrix: bad header");
      columns.push_back(std::nullopt);
      for (std::size_t c = 1; c < fields.size(); ++c) {
        auto id = vocab.find(fields[c]);
        if (!id) throw data_error("feature matrix: tag '" + fields[c] + "' not in vocabulary");
        columns.push_back(id);
      }
      continue;
    }
    if (fields.size() != columns.size())
      throw data_error(fmt::format("feature matrix line {}: width mismatch", line_no));
    auto fips = Fips::parse(fields[0]);
    if (!fips) throw data_error(fmt::format("feature matrix line {}: bad FIPS", line_no));
    SparseVector row;
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty()) continue;
      double v = 0;
      auto [ptr, ec] = std::from_chars(fields[c].data(), fields[c].data() + fields[c].size(), v);
      if (ec != std::errc() || ptr != fields[c].data() + fields[c].size())
        throw data_error(fmt::format("feature matrix line {}: bad number '{}'", line_no, fields[c]));
      if (v != 0.0 || keep_zeros) row.emplace_back(*columns[c], v);
    }
    std::sort(row.begin(), row.end());
    rows.emplace(*fips, std::move(row));
  }
  return rows;
}

std::string feature_matrix_csv(const FeatureMatrix& m, const Vocabulary& vocab) {
  return dense_matrix_csv(m.rows, vocab, "0");
}

std::string support_csv(const FeatureMatrix& m, const Vocabulary& vocab) {
  std::string out = "tag,counties\n";
  for (TagId id = 0; id < vocab.size(); ++id)
    out += fmt::format("{},{}\n", vocab.text(id), id < m.support.size() ? m.support[id] : 0);
  return out;
}

FeatureMatrix parse_feature_matrix(std::string_view csv, const Vocabulary& vocab, Family family) {
  FeatureMatrix m;
  m.family = family;
  m.rows = parse_dense_matrix(csv, vocab, false);
  fill_support(m, vocab.size());
  return m;
}

}  // namespace foodgap
