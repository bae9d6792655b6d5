#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "foodgap/subjective.hpp"
#include "foodgap/synth.hpp"

using namespace foodgap;

namespace {

Corpus corpus_of(std::vector<Post> posts) {
  canonical_sort(posts);
  return Corpus{std::move(posts)};
}

CondProbMatrix three_counties() {
  CondProbMatrix m;
  m.label = "healthy";
  m.rows[fixtures::fips("01001")] = {{0, 0.2}, {1, 0.5}};
  m.rows[fixtures::fips("01003")] = {{0, 0.4}, {1, 0.5}};
  m.rows[fixtures::fips("01005")] = {{1, 0.5}};
  return m;
}

}  // namespace

TEST_CASE("per-user conditional probability") {
  auto vocab = fixtures::vocab({"smoothies", "salad", "a", "b"});
  auto corpus = corpus_of({
      fixtures::post("1", "u", "01001", {"salad", "healthy"}, {"smoothies"}),
      fixtures::post("2", "u", "01001", {"salad"}, {"smoothies"}),
      fixtures::post("3", "v", "01001", {"salad", "delicious"}, {"a", "b"}),
  });
  auto h = conditional_probs(corpus, "healthy", vocab);
  auto f = fixtures::fips("01001");
  CHECK(*h.value(f, *vocab.find("smoothies")) == 0.5);
  CHECK_FALSE(h.value(f, *vocab.find("salad")).has_value());
  CHECK(h.baseline.at(f) == doctest::Approx((0.5 + 0.0) / 2));

  auto d = conditional_probs(corpus, "delicious", vocab);
  CHECK(*d.value(f, *vocab.find("a")) == 1.0);
  CHECK(*d.value(f, *vocab.find("b")) == 1.0);
  CHECK(*d.value(f, *vocab.find("smoothies")) == 0.0);
}

TEST_CASE("only users carrying a tag enter its county mean") {
  auto vocab = fixtures::vocab({"a", "b"});
  std::vector<Post> posts;
  // u1: 20 images with a, all labelled; u2: 2 images with a, none labelled; u3 never has a.
  for (int i = 0; i < 20; ++i) posts.push_back(fixtures::post(fmt::format("x{}", i), "u1", "01001", {"a", "healthy"}, {"a"}));
  for (int i = 0; i < 2; ++i) posts.push_back(fixtures::post(fmt::format("y{}", i), "u2", "01001", {"a"}, {"a"}));
  posts.push_back(fixtures::post("z", "u3", "01001", {"a", "healthy"}, {"b"}));
  auto m = conditional_probs(corpus_of(posts), "healthy", vocab);
  CHECK(*m.value(fixtures::fips("01001"), 0) == 0.5);
  CHECK(*m.value(fixtures::fips("01001"), 1) == 1.0);
}

TEST_CASE("imputation") {
  auto m = impute(three_counties(), 3);
  CHECK(*m.value(fixtures::fips("01005"), 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(m.imputed.size() == 1);
  CHECK(m.imputed.count({fixtures::fips("01005"), 0}));
  CHECK(m.dropped == std::vector<TagId>{2});
  CHECK_FALSE(m.value(fixtures::fips("01001"), 2).has_value());

  auto again = impute(m, 3);
  CHECK(again.rows == m.rows);
  CHECK(again.imputed == m.imputed);

  CondProbMatrix full;
  full.rows[fixtures::fips("01001")] = {{0, 0.1}};
  full.rows[fixtures::fips("01003")] = {{0, 0.2}};
  auto same = impute(full, 1);
  CHECK(same.rows == full.rows);
  CHECK(same.imputed.empty());

  CondProbMatrix single;
  single.rows[fixtures::fips("01001")] = {{0, 0.7}};
  single.rows[fixtures::fips("01003")] = {};
  single.rows[fixtures::fips("01005")] = {};
  auto filled = impute(single, 1);
  CHECK(*filled.value(fixtures::fips("01003"), 0) == 0.7);
  CHECK(*filled.value(fixtures::fips("01005"), 0) == 0.7);
}

TEST_CASE("absent label gives zeros everywhere") {
  auto vocab = fixtures::vocab({"a", "b"});
  auto m = conditional_probs(corpus_of({fixtures::post("1", "u", "01001", {"a"}, {"a", "b"}),
                                        fixtures::post("2", "v", "01003", {"b"}, {"b"})}),
                             "organic", vocab);
  for (const auto& [f, row] : m.rows)
    for (const auto& [t, v] : row) CHECK(v == 0.0);
  for (const auto& [f, b] : m.baseline) CHECK(b == 0.0);
}

TEST_CASE("random corpora match the oracle and stay in range") {
  std::mt19937_64 rng(8);
  std::vector<std::string> tags;
  for (int i = 0; i < 15; ++i) tags.push_back(fmt::format("t{:02d}", i));
  auto vocab = fixtures::vocab(tags);
  const char* counties[] = {"01001", "01003", "01005", "01007"};
  std::vector<Post> posts;
  for (int i = 0; i < 800; ++i) {
    std::vector<std::string> h{tags[rng() % 15]}, m;
    if (rng() % 3 == 0) h.push_back("healthy");
    for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) m.push_back(tags[rng() % 12]);
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    posts.push_back(fixtures::post(fmt::format("p{}", i), fmt::format("u{}", rng() % 12), counties[rng() % 4], h, m));
  }
  auto oracle = oracle_features(posts, vocab, Weighting::uniform, {"healthy"});
  const auto& ref = oracle.subjective.at("healthy");
  auto corpus = corpus_of(posts);
  auto raw = conditional_probs(corpus, "healthy", vocab, 3);
  auto m = impute(raw, vocab.size());
  CHECK(m.dropped == std::vector<TagId>{12, 13, 14});
  for (const auto& [f, row] : ref.values) {
    CHECK(std::abs(m.baseline.at(f) - ref.baseline.at(f)) < 1e-12);
    for (TagId t = 0; t < vocab.size(); ++t) {
      auto v = m.value(f, t);
      REQUIRE(v.has_value() == row[t].has_value());
      if (!v) continue;
      CHECK(std::abs(*v - *row[t]) < 1e-12);
      CHECK(*v >= 0.0);
      CHECK(*v <= 1.0);
    }
  }
  // imputed values are shared per tag and within the observed range
  for (TagId t = 0; t < 12; ++t) {
    double lo = 1, hi = 0;
    std::optional<double> shared;
    for (const auto& [f, row] : raw.rows)
      if (auto v = raw.value(f, t)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    for (const auto& [f, t2] : m.imputed) {
      if (t2 != t) continue;
      double v = *m.value(f, t);
      CHECK(v >= lo);
      CHECK(v <= hi);
      if (shared) CHECK(v == *shared);
      shared = v;
    }
  }
}

TEST_CASE("csv round trip keeps the imputation mask") {
  auto vocab = fixtures::vocab({"a", "b", "c"});
  auto m = impute(three_counties(), 3);
  auto back = parse_cond_prob("healthy", cond_prob_csv(m, vocab), imputed_mask_csv(m, vocab),
                              baseline_csv(m), vocab);
  CHECK(back.rows == m.rows);
  CHECK(back.imputed == m.imputed);
  CHECK(back.dropped == m.dropped);
  CHECK(back.label == "healthy");
}
