#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foodgap/geo.hpp"
#include "foodgap/util.hpp"
#include "foodgap/vocab.hpp"

namespace foodgap {

struct MachineTag {
  std::string tag;
  std::optional<double> score;  // in [0, 1] when present
};

struct Post {
  std::string id;
  std::string user;
  std::chrono::sys_seconds when{};
  GeoPoint where;
  std::vector<std::string> human_tags;    // normalized, unique, input order
  std::vector<MachineTag> machine_tags;   // descending score, at most top-K
  std::optional<Fips> county;
};

struct ParseResult {
  std::vector<Post> posts;
  std::map<std::string, std::size_t> skipped;  // reason -> count
  std::size_t lines = 0;

  std::size_t skipped_total() const;
};

// One JSON object per line:
//   {"id","user","ts","lat","lon","human_tags":[..],"machine_tags":[{"tag","score"}..]}
// plus an optional "county" field written by the corpus store. Bad lines are
// skipped and tallied by reason; an unreadable file throws.
ParseResult parse_posts(const std::string& path, std::size_t top_k = 30, unsigned threads = 1);
ParseResult parse_posts_text(std::string_view text, std::size_t top_k = 30, unsigned threads = 1);

std::string post_to_json_line(const Post& post);

// Timestamps are ISO-8601 UTC ("2016-05-01T12:00:00Z") or epoch seconds.
std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

struct HealthTable {
  // Values are indexed like MetricRegistry::metrics().
  std::map<Fips, std::vector<double>> rows;
  std::size_t excluded_incomplete = 0;
  std::size_t excluded_bad_fips = 0;

  bool contains(const Fips& f) const { return rows.count(f) != 0; }
};

HealthTable parse_health(const std::string& path, const MetricRegistry& metrics);
HealthTable parse_health_text(std::string_view csv, const MetricRegistry& metrics);
std::string health_to_csv(const HealthTable& table, const MetricRegistry& metrics);

struct CorpusConfig {
  std::size_t min_posts_per_county = 2000;
  std::size_t min_counties_per_human_tag = 20;
  unsigned threads = 1;
};

struct FilterReport {
  std::size_t total = 0;
  std::size_t geo_assigned = 0;
  std::size_t health_matched = 0;
  std::size_t county_retained = 0;
  std::size_t tag_filter_retained = 0;
  std::size_t machine_valid = 0;
  std::vector<Fips> retained_counties;  // after the post-count threshold
  std::vector<Fips> final_counties;     // with at least one final post

  std::string to_json() const;
};

struct Corpus {
  // Sorted by (county, user, id).
  std::vector<Post> posts;
};

// Applies, in order: county assignment, health-table match, minimum posts per
// county, human-tag county prevalence, and a vocabulary machine tag. Throws a
// data error naming the stage that emptied the corpus.
std::pair<Corpus, FilterReport> build_corpus(std::vector<Post> posts, const SpatialIndex& index,
                                             const HealthTable& health, const Vocabulary& vocab,
                                             const CorpusConfig& cfg);

void canonical_sort(std::vector<Post>& posts);

}  // namespace foodgap
