#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "foodgap/util.hpp"

namespace foodgap {

using TagId = std::uint32_t;

enum class TagCategory { drinks, part_of_dish, name_of_dish, food101_derived };

std::optional<TagCategory> parse_category(std::string_view text);
std::string_view category_name(TagCategory c);

struct Tag {
  std::string text;
  TagCategory category;
};

// Strips surrounding whitespace and leading '#', then lowercases with simple
// case folding (UTF-8 aware). Returns nullopt when nothing usable remains or
// the body contains '#' or whitespace.
std::optional<std::string> normalize_tag(std::string_view raw);

// Tag set sorted by text; ids are dense positions in that order.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Tags are normalized, deduplicated (first category wins) and sorted.
  explicit Vocabulary(std::vector<Tag> tags);

  std::size_t size() const { return tags_.size(); }
  const Tag& tag(TagId id) const { return tags_.at(id); }
  const std::string& text(TagId id) const { return tags_.at(id).text; }
  const std::vector<Tag>& tags() const { return tags_; }
  std::optional<TagId> find(std::string_view text) const;

  // Rows dropped as duplicates while building.
  std::size_t duplicates() const { return duplicates_; }

 private:
  std::vector<Tag> tags_;
  std::unordered_map<std::string, TagId> index_;
  std::size_t duplicates_ = 0;
};

// Reads a `tag,category` CSV with a header row.
Vocabulary load_vocabulary(const std::string& path);
Vocabulary parse_vocabulary(std::string_view csv);

// Human-only judgment labels such as #healthy. Kept disjoint from the
// vocabulary.
class SubjectiveLabels {
 public:
  SubjectiveLabels();  // healthy, delicious, organic
  explicit SubjectiveLabels(const std::vector<std::string>& labels);

  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(std::string_view label) const;
  // Throws if any label is also a vocabulary tag.
  void check_disjoint(const Vocabulary& vocab) const;

 private:
  std::vector<std::string> labels_;
};

enum class BetterDirection { higher, lower };

struct HealthMetric {
  std::string key;          // e.g. AdultObesity
  std::string column;       // health file column, e.g. obesity
  std::string label;        // short report label, e.g. Obese
  std::string description;
  BetterDirection better;
};

class MetricRegistry {
 public:
  // The nine county health indicators.
  static MetricRegistry defaults();
  // CSV `key,column,label,better,description` with header.
  static MetricRegistry load(const std::string& path);

  explicit MetricRegistry(std::vector<HealthMetric> metrics);

  const std::vector<HealthMetric>& metrics() const { return metrics_; }
  std::size_t size() const { return metrics_.size(); }
  // Case-insensitive match on key, column or label.
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<HealthMetric> metrics_;
};

class CountyRegistry {
 public:
  // Throws on a conflicting duplicate.
  void add(const Fips& fips, std::string name);
  bool contains(const Fips& fips) const { return names_.count(fips) != 0; }
  const std::string& name(const Fips& fips) const { return names_.at(fips); }
  std::size_t size() const { return names_.size(); }
  const std::map<Fips, std::string>& entries() const { return names_; }

 private:
  std::map<Fips, std::string> names_;
};

}  // namespace foodgap
