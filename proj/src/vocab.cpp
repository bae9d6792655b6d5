#include "foodgap/vocab.hpp"

#include <algorithm>
#include <boost/locale/encoding_utf.hpp>
#include <cctype>
#include <clocale>
#include <cwctype>
#include <fmt/format.h>
#include <locale.h>
#include <sstream>
#include <wctype.h>

namespace foodgap {

namespace {

locale_t utf8_locale() {
  static locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
    if (l == static_cast<locale_t>(0))
      l = newlocale(LC_CTYPE_MASK, "C", static_cast<locale_t>(0));
    return l;
  }();
  return loc;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<TagCategory> parse_category(std::string_view text) {
  std::string t = ascii_lower(trim(text));
  if (t == "drinks" || t == "drink") return TagCategory::drinks;
  if (t == "part-of-dish" || t == "part-of-a-dish") return TagCategory::part_of_dish;
  if (t == "name-of-dish" || t == "name-of-a-dish") return TagCategory::name_of_dish;
  if (t == "food101-derived" || t == "food101" || t == "food-101")
    return TagCategory::food101_derived;
  return std::nullopt;
}

std::string_view category_name(TagCategory c) {
  switch (c) {
    case TagCategory::drinks: return "drinks";
    case TagCategory::part_of_dish: return "part-of-dish";
    case TagCategory::name_of_dish: return "name-of-dish";
    case TagCategory::food101_derived: return "food101-derived";
  }
  return "unknown";
}

std::optional<std::string> normalize_tag(std::string_view raw) {
  std::string body = trim(raw);
  std::size_t hashes = body.find_first_not_of('#');
  if (hashes == std::string::npos) return std::nullopt;
  body.erase(0, hashes);

  std::wstring wide = boost::locale::conv::utf_to_utf<wchar_t>(body);
  if (wide.empty()) return std::nullopt;
  locale_t loc = utf8_locale();
  for (auto& ch : wide) {
    if (ch == L'#' || iswspace_l(static_cast<wint_t>(ch), loc)) return std::nullopt;
    ch = static_cast<wchar_t>(towlower_l(static_cast<wint_t>(ch), loc));
  }
  return boost::locale::conv::utf_to_utf<char>(wide);
}

Vocabulary::Vocabulary(std::vector<Tag> tags) {
  std::map<std::string, TagCategory> unique;
  for (auto& t : tags) {
    auto text = normalize_tag(t.text);
    if (!text) throw data_error("invalid tag '" + t.text + "'");
    if (!unique.emplace(*text, t.category).second) ++duplicates_;
  }
  tags_.reserve(unique.size());
  for (auto& [text, cat] : unique) {
    index_.emplace(text, static_cast<TagId>(tags_.size()));
    tags_.push_back(Tag{text, cat});
  }
}

std::optional<TagId> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary parse_vocabulary(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<Tag> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!header) {
      if (fields.size() < 2 || ascii_lower(trim(fields[0])) != "tag" ||
          ascii_lower(trim(fields[1])) != "category")
        throw data_error(fmt::format("vocabulary line {}: expected header 'tag,category'", line_no));
      header = true;
      continue;
    }
    if (fields.size() != 2)
      throw data_error(fmt::format("vocabulary line {}: expected 2 fields, got {}", line_no,
                                   fields.size()));
    auto cat = parse_category(fields[1]);
    if (!cat)
      throw data_error(fmt::format("vocabulary line {}: unknown category '{}'", line_no, fields[1]));
    if (!normalize_tag(fields[0]))
      throw data_error(fmt::format("vocabulary line {}: invalid tag '{}'", line_no, fields[0]));
    rows.push_back(Tag{fields[0], *cat});
  }
  if (rows.empty()) throw data_error("vocabulary is empty");
  return Vocabulary(std::move(rows));
}

Vocabulary load_vocabulary(const std::string& path) {
  return parse_vocabulary(read_file(path));
}

SubjectiveLabels::SubjectiveLabels()
    : SubjectiveLabels(std::vector<std::string>{"healthy", "delicious", "organic"}) {}

SubjectiveLabels::SubjectiveLabels(const std::vector<std::string>& labels) {
  for (const auto& raw : labels) {
    auto text = normalize_tag(raw);
    if (!text) throw Error(ErrorKind::usage, "invalid subjective label '" + raw + "'");
    if (std::find(labels_.begin(), labels_.end(), *text) == labels_.end())
      labels_.push_back(*text);
  }
}

bool SubjectiveLabels::contains(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

void SubjectiveLabels::check_disjoint(const Vocabulary& vocab) const {
  for (const auto& l : labels_)
    if (vocab.find(l))
      throw data_error("subjective label '" + l + "' is also a vocabulary tag");
}

MetricRegistry MetricRegistry::defaults() {
  using enum BetterDirection;
  return MetricRegistry({
      {"Smokers", "smokers", "Smokers", "Adult smokers (%)", lower},
      {"AdultObesity", "obesity", "Obese", "Adult obesity (%)", lower},
      {"FoodEnvIndex", "food_env_index", "FoodEnvInd",
       "Food environment index (1 worst to 10 best)", higher},
      {"PhysicallyInactive", "phys_inactive", "PhysInactv", "Physically inactive (%)", lower},
      {"ExcessiveDrinking", "excess_drink", "ExcessDrink", "Excessive drinking (%)", lower},
      {"AlcImpairedDrivingDeaths", "alc_driving_deaths", "AlcDrivDeath",
       "Alcohol-impaired driving deaths (%)", lower},
      {"DiabetesPrevalence", "diabetes", "DiabetesPrev", "Diabetes prevalence (%)", lower},
      {"FoodInsecurity", "food_insecure", "FoodInsecure", "Food insecurity (%)", lower},
      {"LimitedAccessHealthyFood", "limited_access", "LimitedAccess",
       "Limited access to healthy food (%)", lower},
  });
}

MetricRegistry::MetricRegistry(std::vector<HealthMetric> metrics) : metrics_(std::move(metrics)) {
  if (metrics_.empty()) throw Error(ErrorKind::usage, "metric registry is empty");
  for (std::size_t i = 0; i < metrics_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (ascii_lower(metrics_[i].key) == ascii_lower(metrics_[j].key) ||
          metrics_[i].column == metrics_[j].column)
        throw Error(ErrorKind::usage, "duplicate metric '" + metrics_[i].key + "'");
}

MetricRegistry MetricRegistry::load(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  std::vector<HealthMetric> metrics;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || trim(line).empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 5)
      throw Error(ErrorKind::usage, fmt::format("{}:{}: expected 5 fields", path, line_no));
    std::string dir = ascii_lower(trim(f[3]));
    if (dir != "higher" && dir != "lower")
      throw Error(ErrorKind::usage, fmt::format("{}:{}: better must be higher|lower", path, line_no));
    metrics.push_back({trim(f[0]), ascii_lower(trim(f[1])), trim(f[2]), trim(f[4]),
                       dir == "higher" ? BetterDirection::higher : BetterDirection::lower});
  }
  return MetricRegistry(std::move(metrics));
}

std::optional<std::size_t> MetricRegistry::find(std::string_view name) const {
  std::string n = ascii_lower(name);
  for (std::size_t i = 0; i < metrics_.size(); ++i) {
    const auto& m = metrics_[i];
    if (n == ascii_lower(m.key) || n == ascii_lower(m.column) || n == ascii_lower(m.label))
      return i;
  }
  return std::nullopt;
}

void CountyRegistry::add(const Fips& fips, std::string name) {
  auto [it, inserted] = names_.emplace(fips, name);
  if (!inserted && it->second != name)
    throw data_error("county " + fips.str() + " registered with two names");
}

}  // namespace foodgap
