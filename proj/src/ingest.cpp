#include "foodgap/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

namespace foodgap {

using nlohmann::json;

std::size_t ParseResult::skipped_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : skipped) n += count;
  return n;
}

std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  if (std::all_of(t.begin(), t.end(), [](char c) { return (c >= '0' && c <= '9') || c == '-'; }) &&
      t.find('-', 1) == std::string::npos) {
    long long secs = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), secs);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return std::chrono::sys_seconds{std::chrono::seconds{secs}};
  }
  int y, mo, d, h = 0, mi = 0, s = 0, consumed = 0;
  if (std::sscanf(t.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6)
    return std::nullopt;
  std::string_view rest = std::string_view(t).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (!(rest == "Z" || rest == "+00:00" || rest.empty())) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{days};
  std::chrono::hh_mm_ss hms{t - days};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

namespace {

// Either a parsed post or the reason the line was skipped.
using LineOutcome = std::variant<Post, std::string>;

std::optional<std::string> scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return std::nullopt;
}

LineOutcome parse_line(const std::string& line, std::size_t top_k) {
  json rec = json::parse(line, nullptr, false);
  if (rec.is_discarded() || !rec.is_object()) return std::string("malformed-json");

  Post post;
  auto id = rec.contains("id") ? scalar_text(rec["id"]) : std::nullopt;
  if (!id || id->empty()) return std::string("missing-id");
  post.id = *id;
  auto user = rec.contains("user") ? scalar_text(rec["user"]) : std::nullopt;
  if (!user || user->empty()) return std::string("missing-user");
  post.user = *user;

  std::optional<std::chrono::sys_seconds> when;
  if (rec.contains("ts")) {
    if (rec["ts"].is_string()) when = parse_timestamp(rec["ts"].get<std::string>());
    else if (rec["ts"].is_number_integer())
      when = std::chrono::sys_seconds{std::chrono::seconds{rec["ts"].get<long long>()}};
  }
  if (!when) return std::string("bad-timestamp");
  post.when = *when;

  if (!rec.contains("lat") || !rec.contains("lon") || rec["lat"].is_null() || rec["lon"].is_null())
    return std::string("no-geo");
  if (!rec["lat"].is_number() || !rec["lon"].is_number()) return std::string("invalid-geo");
  post.where = {rec["lon"].get<double>(), rec["lat"].get<double>()};
  if (!is_valid(post.where)) return std::string("invalid-geo");

  if (rec.contains("human_tags") && !rec["human_tags"].is_null()) {
    if (!rec["human_tags"].is_array()) return std::string("bad-human-tags");
    std::unordered_set<std::string> seen;
    for (const auto& h : rec["human_tags"]) {
      if (!h.is_string()) return std::string("bad-human-tags");
      auto norm = normalize_tag(h.get<std::string>());
      if (norm && seen.insert(*norm).second) post.human_tags.push_back(*norm);
    }
  }

  if (rec.contains("machine_tags") && !rec["machine_tags"].is_null()) {
    const auto& mt = rec["machine_tags"];
    if (!mt.is_array()) return std::string("bad-machine-tags");
    std::size_t with_score = 0;
    std::vector<MachineTag> tags;
    for (const auto& m : mt) {
      MachineTag tag;
      std::string text;
      if (m.is_string()) {
        text = m.get<std::string>();
      } else if (m.is_object() && m.contains("tag") && m["tag"].is_string()) {
        text = m["tag"].get<std::string>();
        if (m.contains("score") && !m["score"].is_null()) {
          if (!m["score"].is_number()) return std::string("bad-machine-tags");
          double s = m["score"].get<double>();
          if (!(s >= 0.0 && s <= 1.0)) return std::string("bad-machine-tags");
          tag.score = s;
          ++with_score;
        }
      } else {
        return std::string("bad-machine-tags");
      }
      auto norm = normalize_tag(text);
      if (!norm) continue;
      tag.tag = *norm;
      tags.push_back(std::move(tag));
    }
    if (with_score != 0 && with_score != tags.size()) return std::string("bad-machine-tags");
    if (with_score != 0)
      std::stable_sort(tags.begin(), tags.end(),
                       [](const MachineTag& a, const MachineTag& b) { return *a.score > *b.score; });
    // Keep the highest-ranked occurrence of a repeated tag.
    std::unordered_set<std::string> seen;
    for (auto& t : tags) {
      if (post.machine_tags.size() == top_k) break;
      if (seen.insert(t.tag).second) post.machine_tags.push_back(std::move(t));
    }
  }

  if (rec.contains("county") && !rec["county"].is_null()) {
    auto c = rec["county"].is_string() ? Fips::parse(rec["county"].get<std::string>()) : std::nullopt;
    if (!c) return std::string("bad-county");
    post.county = *c;
  }
  return post;
}

}  // namespace

ParseResult parse_posts_text(std::string_view text, std::size_t top_k, unsigned threads) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(std::move(line));
  }

  std::vector<std::optional<LineOutcome>> outcomes(lines.size());
  parallel_for(lines.size(), threads, [&](std::size_t i) { outcomes[i] = parse_line(lines[i], top_k); });

  ParseResult result;
  result.lines = lines.size();
  std::unordered_set<std::string> ids;
  for (auto& o : outcomes) {
    if (auto* reason = std::get_if<std::string>(&*o)) {
      ++result.skipped[*reason];
      continue;
    }
    auto& post = std::get<Post>(*o);
    if (!ids.insert(post.id).second) {
      ++result.skipped["duplicate-id"];
      continue;
    }
    result.posts.push_back(std::move(post));
  }
  return result;
}

ParseResult parse_posts(const std::string& path, std::size_t top_k, unsigned threads) {
  return parse_posts_text(read_file(path), top_k, threads);
}

std::string post_to_json_line(const Post& post) {
  json rec;
  rec["id"] = post.id;
  rec["user"] = post.user;
  rec["ts"] = format_timestamp(post.when);
  rec["lat"] = post.where.lat;
  rec["lon"] = post.where.lon;
  rec["human_tags"] = post.human_tags;
  json mt = json::array();
  for (const auto& m : post.machine_tags) {
    json e{{"tag", m.tag}};
    if (m.score) e["score"] = *m.score;
    mt.push_back(std::move(e));
  }
  rec["machine_tags"] = std::move(mt);
  if (post.county) rec["county"] = post.county->str();
  return rec.dump();
}

HealthTable parse_health_text(std::string_view csv, const MetricRegistry& metrics) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  int fips_col = -1;
  std::vector<int> metric_col(metrics.size(), -1);
  std::size_t width = 0;
  HealthTable table;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!header) {
      width = fields.size();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        std::string name = trim(fields[c]);
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (name == "fips") {
          fips_col = static_cast<int>(c);
        } else if (auto m = metrics.find(name)) {
          metric_col[*m] = static_cast<int>(c);
        }
      }
      if (fips_col < 0) throw data_error("health file: no 'fips' column");
      for (std::size_t m = 0; m < metrics.size(); ++m)
        if (metric_col[m] < 0)
          throw data_error("health file: missing column '" + metrics.metrics()[m].column + "'");
      header = true;
      continue;
    }
    if (fields.size() != width)
      throw data_error(fmt::format("health file line {}: expected {} fields, got {}", line_no, width,
                                   fields.size()));
    auto fips = Fips::parse(fields[static_cast<std::size_t>(fips_col)]);
    if (!fips) {
      ++table.excluded_bad_fips;
      continue;
    }
    std::vector<double> values(metrics.size());
    bool complete = true;
    for (std::size_t m = 0; m < metrics.size() && complete; ++m) {
      std::string cell = trim(fields[static_cast<std::size_t>(metric_col[m])]);
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      complete = !cell.empty() && ec == std::errc() && ptr == cell.data() + cell.size() &&
                 std::isfinite(v);
      values[m] = v;
    }
    if (!complete) {
      ++table.excluded_incomplete;
      continue;
    }
    if (!table.rows.emplace(*fips, std::move(values)).second)
      throw data_error(fmt::format("health file line {}: duplicate FIPS {}", line_no, fips->str()));
  }
  if (table.rows.empty()) throw data_error("health file: no parsable rows");
  return table;
}

HealthTable parse_health(const std::string& path, const MetricRegistry& metrics) {
  return parse_health_text(read_file(path), metrics);
}

std::string health_to_csv(const HealthTable& table, const MetricRegistry& metrics) {
  std::string out = "fips";
  for (const auto& m : metrics.metrics()) out += "," + m.column;
  out += "\n";
  for (const auto& [fips, values] : table.rows) {
    out += fips.str();
    for (double v : values) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::string FilterReport::to_json() const {
  json j;
  j["total"] = total;
  j["geo_assigned"] = geo_assigned;
  j["health_matched"] = health_matched;
  j["county_retained"] = county_retained;
  j["tag_filter_retained"] = tag_filter_retained;
  j["machine_valid"] = machine_valid;
  std::vector<std::string> r, f;
  for (const auto& c : retained_counties) r.push_back(c.str());
  for (const auto& c : final_counties) f.push_back(c.str());
  j["retained_counties"] = r;
  j["final_counties"] = f;
  return j.dump(2) + "\n";
}

void canonical_sort(std::vector<Post>& posts) {
  std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    if (a.county != b.county) return a.county < b.county;
    if (a.user != b.user) return a.user < b.user;
    return a.id < b.id;
  });
}

std::pair<Corpus, FilterReport> build_corpus(std::vector<Post> posts, const SpatialIndex& index,
                                             const HealthTable& health, const Vocabulary& vocab,
                                             const CorpusConfig& cfg) {
  FilterReport report;
  report.total = posts.size();
  auto fail_if_empty = [](const std::vector<Post>& p, const char* stage) {
    if (p.empty()) throw data_error(std::string("empty-corpus after stage '") + stage + "'");
  };
  fail_if_empty(posts, "parse");

  // 1. county assignment
  std::vector<std::optional<Fips>> assigned(posts.size());
  parallel_for(posts.size(), cfg.threads, [&](std::size_t i) {
    if (posts[i].county) assigned[i] = posts[i].county;
    else if (is_valid(posts[i].where)) assigned[i] = assign_county(posts[i].where, index);
  });
  std::vector<Post> stage;
  stage.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (!assigned[i]) continue;
    posts[i].county = assigned[i];
    stage.push_back(std::move(posts[i]));
  }
  report.geo_assigned = stage.size();
  fail_if_empty(stage, "geo-assign");

  // 2. health table match
  std::erase_if(stage, [&](const Post& p) { return !health.contains(*p.county); });
  report.health_matched = stage.size();
  fail_if_empty(stage, "health-match");

  // 3. minimum posts per county
  std::map<Fips, std::size_t> per_county;
  for (const auto& p : stage) ++per_county[*p.county];
  std::set<Fips> retained;
  for (const auto& [fips, n] : per_county)
    if (n >= cfg.min_posts_per_county) retained.insert(fips);
  std::erase_if(stage, [&](const Post& p) { return !retained.count(*p.county); });
  report.county_retained = stage.size();
  report.retained_counties.assign(retained.begin(), retained.end());
  fail_if_empty(stage, "county-threshold");

  // 4. human tag prevalence over retained counties
  std::vector<std::set<Fips>> tag_counties(vocab.size());
  for (const auto& p : stage)
    for (const auto& h : p.human_tags)
      if (auto id = vocab.find(h)) tag_counties[*id].insert(*p.county);
  std::vector<bool> prevalent(vocab.size());
  for (std::size_t t = 0; t < vocab.size(); ++t)
    prevalent[t] = tag_counties[t].size() >= cfg.min_counties_per_human_tag;
  std::erase_if(stage, [&](const Post& p) {
    return std::none_of(p.human_tags.begin(), p.human_tags.end(), [&](const std::string& h) {
      auto id = vocab.find(h);
      return id && prevalent[*id];
    });
  });
  report.tag_filter_retained = stage.size();
  fail_if_empty(stage, "human-tag-prevalence");

  // 5. at least one vocabulary machine tag
  std::erase_if(stage, [&](const Post& p) {
    return std::none_of(p.machine_tags.begin(), p.machine_tags.end(),
                        [&](const MachineTag& m) { return vocab.find(m.tag).has_value(); });
  });
  report.machine_valid = stage.size();
  fail_if_empty(stage, "machine-tag");

  canonical_sort(stage);
  std::set<Fips> final_counties;
  for (const auto& p : stage) final_counties.insert(*p.county);
  report.final_counties.assign(final_counties.begin(), final_counties.end());
  return {Corpus{std::move(stage)}, report};
}

}  // namespace foodgap
