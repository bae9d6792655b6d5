#include "foodgap/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fmt/format.h>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "foodgap/geo.hpp"
#include "foodgap/ingest.hpp"
#include "foodgap/subjective.hpp"

namespace foodgap {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::features: return "features";
    case Stage::correlate: return "correlate";
    case Stage::report: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : all_stages)
    if (stage_name(st) == s) return st;
  return std::nullopt;
}

namespace {

Error usage(const std::string& what) { return Error(ErrorKind::usage, what); }

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw usage(fmt::format("{}: expected an integer, got '{}'", key, v));
  return out;
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

// Settings each stage adds to the configuration hash.
const std::vector<std::vector<std::string>>& stage_keys() {
  static const std::vector<std::vector<std::string>> keys = {
      {"posts", "counties", "health", "vocab", "metrics", "min-county-posts", "min-tag-counties", "topk"},
      {"weighting", "family", "labels"},
      {"folds", "alpha", "seed", "se-mode", "bh-grouping"},
      {"top", "format", "significant-only"},
  };
  return keys;
}

std::string setting_value(const RunConfig& c, const std::string& key) {
  if (key == "posts") return c.posts;
  if (key == "counties") return c.counties;
  if (key == "health") return c.health;
  if (key == "vocab") return c.vocab;
  if (key == "metrics") return c.metrics;
  if (key == "min-county-posts") return std::to_string(c.min_county_posts);
  if (key == "min-tag-counties") return std::to_string(c.min_tag_counties);
  if (key == "topk") return std::to_string(c.top_k);
  if (key == "weighting") return std::string(weighting_name(c.weighting));
  if (key == "family") return join(c.families);
  if (key == "labels") return join(c.labels);
  if (key == "folds") return std::to_string(c.folds);
  if (key == "alpha") return format_double(c.alpha);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "se-mode") return c.se_mode == SeMode::standard_error ? "se" : "sd";
  if (key == "bh-grouping") return std::string(grouping_name(c.grouping));
  if (key == "top") return std::to_string(c.top_n);
  if (key == "format") return c.format == ReportFormat::markdown ? "md" : "csv";
  if (key == "significant-only") return c.significant_only ? "true" : "false";
  throw usage("unknown setting '" + key + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : stage_keys()) k.insert(k.end(), s.begin(), s.end());
    k.push_back("out");
    k.push_back("threads");
    k.push_back("force");
    return k;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  std::string v = trim(raw);
  auto boolean = [&]() {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw usage(fmt::format("{}: expected true/false, got '{}'", key, v));
  };
  if (key == "posts") posts = v;
  else if (key == "counties") counties = v;
  else if (key == "health") health = v;
  else if (key == "vocab") vocab = v;
  else if (key == "metrics") metrics = v;
  else if (key == "out") out = v;
  else if (key == "min-county-posts") min_county_posts = parse_int<std::size_t>(key, v);
  else if (key == "min-tag-counties") min_tag_counties = parse_int<std::size_t>(key, v);
  else if (key == "topk") top_k = parse_int<std::size_t>(key, v);
  else if (key == "weighting") {
    auto w = parse_weighting(v);
    if (!w) throw usage("weighting must be uniform or score");
    weighting = *w;
  } else if (key == "family") {
    auto list = split_list(v);
    if (list.size() == 1 && list[0] == "all") list = {"gap", "human", "machine", "subjective"};
    for (const auto& f : list)
      if (f != "subjective" && !parse_family(f)) throw usage("unknown family '" + f + "'");
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    families = list;
  } else if (key == "labels") {
    labels = SubjectiveLabels(split_list(v)).labels();
  } else if (key == "folds") folds = parse_int<std::size_t>(key, v);
  else if (key == "alpha") {
    try {
      std::size_t used = 0;
      alpha = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw usage("alpha: expected a number");
    }
  } else if (key == "seed") seed = parse_int<std::uint64_t>(key, v);
  else if (key == "se-mode") {
    if (v == "se") se_mode = SeMode::standard_error;
    else if (v == "sd") se_mode = SeMode::stddev;
    else throw usage("se-mode must be se or sd");
  } else if (key == "bh-grouping") {
    auto g = parse_grouping(v);
    if (!g) throw usage("bh-grouping must be metric-family, metric or global");
    grouping = *g;
  } else if (key == "top") top_n = parse_int<std::size_t>(key, v);
  else if (key == "format") {
    auto f = parse_report_format(v);
    if (!f) throw usage("format must be md or csv");
    format = *f;
  } else if (key == "significant-only") significant_only = boolean();
  else if (key == "threads") threads = parse_int<unsigned>(key, v);
  else if (key == "force") force = boolean();
  else throw usage("unknown setting '" + std::string(key) + "'");
}

void RunConfig::validate() const {
  if (min_county_posts == 0 || min_tag_counties == 0 || top_k == 0 || folds < 2 || top_n == 0)
    throw usage("thresholds must be positive (folds at least 2)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw usage("alpha must lie in (0, 1)");
  if (threads == 0) throw usage("threads must be positive");
  if (families.empty()) throw usage("no feature family selected");
  if (wants_family("subjective") && labels.empty())
    throw usage("subjective family needs at least one label");
}

bool RunConfig::wants_family(std::string_view f) const {
  return std::find(families.begin(), families.end(), f) != families.end();
}

std::string RunConfig::canonical(Stage upto) const {
  std::string out;
  for (std::size_t s = 0; s <= static_cast<std::size_t>(upto); ++s)
    for (const auto& key : stage_keys()[s]) out += key + " = " + setting_value(*this, key) + "\n";
  return out;
}

std::string RunConfig::hash(Stage upto) const { return sha256_hex(canonical(upto)); }

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == '[') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw usage(fmt::format("config line {}: expected key = value", line_no));
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (auto hash = value.find(" #"); hash != std::string::npos)
      value = trim(value.substr(0, hash));
    out.emplace_back(key, value);
  }
  return out;
}

namespace {

// Exclusive lock on the store directory for the lifetime of the object.
class StoreLock {
 public:
  explicit StoreLock(const fs::path& dir) : path_(dir / ".lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw data_error("store " + dir.string() + " is locked by another run (remove " +
                       path_.string() + " if stale)");
    auto pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~StoreLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  fs::path path_;
};

struct ProvenanceEntry {
  std::string stage;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // store-relative path -> sha256
  std::string started, finished;
};

std::string now_utc() {
  auto t = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return format_timestamp(t);
}

class Store {
 public:
  explicit Store(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    if (fs::exists(provenance_path())) {
      std::istringstream in(read_file(provenance_path()));
      for (std::string line; std::getline(in, line);) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw data_error("corrupt provenance file " + provenance_path());
        ProvenanceEntry e;
        e.stage = j.at("stage").get<std::string>();
        e.config_hash = j.at("config_hash").get<std::string>();
        e.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        e.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        e.started = j.value("started", "");
        e.finished = j.value("finished", "");
        entries_.push_back(std::move(e));
      }
    }
  }

  fs::path path(const std::string& rel) const { return root_ / rel; }

  const ProvenanceEntry* entry(Stage s) const {
    for (const auto& e : entries_)
      if (e.stage == stage_name(s)) return &e;
    return nullptr;
  }

  bool outputs_intact(const ProvenanceEntry& e) const {
    for (const auto& [rel, hash] : e.outputs) {
      auto p = path(rel);
      if (!fs::exists(p) || sha256_file(p.string()) != hash) return false;
    }
    return true;
  }

  // Replaces the entry for this stage and drops every later one.
  void record(Stage s, ProvenanceEntry e) {
    std::vector<ProvenanceEntry> kept;
    for (const auto& old : entries_) {
      auto st = parse_stage(old.stage);
      if (st && *st < s) kept.push_back(old);
    }
    kept.push_back(std::move(e));
    entries_ = std::move(kept);
    std::string text;
    for (const auto& x : entries_) {
      json j{{"stage", x.stage}, {"config_hash", x.config_hash}, {"inputs", x.inputs},
             {"outputs", x.outputs}, {"started", x.started}, {"finished", x.finished}};
      text += j.dump() + "\n";
    }
    write_file(provenance_path(), text);
  }

 private:
  std::string provenance_path() const { return (root_ / "provenance.jsonl").string(); }

  fs::path root_;
  std::vector<ProvenanceEntry> entries_;
};

MetricRegistry registry_for(const RunConfig& cfg) {
  return cfg.metrics.empty() ? MetricRegistry::defaults() : MetricRegistry::load(cfg.metrics);
}

std::string family_file(std::string_view family) {
  std::string f(family);
  std::replace(f.begin(), f.end(), ':', '-');
  return f;
}

// Writes content under the store and remembers its hash.
class OutputSet {
 public:
  explicit OutputSet(const Store& store) : store_(store) {}
  void write(const std::string& rel, std::string_view content) {
    auto p = store_.path(rel);
    fs::create_directories(p.parent_path());
    write_file(p.string(), content);
    hashes_[rel] = sha256_hex(content);
  }
  std::map<std::string, std::string> hashes() const { return hashes_; }

 private:
  const Store& store_;
  std::map<std::string, std::string> hashes_;
};

std::vector<std::string> stage_inputs(Stage s, const RunConfig& cfg, const Store& store) {
  std::vector<std::string> in;
  auto add_if = [&](const std::string& p) {
    if (!p.empty()) in.push_back(p);
  };
  switch (s) {
    case Stage::ingest:
      for (const auto& p : {cfg.posts, cfg.counties, cfg.health, cfg.vocab})
        if (p.empty()) throw usage("ingest needs --posts, --counties, --health and --vocab");
      add_if(cfg.posts);
      add_if(cfg.counties);
      add_if(cfg.health);
      add_if(cfg.vocab);
      add_if(cfg.metrics);
      break;
    case Stage::features:
      in.push_back(store.path("ingest/corpus.jsonl").string());
      add_if(cfg.vocab);
      break;
    case Stage::correlate:
      if (const auto* e = store.entry(Stage::features))
        for (const auto& [rel, h] : e->outputs) in.push_back(store.path(rel).string());
      add_if(cfg.health);
      add_if(cfg.vocab);
      add_if(cfg.metrics);
      break;
    case Stage::report:
      in.push_back(store.path("correlate/correlations.csv").string());
      break;
  }
  return in;
}

void run_ingest(const RunConfig& cfg, OutputSet& out, std::ostream* log) {
  auto metrics = registry_for(cfg);
  auto vocab = load_vocabulary(cfg.vocab);
  SubjectiveLabels(cfg.labels).check_disjoint(vocab);
  auto shapes = load_shapes(cfg.counties);
  auto health = parse_health(cfg.health, metrics);
  auto parsed = parse_posts(cfg.posts, cfg.top_k, cfg.threads);

  CorpusConfig cc{cfg.min_county_posts, cfg.min_tag_counties, cfg.threads};
  auto [corpus, report] = build_corpus(std::move(parsed.posts), shapes.index, health, vocab, cc);

  std::string lines;
  for (const auto& p : corpus.posts) lines += post_to_json_line(p) + "\n";
  out.write("ingest/corpus.jsonl", lines);
  out.write("ingest/filter_report.json", report.to_json());
  json pr{{"lines", parsed.lines}, {"skipped", parsed.skipped},
          {"vocabulary_size", vocab.size()}, {"vocabulary_duplicates", vocab.duplicates()},
          {"counties_in_boundaries", shapes.registry.size()}, {"health_rows", health.rows.size()},
          {"health_excluded_incomplete", health.excluded_incomplete},
          {"health_excluded_bad_fips", health.excluded_bad_fips}};
  out.write("ingest/parse_report.json", pr.dump(2) + "\n");
  if (log)
    *log << fmt::format("ingest: {} lines, {} skipped; {} posts -> {} retained in {} counties\n",
                        parsed.lines, parsed.skipped_total(), report.total, report.machine_valid,
                        report.final_counties.size());
}

Corpus load_corpus(const Store& store) {
  auto parsed = parse_posts(store.path("ingest/corpus.jsonl").string(), SIZE_MAX);
  if (parsed.skipped_total() != 0) throw data_error("corpus store is corrupt");
  Corpus c{std::move(parsed.posts)};
  canonical_sort(c.posts);
  return c;
}

void run_features(const RunConfig& cfg, const Store& store, OutputSet& out, std::ostream* log) {
  auto vocab = load_vocabulary(cfg.vocab);
  auto corpus = load_corpus(store);
  json coverage = json::object();
  for (Family f : {Family::gap, Family::human, Family::machine}) {
    if (!cfg.wants_family(family_name(f))) continue;
    auto m = aggregate(corpus, vocab, f, cfg.weighting, cfg.threads);
    std::string name(family_name(f));
    out.write("features/" + name + ".csv", feature_matrix_csv(m, vocab));
    out.write("features/" + name + "_support.csv", support_csv(m, vocab));
    std::vector<std::string> uncovered;
    for (const auto& c : m.uncovered) uncovered.push_back(c.str());
    coverage[name] = {{"rows", m.rows.size()}, {"uncovered", uncovered}};
  }
  if (cfg.wants_family("subjective")) {
    for (const auto& label : cfg.labels) {
      auto m = impute(conditional_probs(corpus, label, vocab, cfg.threads), vocab.size());
      std::string base = "features/subjective_" + label;
      out.write(base + ".csv", cond_prob_csv(m, vocab));
      out.write(base + "_imputed.csv", imputed_mask_csv(m, vocab));
      out.write(base + "_baseline.csv", baseline_csv(m));
      std::vector<std::string> dropped;
      for (TagId t : m.dropped) dropped.push_back(vocab.text(t));
      coverage["subjective:" + label] = {
          {"rows", m.rows.size()}, {"imputed", m.imputed.size()}, {"dropped_tags", dropped}};
    }
  }
  out.write("features/coverage.json", coverage.dump(2) + "\n");
  if (log) *log << fmt::format("features: {} posts, families {}\n", corpus.posts.size(), join(cfg.families));
}

void run_correlate(const RunConfig& cfg, const Store& store, OutputSet& out, std::ostream* log) {
  auto metrics = registry_for(cfg);
  auto vocab = load_vocabulary(cfg.vocab);
  auto health = parse_health(cfg.health, metrics);
  const auto* fe = store.entry(Stage::features);
  auto available = [&](const std::string& rel) { return fe->outputs.count(rel) != 0; };

  FeatureSet fs;
  for (Family f : {Family::gap, Family::human, Family::machine}) {
    std::string rel = "features/" + std::string(family_name(f)) + ".csv";
    if (!available(rel)) continue;
    // Gap boosts need the human and machine matrices even when only gap is requested.
    bool needed = cfg.wants_family(family_name(f)) ||
                  (cfg.wants_family("gap") && f != Family::gap);
    if (!needed) continue;
    auto m = parse_feature_matrix(read_file(store.path(rel).string()), vocab, f);
    if (f == Family::gap) fs.gap = std::move(m);
    else if (f == Family::human) fs.human = std::move(m);
    else fs.machine = std::move(m);
  }
  if (cfg.wants_family("subjective")) {
    for (const auto& label : cfg.labels) {
      std::string base = "features/subjective_" + label;
      if (!available(base + ".csv"))
        throw usage("no features for label '" + label + "': run features first");
      fs.subjective.push_back(parse_cond_prob(label, read_file(store.path(base + ".csv").string()),
                                              read_file(store.path(base + "_imputed.csv").string()),
                                              read_file(store.path(base + "_baseline.csv").string()),
                                              vocab));
    }
  }
  for (const auto& f : cfg.families)
    if (f != "subjective" && !available("features/" + f + ".csv"))
      throw usage("no features for family '" + f + "': run features first");

  CorrelateConfig cc{cfg.folds, cfg.alpha, cfg.seed, cfg.se_mode, cfg.grouping, cfg.threads};
  auto result = correlate(fs, health, metrics, vocab, cc);
  // Families pulled in only for boosts are not reported.
  std::erase_if(result.records, [&](const CorrelationRecord& r) {
    return !cfg.wants_family(r.family.starts_with("subjective:") ? "subjective" : r.family);
  });
  apply_bh(result.records, cfg.alpha, cfg.grouping);

  out.write("correlate/correlations.csv", records_csv(result.records));
  out.write("correlate/baselines.csv", baselines_csv(result.baselines));
  std::size_t significant = 0, excluded = 0;
  for (const auto& r : result.records) {
    significant += r.significant ? 1 : 0;
    excluded += r.excluded ? 1 : 0;
  }
  json summary{{"counties", result.counties.size()}, {"records", result.records.size()},
               {"excluded_undefined", excluded}, {"significant", significant},
               {"bh_grouping", grouping_name(cfg.grouping)}, {"alpha", cfg.alpha}};
  out.write("correlate/summary.json", summary.dump(2) + "\n");
  if (log)
    *log << fmt::format("correlate: {} counties, {} records, {} significant, {} excluded\n",
                        result.counties.size(), result.records.size(), significant, excluded);
}

void run_report(const RunConfig& cfg, const Store& store, OutputSet& out, std::ostream* log) {
  auto metrics = registry_for(cfg);
  auto records = parse_records_csv(read_file(store.path("correlate/correlations.csv").string()));
  std::vector<std::string> families;
  for (const auto& r : records)
    if (std::find(families.begin(), families.end(), r.family) == families.end())
      families.push_back(r.family);
  std::sort(families.begin(), families.end());

  const char* ext = cfg.format == ReportFormat::markdown ? "md" : "csv";
  std::size_t files = 0;
  for (const auto& family : families) {
    std::vector<RankedTable> tables;
    for (const auto& m : metrics.metrics()) {
      auto t = rank(records, m.label, family, cfg.top_n, cfg.significant_only);
      out.write(fmt::format("report/{}_{}.{}", m.label, family_file(family), ext), emit(t, cfg.format));
      ++files;
      tables.push_back(std::move(t));
    }
    if (cfg.format == ReportFormat::markdown) {
      std::string title = fmt::format("# Top {} tags by {} ({})\n\n", cfg.top_n,
                                      family == "human" || family == "machine" ? "|r|" : "boost", family);
      out.write("report/summary_" + family_file(family) + ".md",
                title + summary_markdown(tables, cfg.top_n));
      ++files;
    }
  }
  if (log) *log << fmt::format("report: {} files\n", files);
}

}  // namespace

std::vector<StageOutcome> run_pipeline(const RunConfig& cfg, std::span<const Stage> stages,
                                       std::ostream* log) {
  cfg.validate();
  std::vector<Stage> order(stages.begin(), stages.end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());

  Store store{fs::path(cfg.out)};
  StoreLock lock{fs::path(cfg.out)};
  std::vector<StageOutcome> outcomes;

  for (Stage s : order) {
    if (s != Stage::ingest) {
      Stage prev = static_cast<Stage>(static_cast<int>(s) - 1);
      const auto* up = store.entry(prev);
      if (!up || !store.outputs_intact(*up))
        throw usage(fmt::format("{} needs {} output: run {} first", stage_name(s), stage_name(prev),
                                stage_name(prev)));
    }
    const std::string config_hash = cfg.hash(s);
    std::map<std::string, std::string> inputs;
    for (const auto& p : stage_inputs(s, cfg, store)) inputs[p] = sha256_file(p);

    if (const auto* existing = store.entry(s); existing && !cfg.force) {
      if (existing->config_hash != config_hash)
        throw usage(fmt::format(
            "store {} holds {} output built with a different configuration; rerun with --force",
            cfg.out, stage_name(s)));
      if (existing->inputs == inputs && store.outputs_intact(*existing)) {
        if (log) *log << stage_name(s) << ": up to date\n";
        outcomes.push_back({s, true});
        continue;
      }
    }

    ProvenanceEntry entry;
    entry.stage = std::string(stage_name(s));
    entry.config_hash = config_hash;
    entry.inputs = inputs;
    entry.started = now_utc();
    OutputSet outputs(store);
    switch (s) {
      case Stage::ingest: run_ingest(cfg, outputs, log); break;
      case Stage::features: run_features(cfg, store, outputs, log); break;
      case Stage::correlate: run_correlate(cfg, store, outputs, log); break;
      case Stage::report: run_report(cfg, store, outputs, log); break;
    }
    entry.outputs = outputs.hashes();
    entry.finished = now_utc();
    store.record(s, std::move(entry));
    outcomes.push_back({s, false});
  }
  return outcomes;
}

std::vector<std::string> report_files(const std::string& out_dir) {
  std::vector<std::string> files;
  fs::path dir = fs::path(out_dir) / "report";
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), out_dir).string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace foodgap
