#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "foodgap/gap.hpp"
#include "foodgap/report.hpp"
#include "foodgap/stats.hpp"

namespace foodgap {

enum class Stage { ingest, features, correlate, report };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view s);
constexpr Stage all_stages[] = {Stage::ingest, Stage::features, Stage::correlate, Stage::report};

struct RunConfig {
  std::string posts, counties, health, vocab;
  std::string metrics;  // optional registry override
  std::string out = "foodgap-out";

  std::size_t min_county_posts = 2000;
  std::size_t min_tag_counties = 20;
  std::size_t top_k = 30;
  Weighting weighting = Weighting::uniform;
  std::vector<std::string> families{"gap", "human", "machine", "subjective"};
  std::vector<std::string> labels{"healthy", "delicious", "organic"};

  std::size_t folds = 10;
  double alpha = 0.05;
  std::uint64_t seed = 42;
  SeMode se_mode = SeMode::standard_error;
  BhGrouping grouping = BhGrouping::metric_family;

  std::size_t top_n = 5;
  ReportFormat format = ReportFormat::markdown;
  bool significant_only = false;

  unsigned threads = 1;
  bool force = false;

  // Assigns one setting by its flag name (without dashes). Throws a usage
  // error for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  bool wants_family(std::string_view f) const;

  // Canonical "key = value" lines for the settings a stage depends on,
  // including those of upstream stages.
  std::string canonical(Stage upto) const;
  std::string hash(Stage upto) const;
};

// Every setting key accepted by RunConfig::set.
const std::vector<std::string>& config_keys();

// `key = value` lines; '#' starts a comment; values may be double-quoted.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

struct StageOutcome {
  Stage stage;
  bool skipped;  // up to date
};

// Runs the requested stages in pipeline order against the store in cfg.out.
// Each stage reads upstream artifacts, writes its own and appends a provenance
// entry. Throws a usage error when an upstream artifact is missing or the
// store was built with a different configuration (unless cfg.force).
std::vector<StageOutcome> run_pipeline(const RunConfig& cfg, std::span<const Stage> stages,
                                       std::ostream* log = nullptr);

// Relative paths of the report files produced for cfg.
std::vector<std::string> report_files(const std::string& out_dir);

}  // namespace foodgap
