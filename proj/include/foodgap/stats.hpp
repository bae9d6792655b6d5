#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodgap/gap.hpp"
#include "foodgap/ingest.hpp"
#include "foodgap/subjective.hpp"
#include "foodgap/vocab.hpp"

namespace foodgap {

// Sample Pearson r; nullopt when either input is constant or n < 3.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Two-sided p-value of the t-test for r with n - 2 degrees of freedom.
double p_value(double r, std::size_t n);

// assignment[i] is the fold of the i-th county in the aligned county list.
struct FoldSpec {
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::vector<std::size_t> assignment;
};

// Seeded Fisher-Yates shuffle, then round-robin slicing; fold sizes differ by
// at most one.
FoldSpec make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

enum class SeMode { standard_error, stddev };

struct CvResult {
  double mean_r;
  double se_r;
};

// Pearson r on the counties outside each fold, averaged over folds. nullopt
// when any fold's correlation is undefined.
std::optional<CvResult> cv_correlation(std::span<const double> feature,
                                       std::span<const double> target, const FoldSpec& folds,
                                       SeMode se_mode = SeMode::standard_error);

// Step-up procedure: rejects the hypotheses with the k smallest p-values for
// the largest k with p_(k) <= k * alpha / m.
std::vector<bool> benjamini_hochberg(std::span<const double> p, double alpha);
// Largest rejected p-value, if any.
std::optional<double> bh_threshold(std::span<const double> p, double alpha);

std::optional<double> boost(std::optional<double> r_gap, std::optional<double> r_machine,
                            std::optional<double> r_human);
std::optional<double> subjective_boost(std::optional<double> r_conditional,
                                       std::optional<double> r_baseline);

enum class BhGrouping { metric_family, metric, global };
std::optional<BhGrouping> parse_grouping(std::string_view s);
std::string_view grouping_name(BhGrouping g);

struct CorrelationRecord {
  TagId tag = 0;
  std::string tag_text;
  std::string metric;  // registry label, e.g. Obese
  std::string family;  // gap | human | machine | subjective:<label>
  bool excluded = false;
  double mean_r = 0.0;
  double se_r = 0.0;
  double r_full = 0.0;
  double p_raw = 1.0;
  bool significant = false;
  std::optional<double> boost;
};

// Correlation of the unconditional P(label) with a metric.
struct BaselineRecord {
  std::string label;
  std::string metric;
  bool excluded = false;
  double mean_r = 0.0;
  double se_r = 0.0;
  double r_full = 0.0;
  double p_raw = 1.0;
};

struct FeatureSet {
  std::optional<FeatureMatrix> gap, human, machine;
  std::vector<CondProbMatrix> subjective;
};

struct CorrelateConfig {
  std::size_t folds = 10;
  double alpha = 0.05;
  std::uint64_t seed = 42;
  SeMode se_mode = SeMode::standard_error;
  BhGrouping grouping = BhGrouping::metric_family;
  unsigned threads = 1;
};

struct CorrelationResult {
  std::vector<Fips> counties;
  std::vector<CorrelationRecord> records;  // ordered by (metric, family, tag)
  std::vector<BaselineRecord> baselines;
  std::size_t excluded = 0;
};

CorrelationResult correlate(const FeatureSet& features, const HealthTable& health,
                            const MetricRegistry& metrics, const Vocabulary& vocab,
                            const CorrelateConfig& cfg);

// Re-runs Benjamini-Hochberg over the defined records with another grouping.
void apply_bh(std::vector<CorrelationRecord>& records, double alpha, BhGrouping grouping);

std::string records_csv(const std::vector<CorrelationRecord>& records);
std::vector<CorrelationRecord> parse_records_csv(std::string_view csv);
std::string baselines_csv(const std::vector<BaselineRecord>& baselines);

}  // namespace foodgap
