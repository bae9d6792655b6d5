#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodgap/stats.hpp"

namespace foodgap {

struct RankedRow {
  std::string tag;
  double mean_r = 0.0;
  double se_r = 0.0;
  std::optional<double> boost;
  double key = 0.0;  // boost, or |mean_r| for families without one
};

struct RankedTable {
  std::string metric;
  std::string family;
  bool significant_only = false;
  std::vector<RankedRow> rows;  // key descending, then tag ascending
};

// Gap and subjective families rank by boost; human and machine families,
// which have none, rank by |mean r|. Excluded records never appear.
RankedTable rank(std::span<const CorrelationRecord> records, std::string_view metric,
                 std::string_view family, std::size_t top_n, bool significant_only);

enum class ReportFormat { markdown, csv };
std::optional<ReportFormat> parse_report_format(std::string_view s);

// ".31", "-.24": two decimals without the leading zero.
std::string format_r(double r);
// ".007": three decimals without the leading zero.
std::string format_se(double se);
// "chickenkatsu (.31±.007)"
std::string cell_text(const RankedRow& row);

std::string emit(const RankedTable& table, ReportFormat format);

// One row per metric, one column per rank.
std::string summary_markdown(std::span<const RankedTable> tables, std::size_t top_n);

}  // namespace foodgap
