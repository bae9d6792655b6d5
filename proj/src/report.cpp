#include "foodgap/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace foodgap {

RankedTable rank(std::span<const CorrelationRecord> records, std::string_view metric,
                 std::string_view family, std::size_t top_n, bool significant_only) {
  RankedTable t{std::string(metric), std::string(family), significant_only, {}};
  const bool by_boost = family == "gap" || family.starts_with("subjective:");
  for (const auto& r : records) {
    if (r.metric != metric || r.family != family || r.excluded) continue;
    if (significant_only && !r.significant) continue;
    if (by_boost && !r.boost) continue;
    double key = by_boost ? *r.boost : std::abs(r.mean_r);
    t.rows.push_back({r.tag_text, r.mean_r, r.se_r, r.boost, key});
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const RankedRow& a, const RankedRow& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.tag < b.tag;
  });
  if (t.rows.size() > top_n) t.rows.resize(top_n);
  return t;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  return std::nullopt;
}

namespace {

std::string strip_leading_zero(std::string s) {
  if (s.starts_with("0.")) s.erase(0, 1);
  else if (s.starts_with("-0.")) s.erase(1, 1);
  if (s.find_first_not_of("-.0") == std::string::npos && s.starts_with("-")) s.erase(0, 1);
  return s;
}

}  // namespace

std::string format_r(double r) { return strip_leading_zero(fmt::format("{:.2f}", r)); }

std::string format_se(double se) { return strip_leading_zero(fmt::format("{:.3f}", se)); }

std::string cell_text(const RankedRow& row) {
  return fmt::format("{} ({}±{})", row.tag, format_r(row.mean_r), format_se(row.se_r));
}

std::string emit(const RankedTable& table, ReportFormat format) {
  const bool by_boost = table.family == "gap" || table.family.starts_with("subjective:");
  if (format == ReportFormat::csv) {
    std::string out = "rank,tag,mean_r,se_r,boost\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      out += fmt::format("{},{},{},{},{}\n", i + 1, r.tag, format_double(r.mean_r),
                         format_double(r.se_r), r.boost ? format_double(*r.boost) : "");
    }
    return out;
  }
  std::string out = fmt::format("## {} / {}\n\n", table.metric, table.family);
  out += fmt::format("| Rank | Tag (r mean±SE) | {} |\n", by_boost ? "Boost" : "|r|");
  out += "|---:|---|---:|\n";
  if (table.rows.empty()) return out + "\n(none significant)\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    out += fmt::format("| {} | {} | {} |\n", i + 1, cell_text(table.rows[i]),
                       format_r(table.rows[i].key));
  return out;
}

std::string summary_markdown(std::span<const RankedTable> tables, std::size_t top_n) {
  std::string out = "| Health metric |";
  std::string rule = "|---|";
  for (std::size_t i = 1; i <= top_n; ++i) {
    out += fmt::format(" Top {} |", i);
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  for (const auto& t : tables) {
    out += "| " + t.metric + " |";
    for (std::size_t i = 0; i < top_n; ++i)
      out += " " + (i < t.rows.size() ? cell_text(t.rows[i]) : std::string()) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace foodgap
