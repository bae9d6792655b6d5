#include <doctest.h>

#include "foodgap/report.hpp"

using namespace foodgap;

namespace {

CorrelationRecord rec(const char* tag, double mean_r, std::optional<double> boost, bool sig = true,
                      const char* family = "gap", const char* metric = "Obese") {
  CorrelationRecord r;
  r.tag_text = tag;
  r.metric = metric;
  r.family = family;
  r.mean_r = mean_r;
  r.se_r = 0.005;
  r.boost = boost;
  r.significant = sig;
  r.p_raw = sig ? 0.001 : 0.5;
  return r;
}

}  // namespace

TEST_CASE("rank by boost with tag tie-break") {
  std::vector<CorrelationRecord> recs{rec("c", .3, -.01), rec("a", .2, .12), rec("b", .1, .05),
                                      rec("z", .4, .05), rec("other", .9, .9, true, "gap", "Smokers")};
  auto t = rank(recs, "Obese", "gap", 2, false);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].tag == "a");
  CHECK(t.rows[1].tag == "b");
  auto all = rank(recs, "Obese", "gap", 10, false);
  REQUIRE(all.rows.size() == 4);
  CHECK(all.rows[2].tag == "z");
  CHECK(all.rows[3].tag == "c");
}

TEST_CASE("significance filter and exclusions") {
  auto excluded = rec("x", 0, std::nullopt);
  excluded.excluded = true;
  std::vector<CorrelationRecord> recs{rec("a", .2, .12, false), rec("b", .1, .05, false), excluded};
  CHECK(rank(recs, "Obese", "gap", 5, true).rows.empty());
  CHECK(rank(recs, "Obese", "gap", 5, false).rows.size() == 2);
  auto empty = rank(recs, "Obese", "gap", 5, true);
  auto md = emit(empty, ReportFormat::markdown);
  CHECK(md.find("(none significant)") != std::string::npos);
  CHECK(md.find("Obese") != std::string::npos);
}

TEST_CASE("families without boost rank by magnitude") {
  std::vector<CorrelationRecord> recs{rec("a", .2, std::nullopt, true, "human"),
                                      rec("b", -.5, std::nullopt, true, "human"),
                                      rec("c", .3, std::nullopt, true, "human")};
  auto t = rank(recs, "Obese", "human", 5, false);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].tag == "b");
  CHECK(t.rows[1].tag == "c");
  CHECK(t.rows[0].key == .5);
}

TEST_CASE("cell formatting") {
  CHECK(format_r(.31) == ".31");
  CHECK(format_r(-.24) == "-.24");
  CHECK(format_r(-.004) == ".00");
  CHECK(format_r(1.0) == "1.00");
  CHECK(format_se(.007) == ".007");
  CHECK(cell_text({"chickenkatsu", .31, .007, .12, .12}) == "chickenkatsu (.31±.007)");
  CHECK(cell_text({"smoothies", -.30, .009, .03, .03}) == "smoothies (-.30±.009)");
}

TEST_CASE("csv keeps full precision") {
  std::vector<CorrelationRecord> recs{rec("a", 0.123456789012345, 0.0987654321)};
  auto csv = emit(rank(recs, "Obese", "gap", 5, false), ReportFormat::csv);
  CHECK(csv.rfind("rank,tag,mean_r,se_r,boost\n", 0) == 0);
  CHECK(csv.find("1,a,0.123456789012345,0.005,0.0987654321") != std::string::npos);
  CHECK(parse_report_format("md") == ReportFormat::markdown);
  CHECK(parse_report_format("csv") == ReportFormat::csv);
  CHECK_FALSE(parse_report_format("pdf").has_value());
}

TEST_CASE("summary table has one row per metric") {
  std::vector<CorrelationRecord> recs{rec("chickenkatsu", .31, .12), rec("fries", .2, .1),
                                      rec("kale", -.2, .05, true, "gap", "Smokers")};
  std::vector<RankedTable> tables{rank(recs, "Smokers", "gap", 5, true), rank(recs, "Obese", "gap", 5, true)};
  auto md = summary_markdown(tables, 5);
  CHECK(md.find("| Smokers | kale (-.20±.005) |") != std::string::npos);
  CHECK(md.find("| Obese | chickenkatsu (.31±.005) | fries (.20±.005) |") != std::string::npos);
  CHECK(emit(tables[1], ReportFormat::markdown) == emit(rank(recs, "Obese", "gap", 5, true), ReportFormat::markdown));
}
