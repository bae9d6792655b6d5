// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "foodgap/gap.hpp"
#include "foodgap/geo.hpp"
#include "foodgap/ingest.hpp"
#include "foodgap/pipeline.hpp"
#include "foodgap/report.hpp"
#include "foodgap/stats.hpp"
#include "foodgap/subjective.hpp"
#include "foodgap/synth.hpp"
#include "geo_oracle.hpp"
#include "stats_oracle.hpp"

using namespace foodgap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (cond) return;
    if (ok) detail = what;
    ok = false;
  }
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0 = no limit
  std::function<Outcome()> run;
};

// Writes a synthetic data set and returns a config pointing at it.
RunConfig synth_store(const SynthPlan& plan, const fs::path& dir, SynthData* keep = nullptr) {
  auto data = generate(plan);
  write_synth(data, (dir / "data").string());
  RunConfig cfg;
  for (const auto& [k, v] : parse_config_text(read_file((dir / "data" / "synth.cfg").string()))) cfg.set(k, v);
  cfg.out = (dir / "store").string();
  if (keep) *keep = std::move(data);
  return cfg;
}

std::vector<CorrelationRecord> load_records(const RunConfig& cfg) {
  return parse_records_csv(read_file((fs::path(cfg.out) / "correlate" / "correlations.csv").string()));
}

// 1. worked example
Outcome worked_example() {
  Outcome out;
  auto vocab = fixtures::fig1_vocab();
  Corpus corpus{{fixtures::fig1_post()}};
  const auto f = fixtures::fips("01001");
  auto gap = aggregate(corpus, vocab, Family::gap, Weighting::uniform);
  auto human = aggregate(corpus, vocab, Family::human, Weighting::uniform);
  auto machine = aggregate(corpus, vocab, Family::machine, Weighting::uniform);
  auto oracle = oracle_features(corpus.posts, vocab, Weighting::uniform, {});
  for (TagId t = 0; t < vocab.size(); ++t) {
    bool burger = vocab.text(t) == "burger";
    double g_want = burger ? -5.0 / 6 : 1.0 / 6;
    out.require(std::abs(gap.value(f, t) - g_want) < 1e-12, "gap " + vocab.text(t));
    out.require(std::abs(oracle.gap.at(f)[t] - g_want) < 1e-12, "oracle gap " + vocab.text(t));
    out.require(std::abs(human.value(f, t) - (burger ? 1.0 : 0.0)) < 1e-12, "human " + vocab.text(t));
    out.require(std::abs(machine.value(f, t) - 1.0 / 6) < 1e-12, "machine " + vocab.text(t));
  }
  out.require(gap.rows.at(f).size() == 6, "gap support");
  return out;
}

// 2. zero-sum and L1 bound
Outcome zero_sum() {
  Outcome out;
  SynthPlan plan;
  plan.seed = 7;
  plan.counties = 200;
  plan.users_per_county = 20;
  plan.images_per_user = 25;
  plan.effects = {parse_plant("tagX:Obese:gap:0.8:0.1"), parse_plant("tagY:Smokers:machine:0.5:0.1")};
  auto data = generate(plan);
  out.require(data.posts.size() == 100000, "corpus size");
  std::size_t images = 0;
  double worst_sum = 0, worst_l1 = 0;
  for (Weighting w : {Weighting::uniform, Weighting::score})
    for (const auto& p : data.posts) {
      auto d = image_distributions(p, data.vocab, w);
      if (!d) continue;
      ++images;
      auto g = image_gap(d->human, d->machine);
      worst_sum = std::max(worst_sum, std::abs(sparse_sum(g.values)));
      worst_l1 = std::max(worst_l1, sparse_l1(g.values));
      for (const auto& [t, v] : g.values) out.require(v >= -1.0 && v <= 1.0, "gap value outside [-1, 1]");
    }
  out.require(images == 200000, "every synthetic image is valid");
  out.require(worst_sum <= 1e-9, fmt::format("image gap sum {}", worst_sum));
  out.require(worst_l1 <= 2.0, fmt::format("image gap L1 {}", worst_l1));

  std::vector<Post> posts = data.posts;
  canonical_sort(posts);
  Corpus corpus{std::move(posts)};
  for (Weighting w : {Weighting::uniform, Weighting::score}) {
    auto m = aggregate(corpus, data.vocab, Family::gap, w, 4);
    out.require(m.rows.size() == 200, "county rows");
    for (const auto& [f, row] : m.rows) {
      out.require(std::abs(sparse_sum(row)) <= 1e-6, "county gap sum " + f.str());
      out.require(sparse_l1(row) <= 2.0, "county gap L1 " + f.str());
    }
  }
  out.detail = out.ok ? fmt::format("{} images, max |sum| {:.1e}, max L1 {:.4f}", images, worst_sum, worst_l1)
                      : out.detail;
  return out;
}

// 3. geometry
Outcome geometry() {
  Outcome out;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t checked = 0;
  for (int poly = 0; poly < 200; ++poly) {
    auto p = geo_oracle::random_polygon(rng, 8 + static_cast<int>(rng() % 41));
    CountyShape s(fixtures::fips("01001"), "r", {p});
    for (int i = 0; i < 50; ++i) {
      GeoPoint q{-1.2 + 2.4 * u(rng), -1.2 + 2.4 * u(rng)};
      if (geo_oracle::near_boundary(p, q)) continue;
      ++checked;
      out.require(s.contains(q) == geo_oracle::contains(p, q), "winding-number disagreement");
    }
  }
  out.require(checked >= 9900, "too many boundary points");

  auto sq = [](double x0, double y0, double x1, double y1) {
    return Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
  };
  CountyShape holed(fixtures::fips("01001"), "h", {{sq(0, 0, 4, 4), {sq(1, 1, 3, 3)}}});
  out.require(!holed.contains({2, 2}), "hole interior");
  out.require(holed.contains({0.5, 2}), "ring body");
  auto set = parse_shapes(R"({"type":"FeatureCollection","features":[
    {"type":"Feature","properties":{"fips":"01001"},"geometry":{"type":"MultiPolygon","coordinates":[
      [[[0,0],[1,0],[1,1],[0,1],[0,0]]],[[[5,5],[6,5],[6,6],[5,6],[5,5]]]]}},
    {"type":"Feature","properties":{"fips":"01003"},"geometry":{"type":"Polygon","coordinates":[
      [[1,0],[2,0],[2,1],[1,1],[1,0]]]}}]})");
  out.require(assign_county({5.5, 5.5}, set.index) == fixtures::fips("01001"), "multipolygon island");
  out.require(assign_county({0.5, 0.5}, set.index) == fixtures::fips("01001"), "multipolygon mainland");
  out.require(assign_county({1.0, 0.5}, set.index) == fixtures::fips("01001"), "shared edge tie-break");
  out.require(!assign_county({3, 3}, set.index).has_value(), "ocean point");

  // Index vs exhaustive scan on a jittered grid of star polygons.
  std::vector<CountyShape> shapes;
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      auto p = geo_oracle::random_polygon(rng, 20);
      for (auto* ring : {&p.outer}) for (auto& v : *ring) v = {v.lon * 0.9 + 2.0 * c - 90, v.lat * 0.9 + 2.0 * r + 30};
      for (auto& h : p.holes) for (auto& v : h) v = {v.lon * 0.9 + 2.0 * c - 90, v.lat * 0.9 + 2.0 * r + 30};
      auto f = *Fips::parse(fmt::format("{:05d}", 1001 + r * 10 + c));
      shapes.emplace_back(f, "g", std::vector<Polygon>{p});
    }
  SpatialIndex index(shapes);
  for (int i = 0; i < 10000; ++i) {
    GeoPoint q{-91.5 + 21.0 * u(rng), 28.5 + 21.0 * u(rng)};
    out.require(assign_county(q, index) == assign_county_exhaustive(q, shapes), "index differs from scan");
  }
  if (out.ok) out.detail = fmt::format("{} off-boundary points", checked);
  return out;
}

// 4. statistics
Outcome statistics() {
  Outcome out;
  auto r = [](std::vector<double> x, std::vector<double> y) { return pearson(x, y); };
  out.require(std::abs(*r({1, 2, 3}, {1, 2, 3}) - 1.0) < 1e-12, "pearson +1");
  out.require(std::abs(*r({1, 2, 3}, {3, 2, 1}) + 1.0) < 1e-12, "pearson -1");
  out.require(std::abs(*r({1, 2, 3, 4}, {2, 1, 4, 3}) - 0.6) < 1e-12, "pearson 0.6");
  out.require(!r({1, 1, 1}, {1, 2, 3}), "constant input");

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t m = 1 + rng() % 64;
    std::vector<double> p(m);
    for (auto& x : p) x = trial % 2 ? std::pow(u(rng), 5) : u(rng);
    out.require(benjamini_hochberg(p, 0.05) == stats_oracle::bh(p, 0.05), "BH differs from step-up scan");
  }
  std::vector<double> ex{.01, .02, .04, .6};
  out.require(benjamini_hochberg(ex, .05) == std::vector<bool>{true, true, false, false}, "BH example");

  double worst = 0;
  for (std::size_t n : {5u, 50u, 194u})
    for (double rv : {-0.95, -0.6, -0.3, -0.1, 0.0, 0.02, 0.14, 0.25, 0.5, 0.8, 0.99})
      worst = std::max(worst, std::abs(p_value(rv, n) - stats_oracle::p_value(rv, n)));
  out.require(worst < 1e-6, fmt::format("p-value error {}", worst));
  out.require(std::abs(p_value(0.6, 6) - 0.208) < 0.001, "p(0.6, 6)");
  if (out.ok) out.detail = fmt::format("max p-value error {:.1e}", worst);
  return out;
}

// 5. planted signal and null plans
Outcome planted_signal() {
  Outcome out;
  auto root = fixtures::scratch("accept-planted");
  SynthPlan plan;
  plan.seed = 42;
  plan.counties = 194;
  plan.effects = {parse_plant("tagX:Obese:gap:0.8:0.1")};
  SynthData data;
  auto cfg = synth_store(plan, root / "planted", &data);
  run_pipeline(cfg, all_stages);
  double realized = data.realized.at(0).realized_r;
  auto records = load_records(cfg);
  auto table = rank(records, "Obese", "gap", 1, false);
  out.require(!table.rows.empty() && table.rows[0].tag == "tagx", "tagx is not top-1 by boost");
  bool found = false;
  for (const auto& r : records)
    if (r.tag_text == "tagx" && r.metric == "Obese" && r.family == "gap") {
      found = true;
      out.require(std::abs(r.mean_r - realized) <= 0.05,
                  fmt::format("cv mean r {} vs realized {}", r.mean_r, realized));
      out.require(r.significant, "tagx not BH-significant");
      out.detail = fmt::format("realized r {:.3f}, cv mean r {:.3f}±{:.3f}", realized, r.mean_r, r.se_r);
    }
  out.require(found, "tagx record missing");

  int clean_global = 0, clean_default = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthPlan null_plan;
    null_plan.seed = seed;
    auto ncfg = synth_store(null_plan, root / fmt::format("null{}", seed));
    ncfg.set("bh-grouping", "global");
    run_pipeline(ncfg, all_stages);
    auto recs = load_records(ncfg);
    int sig = 0;
    for (const auto& r : recs) sig += r.significant;
    clean_global += sig == 0;
    apply_bh(recs, ncfg.alpha, BhGrouping::metric_family);
    sig = 0;
    for (const auto& r : recs) sig += r.significant;
    clean_default += sig == 0;
  }
  out.require(clean_global >= 18, fmt::format("null plans clean in {}/20 seeds", clean_global));
  std::string tail = fmt::format("; null clean {}/20 (global BH), {}/20 (per metric-family BH)", clean_global,
                                 clean_default);
  if (out.ok) out.detail += tail;
  else out.detail += tail;
  fs::remove_all(root);
  return out;
}

// 6. pipeline vs oracle
Outcome oracle_equivalence() {
  Outcome out;
  auto root = fixtures::scratch("accept-oracle");
  SynthPlan plan;
  plan.seed = 5;
  plan.counties = 50;
  plan.users_per_county = 10;
  plan.images_per_user = 20;
  plan.vocab_size = 30;
  plan.effects = {parse_plant("tagX:Obese:gap:0.6:0.1")};
  plan.subjective = {parse_subjective_plant("healthy:smoothies:DiabetesPrev:-0.5"),
                     parse_subjective_plant("organic:kale:Smokers:0.4")};
  auto base = synth_store(plan, root);
  const std::vector<std::string> labels = base.labels;
  double worst = 0;
  std::size_t compared = 0;
  for (Weighting w : {Weighting::uniform, Weighting::score}) {
    RunConfig cfg = base;
    cfg.weighting = w;
    cfg.out = (root / fmt::format("store-{}", weighting_name(w))).string();
    run_pipeline(cfg, std::vector<Stage>{Stage::ingest, Stage::features});
    auto corpus = parse_posts((fs::path(cfg.out) / "ingest" / "corpus.jsonl").string());
    out.require(corpus.posts.size() == 10000, "filters removed posts from the fixture");

    auto vocab = load_vocabulary(cfg.vocab);
    auto oracle = oracle_features(cfg.posts, cfg.counties, cfg.vocab, w, labels);
    auto feature_path = [&](const std::string& name) { return (fs::path(cfg.out) / "features" / name).string(); };
    for (Family fam : {Family::gap, Family::human, Family::machine}) {
      auto m = parse_feature_matrix(read_file(feature_path(std::string(family_name(fam)) + ".csv")), vocab, fam);
      const auto& ref = fam == Family::gap ? oracle.gap : fam == Family::human ? oracle.human : oracle.machine;
      out.require(m.rows.size() == ref.size(), "county count " + std::string(family_name(fam)));
      for (const auto& [f, row] : ref)
        for (TagId t = 0; t < vocab.size(); ++t) {
          worst = std::max(worst, std::abs(m.value(f, t) - row[t]));
          ++compared;
        }
    }
    for (const auto& label : labels) {
      std::string b = "subjective_" + label;
      auto m = parse_cond_prob(label, read_file(feature_path(b + ".csv")), read_file(feature_path(b + "_imputed.csv")),
                               read_file(feature_path(b + "_baseline.csv")), vocab);
      const auto& ref = oracle.subjective.at(label);
      out.require(m.rows.size() == ref.values.size(), "subjective county count " + label);
      for (const auto& [f, row] : ref.values) {
        worst = std::max(worst, std::abs(m.baseline.at(f) - ref.baseline.at(f)));
        for (TagId t = 0; t < vocab.size(); ++t) {
          auto v = m.value(f, t);
          out.require(v.has_value() == row[t].has_value(), "subjective coverage " + label);
          if (v && row[t]) {
            worst = std::max(worst, std::abs(*v - *row[t]));
            ++compared;
          }
        }
      }
    }
  }
  out.require(worst <= 1e-12, fmt::format("max deviation {}", worst));
  if (out.ok) out.detail = fmt::format("{} cells, max deviation {:.1e}", compared, worst);
  fs::remove_all(root);
  return out;
}

// 7. filter accounting
Outcome filter_accounting() {
  Outcome out;
  std::vector<CountyShape> shapes;
  HealthTable health;
  std::vector<GeoPoint> centre;
  for (int c = 0; c < 22; ++c) {
    double x = -100.0 + 2.0 * c;
    auto f = *Fips::parse(fmt::format("{:05d}", 1001 + 2 * c));
    shapes.emplace_back(f, "c", std::vector<Polygon>{{{{x, 40}, {x + 1, 40}, {x + 1, 41}, {x, 41}, {x, 40}}, {}}});
    health.rows[f] = std::vector<double>(9, 1.0);
    centre.push_back({x + 0.5, 40.5});
  }
  SpatialIndex index(shapes);
  auto vocab = fixtures::vocab({"burger", "common", "rare", "pizza"});
  auto monotone = [&](const FilterReport& r) {
    out.require(r.total >= r.geo_assigned && r.geo_assigned >= r.health_matched &&
                    r.health_matched >= r.county_retained && r.county_retained >= r.tag_filter_retained &&
                    r.tag_filter_retained >= r.machine_valid,
                "filter counts increase");
  };
  auto make = [&](int county, const std::string& id, std::vector<std::string> h, std::vector<std::string> m) {
    auto p = fixtures::post(id, "u" + std::to_string(county), nullptr, std::move(h), std::move(m));
    p.where = centre[county];
    return p;
  };

  {  // 2,000-post county threshold with the default settings
    std::vector<Post> posts;
    for (int c = 0; c < 20; ++c)
      for (int i = 0; i < 2000; ++i) posts.push_back(make(c, fmt::format("a{}-{}", c, i), {"burger"}, {"pizza"}));
    for (int i = 0; i < 1999; ++i) posts.push_back(make(20, fmt::format("b{}", i), {"burger"}, {"pizza"}));
    auto [corpus, rep] = build_corpus(posts, index, health, vocab, CorpusConfig{});
    out.require(rep.retained_counties.size() == 20, "2,000-post county dropped or 1,999-post county kept");
    out.require(rep.county_retained == 40000, "county-retained count");
    out.require(corpus.posts.size() == 40000, "corpus size");
    monotone(rep);
  }
  {  // 20-county human-tag rule
    std::vector<Post> posts;
    for (int c = 0; c < 20; ++c) {
      posts.push_back(make(c, fmt::format("c{}", c), {"common"}, {"pizza"}));
      if (c < 19) posts.push_back(make(c, fmt::format("r{}", c), {"rare"}, {"pizza"}));
    }
    CorpusConfig cfg;
    cfg.min_posts_per_county = 1;
    auto [c19, r19] = build_corpus(posts, index, health, vocab, cfg);
    out.require(r19.tag_filter_retained == 20, "tag in 19 counties kept");
    posts.push_back(make(19, "r19", {"rare"}, {"pizza"}));
    auto [c20, r20] = build_corpus(posts, index, health, vocab, cfg);
    out.require(r20.tag_filter_retained == 40, "tag in 20 counties dropped");
    monotone(r19);
    monotone(r20);
  }
  {  // top-30 machine tags
    std::string machine;
    for (int i = 0; i < 40; ++i)
      machine += fmt::format("{}{{\"tag\":\"m{:02d}\",\"score\":{}}}", i ? "," : "", (i * 17) % 40, 1.0 - ((i * 17) % 40) / 40.0);
    auto res = parse_posts_text(fmt::format(
        R"({{"id":"x","user":"u","ts":"2016-01-01T00:00:00Z","lat":40.5,"lon":-99.5,"human_tags":["burger"],"machine_tags":[{}]}})",
        machine));
    out.require(res.posts.size() == 1 && res.posts[0].machine_tags.size() == 30, "not truncated to 30");
    if (res.posts.size() == 1)
      for (int i = 0; i < 30; ++i)
        out.require(res.posts[0].machine_tags[i].tag == fmt::format("m{:02d}", i), "truncation order");
  }
  return out;
}

// 8. determinism
Outcome determinism() {
  Outcome out;
  auto root = fixtures::scratch("accept-determinism");
  SynthPlan plan;
  plan.seed = 42;
  plan.users_per_county = 8;
  plan.images_per_user = 8;
  plan.effects = {parse_plant("tagX:Obese:gap:0.7:0.1"), parse_plant("tagY:Smokers:human:0.5:0.1")};
  plan.subjective = {parse_subjective_plant("healthy:smoothies:DiabetesPrev:-0.5")};
  auto base = synth_store(plan, root);
  std::vector<std::map<std::string, std::string>> snapshots;
  for (unsigned threads : {1u, 1u, 4u}) {
    RunConfig cfg = base;
    cfg.threads = threads;
    cfg.out = (root / fmt::format("store{}", snapshots.size())).string();
    run_pipeline(cfg, all_stages);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(cfg.out)) {
      if (!e.is_regular_file()) continue;
      auto rel = fs::relative(e.path(), cfg.out).string();
      if (rel == "provenance.jsonl") continue;  // wall-clock timestamps
      files[rel] = read_file(e.path().string());
    }
    snapshots.push_back(std::move(files));
  }
  std::size_t reports = 0;
  for (const auto& [k, v] : snapshots[0]) reports += k.starts_with("report/");
  out.require(reports > 0, "no reports written");
  out.require(snapshots[0] == snapshots[1], "two identical runs differ");
  out.require(snapshots[0] == snapshots[2], "thread count changes output");
  if (out.ok) out.detail = fmt::format("{} files identical, {} reports", snapshots[0].size(), reports);
  fs::remove_all(root);
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "worked example gap/human/machine rows", 1.0, worked_example},
      {2, "zero-sum and L1 bound over 1e5 images", 30.0, zero_sum},
      {3, "geometry vs winding-number oracle", 10.0, geometry},
      {4, "statistics oracles", 10.0, statistics},
      {5, "planted signal recovery and null plans", 60.0, planted_signal},
      {6, "pipeline vs naive oracle features", 30.0, oracle_equivalence},
      {7, "filter accounting", 5.0, filter_accounting},
      {8, "end-to-end determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = c.limit_s <= 0 || secs < c.limit_s;
    bool pass = o.ok && in_time;
    std::string limit = c.limit_s > 0 ? fmt::format(" < {:.0f}s", c.limit_s) : "";
    std::string why = o.detail;
    if (o.ok && !in_time) why = "too slow" + (why.empty() ? "" : "; " + why);
    std::cout << fmt::format("{} {}. {} [{:.2f}s{}]{}\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, limit,
                             why.empty() ? "" : " -- " + why)
              << std::flush;
    failed += !pass;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
