#include "foodgap/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace foodgap {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::internal, "pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double p_value(double r, std::size_t n) {
  if (n < 3) throw std::invalid_argument("p_value: n must be at least 3");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t2 = r * r * df / (1.0 - r * r);
  // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t2));
}

FoldSpec make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw Error(ErrorKind::usage, fmt::format("cannot split {} counties into {} folds", n, k));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Own bounded draw: std::uniform_int_distribution is not portable across
  // standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::uint64_t range = i + 1;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
    std::uint64_t draw;
    do draw = rng(); while (draw >= limit);
    std::swap(order[i], order[draw % range]);
  }
  FoldSpec spec{k, seed, std::vector<std::size_t>(n)};
  for (std::size_t pos = 0; pos < n; ++pos) spec.assignment[order[pos]] = pos % k;
  return spec;
}

std::optional<CvResult> cv_correlation(std::span<const double> feature,
                                       std::span<const double> target, const FoldSpec& folds,
                                       SeMode se_mode) {
  if (feature.size() != target.size() || feature.size() != folds.assignment.size())
    throw std::invalid_argument("cv_correlation: misaligned inputs");
  std::vector<double> rs;
  rs.reserve(folds.k);
  std::vector<double> xs, ys;
  for (std::size_t f = 0; f < folds.k; ++f) {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < feature.size(); ++i)
      if (folds.assignment[i] != f) {
        xs.push_back(feature[i]);
        ys.push_back(target[i]);
      }
    auto r = pearson(xs, ys);
    if (!r) return std::nullopt;
    rs.push_back(*r);
  }
  const double k = static_cast<double>(rs.size());
  double mean = 0;
  for (double r : rs) mean += r;
  mean /= k;
  double ss = 0;
  for (double r : rs) ss += (r - mean) * (r - mean);
  double sd = std::sqrt(ss / (k - 1.0));
  return CvResult{mean, se_mode == SeMode::standard_error ? sd / std::sqrt(k) : sd};
}

std::optional<double> bh_threshold(std::span<const double> p, double alpha) {
  const std::size_t m = p.size();
  if (m == 0) return std::nullopt;
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = m; k >= 1; --k)
    if (sorted[k - 1] <= static_cast<double>(k) * alpha / static_cast<double>(m))
      return sorted[k - 1];
  return std::nullopt;
}

std::vector<bool> benjamini_hochberg(std::span<const double> p, double alpha) {
  std::vector<bool> reject(p.size(), false);
  auto cutoff = bh_threshold(p, alpha);
  if (!cutoff) return reject;
  for (std::size_t i = 0; i < p.size(); ++i) reject[i] = p[i] <= *cutoff;
  return reject;
}

std::optional<double> boost(std::optional<double> r_gap, std::optional<double> r_machine,
                            std::optional<double> r_human) {
  if (!r_gap || !r_machine || !r_human) return std::nullopt;
  return std::abs(*r_gap) - std::max(std::abs(*r_machine), std::abs(*r_human));
}

std::optional<double> subjective_boost(std::optional<double> r_conditional,
                                       std::optional<double> r_baseline) {
  if (!r_conditional || !r_baseline) return std::nullopt;
  return std::abs(*r_conditional) - std::abs(*r_baseline);
}

std::optional<BhGrouping> parse_grouping(std::string_view s) {
  if (s == "metric-family") return BhGrouping::metric_family;
  if (s == "metric") return BhGrouping::metric;
  if (s == "global") return BhGrouping::global;
  return std::nullopt;
}

std::string_view grouping_name(BhGrouping g) {
  switch (g) {
    case BhGrouping::metric_family: return "metric-family";
    case BhGrouping::metric: return "metric";
    case BhGrouping::global: return "global";
  }
  return "?";
}

void apply_bh(std::vector<CorrelationRecord>& records, double alpha, BhGrouping grouping) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.significant = false;
    if (r.excluded) continue;
    std::string key;
    if (grouping == BhGrouping::metric_family) key = r.metric + "\x1f" + r.family;
    else if (grouping == BhGrouping::metric) key = r.metric;
    groups[key].push_back(i);
  }
  for (const auto& [key, idx] : groups) {
    std::vector<double> p;
    p.reserve(idx.size());
    for (std::size_t i : idx) p.push_back(records[i].p_raw);
    auto reject = benjamini_hochberg(p, alpha);
    for (std::size_t j = 0; j < idx.size(); ++j) records[idx[j]].significant = reject[j];
  }
}

namespace {

struct Evaluated {
  bool excluded = true;
  double mean_r = 0, se_r = 0, r_full = 0, p_raw = 1;
};

Evaluated evaluate(std::span<const double> x, std::span<const double> y, const FoldSpec& folds,
                   SeMode se_mode) {
  Evaluated e;
  auto full = pearson(x, y);
  auto cv = full ? cv_correlation(x, y, folds, se_mode) : std::nullopt;
  if (!full || !cv) return e;
  e.excluded = false;
  e.mean_r = cv->mean_r;
  e.se_r = cv->se_r;
  e.r_full = *full;
  e.p_raw = p_value(*full, x.size());
  return e;
}

struct Job {
  std::string family;
  TagId tag;
  std::vector<double> column;
};

}  // namespace

CorrelationResult correlate(const FeatureSet& features, const HealthTable& health,
                            const MetricRegistry& metrics, const Vocabulary& vocab,
                            const CorrelateConfig& cfg) {
  CorrelationResult result;

  // Counties present in every supplied matrix and in the health table.
  std::vector<const std::map<Fips, SparseVector>*> row_sets;
  for (const auto* m : {&features.gap, &features.human, &features.machine})
    if (*m) row_sets.push_back(&(*m)->rows);
  for (const auto& s : features.subjective) row_sets.push_back(&s.rows);
  if (row_sets.empty()) throw Error(ErrorKind::usage, "correlate: no feature matrices supplied");
  for (const auto& [fips, row] : *row_sets.front()) {
    bool everywhere = health.contains(fips);
    for (const auto* rs : row_sets) everywhere = everywhere && rs->count(fips);
    if (everywhere) result.counties.push_back(fips);
  }
  const std::size_t n = result.counties.size();
  if (n < 3 || n < cfg.folds)
    throw data_error(fmt::format("correlate: only {} counties available for {} folds", n, cfg.folds));
  FoldSpec folds = make_folds(n, cfg.folds, cfg.seed);

  std::vector<std::vector<double>> targets(metrics.size(), std::vector<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    const auto& row = health.rows.at(result.counties[c]);
    for (std::size_t m = 0; m < metrics.size(); ++m) targets[m][c] = row[m];
  }

  std::vector<Job> jobs;
  for (const auto* fm : {&features.gap, &features.human, &features.machine}) {
    if (!*fm) continue;
    const FeatureMatrix& mat = **fm;
    for (TagId t = 0; t < vocab.size(); ++t) {
      Job job{std::string(family_name(mat.family)), t, std::vector<double>(n)};
      for (std::size_t c = 0; c < n; ++c) job.column[c] = mat.value(result.counties[c], t);
      jobs.push_back(std::move(job));
    }
  }
  for (const auto& s : features.subjective) {
    std::vector<bool> dropped(vocab.size(), false);
    for (TagId t : s.dropped) dropped[t] = true;
    for (TagId t = 0; t < vocab.size(); ++t) {
      if (dropped[t]) continue;
      Job job{"subjective:" + s.label, t, std::vector<double>(n)};
      bool complete = true;
      for (std::size_t c = 0; c < n && complete; ++c) {
        auto v = s.value(result.counties[c], t);
        complete = v.has_value();
        job.column[c] = v.value_or(0.0);
      }
      if (!complete) throw data_error("correlate: subjective matrix '" + s.label + "' is not imputed");
      jobs.push_back(std::move(job));
    }
  }

  std::vector<std::vector<Evaluated>> evaluated(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    evaluated[j].reserve(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m)
      evaluated[j].push_back(evaluate(jobs[j].column, targets[m], folds, cfg.se_mode));
  });

  for (const auto& s : features.subjective) {
    std::vector<double> column(n);
    for (std::size_t c = 0; c < n; ++c) {
      auto it = s.baseline.find(result.counties[c]);
      column[c] = it == s.baseline.end() ? 0.0 : it->second;
    }
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      auto e = evaluate(column, targets[m], folds, cfg.se_mode);
      result.baselines.push_back(
          {s.label, metrics.metrics()[m].label, e.excluded, e.mean_r, e.se_r, e.r_full, e.p_raw});
    }
  }

  // (family, tag) -> job index, for boost lookups.
  std::map<std::pair<std::string, TagId>, std::size_t> by_key;
  for (std::size_t j = 0; j < jobs.size(); ++j) by_key[{jobs[j].family, jobs[j].tag}] = j;
  auto cv_mean = [&](const std::string& family, TagId tag, std::size_t m) -> std::optional<double> {
    auto it = by_key.find({family, tag});
    if (it == by_key.end()) return std::nullopt;
    const auto& e = evaluated[it->second][m];
    return e.excluded ? std::nullopt : std::optional<double>(e.mean_r);
  };

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const std::string& label = metrics.metrics()[m].label;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const auto& e = evaluated[j][m];
      CorrelationRecord r;
      r.tag = jobs[j].tag;
      r.tag_text = vocab.text(jobs[j].tag);
      r.metric = label;
      r.family = jobs[j].family;
      r.excluded = e.excluded;
      r.mean_r = e.mean_r;
      r.se_r = e.se_r;
      r.r_full = e.r_full;
      r.p_raw = e.p_raw;
      if (!e.excluded) {
        if (r.family == "gap") {
          r.boost = boost(e.mean_r, cv_mean("machine", r.tag, m), cv_mean("human", r.tag, m));
        } else if (r.family.starts_with("subjective:")) {
          std::string lbl = r.family.substr(11);
          for (const auto& b : result.baselines)
            if (b.label == lbl && b.metric == label && !b.excluded)
              r.boost = subjective_boost(e.mean_r, b.mean_r);
        }
      } else {
        ++result.excluded;
      }
      result.records.push_back(std::move(r));
    }
  }
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const CorrelationRecord& a, const CorrelationRecord& b) {
                     if (a.metric != b.metric) return a.metric < b.metric;
                     if (a.family != b.family) return a.family < b.family;
                     return a.tag_text < b.tag_text;
                   });
  apply_bh(result.records, cfg.alpha, cfg.grouping);
  return result;
}

namespace {

std::string opt_num(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string records_csv(const std::vector<CorrelationRecord>& records) {
  std::string out = "tag,metric,family,excluded,mean_r,se_r,r_full,p_raw,significant,boost\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},", r.tag_text, r.metric, r.family, r.excluded ? 1 : 0);
    if (r.excluded) {
      out += ",,,,0,\n";
      continue;
    }
    out += fmt::format("{},{},{},{},{},{}\n", format_double(r.mean_r), format_double(r.se_r),
                       format_double(r.r_full), format_double(r.p_raw), r.significant ? 1 : 0,
                       opt_num(r.boost));
  }
  return out;
}

std::vector<CorrelationRecord> parse_records_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::vector<CorrelationRecord> out;
  bool header = true;
  std::size_t line_no = 0;
  auto num = [&](const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw data_error(fmt::format("correlations line {}: bad number '{}'", line_no, s));
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (trim(line).empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 10) throw data_error(fmt::format("correlations line {}: expected 10 fields", line_no));
    CorrelationRecord r;
    r.tag_text = f[0];
    r.metric = f[1];
    r.family = f[2];
    r.excluded = f[3] == "1";
    if (!r.excluded) {
      r.mean_r = num(f[4]);
      r.se_r = num(f[5]);
      r.r_full = num(f[6]);
      r.p_raw = num(f[7]);
      r.significant = f[8] == "1";
      if (!f[9].empty()) r.boost = num(f[9]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string baselines_csv(const std::vector<BaselineRecord>& baselines) {
  std::string out = "label,metric,excluded,mean_r,se_r,r_full,p_raw\n";
  for (const auto& b : baselines) {
    if (b.excluded) {
      out += fmt::format("{},{},1,,,,\n", b.label, b.metric);
      continue;
    }
    out += fmt::format("{},{},0,{},{},{},{}\n", b.label, b.metric, format_double(b.mean_r),
                       format_double(b.se_r), format_double(b.r_full), format_double(b.p_raw));
  }
  return out;
}

}  // namespace foodgap
