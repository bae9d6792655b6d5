#include "foodgap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "foodgap/geo.hpp"

namespace foodgap {

using nlohmann::json;

namespace {

// Portable draws on top of mt19937_64; the standard distributions are
// implementation-defined and would break byte-identical output across
// toolchains.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      double s = *spare_;
      spare_.reset();
      return s;
    }
    double u1;
    do u1 = uniform(); while (u1 <= 0.0);
    double u2 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

  double truncated_normal(double limit) {
    double z;
    do z = normal(); while (std::abs(z) > limit);
    return z;
  }

  std::size_t below(std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % range;
    std::uint64_t d;
    do d = engine_(); while (d >= limit);
    return static_cast<std::size_t>(d % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::usage, "bad number in '" + spec + "'");
  }
}

struct MetricShape {
  double mean, sd;
};

// Plausible county ranges, by registry column.
MetricShape shape_for(const std::string& column) {
  static const std::map<std::string, MetricShape> shapes = {
      {"smokers", {18.0, 3.5}},      {"obesity", {30.0, 4.5}},
      {"food_env_index", {7.5, 1.1}}, {"phys_inactive", {24.0, 5.0}},
      {"excess_drink", {17.0, 3.0}}, {"alc_driving_deaths", {30.0, 8.0}},
      {"diabetes", {10.0, 2.5}},     {"food_insecure", {14.0, 3.5}},
      {"limited_access", {7.0, 3.0}}};
  auto it = shapes.find(column);
  return it == shapes.end() ? MetricShape{10.0, 2.0} : it->second;
}

std::vector<double> standardized(const std::vector<double>& v) {
  double n = static_cast<double>(v.size());
  double mean = 0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sd > 0 ? (v[i] - mean) / sd : 0.0;
  return out;
}

// Metric with sample correlation exactly r against `feature`.
std::vector<double> planted_metric(const std::vector<double>& feature, double r, SynthRng& rng) {
  const std::size_t n = feature.size();
  auto zf = standardized(feature);
  std::vector<double> e(n);
  for (auto& x : e) x = rng.normal();
  double mean = 0;
  for (double x : e) mean += x;
  mean /= static_cast<double>(n);
  double dot = 0, norm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += (e[i] - mean) * zf[i];
    norm += zf[i] * zf[i];
  }
  for (std::size_t i = 0; i < n; ++i) e[i] = e[i] - mean - (norm > 0 ? dot / norm * zf[i] : 0.0);
  auto ze = standardized(e);
  std::vector<double> z(n);
  const double q = std::sqrt(1.0 - r * r);
  for (std::size_t i = 0; i < n; ++i) z[i] = r * zf[i] + q * ze[i];
  return z;
}

std::string ring_json(double lon0, double lat0, double side) {
  return fmt::format("[[{},{}],[{},{}],[{},{}],[{},{}],[{},{}]]", lon0, lat0, lon0 + side, lat0,
                     lon0 + side, lat0 + side, lon0, lat0 + side, lon0, lat0);
}

}  // namespace

PlantedEffect parse_plant(const std::string& spec) {
  auto f = split(spec, ':');
  if (f.size() != 5) throw Error(ErrorKind::usage, "plant must be tag:metric:family:r:sd, got '" + spec + "'");
  auto family = parse_family(f[2]);
  if (!family) throw Error(ErrorKind::usage, "unknown family in '" + spec + "'");
  return {f[0], f[1], *family, parse_number(f[3], spec), parse_number(f[4], spec)};
}

SubjectivePlant parse_subjective_plant(const std::string& spec) {
  auto f = split(spec, ':');
  if (f.size() != 4) throw Error(ErrorKind::usage, "subjective plant must be label:tag:metric:r, got '" + spec + "'");
  return {f[0], f[1], f[2], parse_number(f[3], spec)};
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double num = 0, dx2 = 0, dy2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx2 += (x[i] - mx) * (x[i] - mx);
    dy2 += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(dx2 * dy2);
}

OracleFeatures oracle_features(std::span<const Post> posts, const Vocabulary& vocab,
                               Weighting weighting, const std::vector<std::string>& labels) {
  const std::size_t V = vocab.size();
  struct Image {
    std::vector<double> h, m;
    std::vector<bool> tagged;  // machine tag present
    std::vector<bool> label;   // per requested label
  };
  std::map<Fips, std::map<std::string, std::vector<Image>>> by_county;

  for (const Post& p : posts) {
    std::set<std::string> human;
    for (const auto& t : p.human_tags)
      for (const auto& vt : vocab.tags())
        if (vt.text == t) human.insert(t);
    std::vector<std::pair<std::string, double>> machine;
    for (const auto& mt : p.machine_tags)
      for (const auto& vt : vocab.tags())
        if (vt.text == mt.tag) machine.emplace_back(mt.tag, mt.score ? *mt.score : 1.0);
    if (human.empty() || machine.empty()) continue;

    Image img{std::vector<double>(V, 0.0), std::vector<double>(V, 0.0), std::vector<bool>(V, false), {}};
    for (const auto& t : human) img.h[*vocab.find(t)] = 1.0 / static_cast<double>(human.size());
    double total = 0;
    for (const auto& [t, s] : machine) total += s;
    for (const auto& [t, s] : machine) {
      TagId id = *vocab.find(t);
      img.tagged[id] = true;
      if (weighting == Weighting::score && total > 0) img.m[id] = s / total;
      else img.m[id] = 1.0 / static_cast<double>(machine.size());
    }
    for (const auto& l : labels) {
      bool has = false;
      for (const auto& t : p.human_tags) has = has || t == l;
      img.label.push_back(has);
    }
    by_county[*p.county][p.user].push_back(std::move(img));
  }

  OracleFeatures out;
  for (const auto& [fips, users] : by_county) {
    std::vector<double> gap(V, 0.0), hum(V, 0.0), mac(V, 0.0);
    for (const auto& [user, images] : users) {
      for (std::size_t t = 0; t < V; ++t) {
        double hs = 0, ms = 0;
        for (const auto& img : images) {
          hs += img.h[t];
          ms += img.m[t];
        }
        double k = static_cast<double>(images.size());
        hum[t] += hs / k;
        mac[t] += ms / k;
        gap[t] += (ms - hs) / k;
      }
    }
    double u = static_cast<double>(users.size());
    for (std::size_t t = 0; t < V; ++t) {
      gap[t] /= u;
      hum[t] /= u;
      mac[t] /= u;
    }
    out.gap[fips] = gap;
    out.human[fips] = hum;
    out.machine[fips] = mac;
  }

  for (std::size_t li = 0; li < labels.size(); ++li) {
    OracleSubjective subj;
    for (const auto& [fips, users] : by_county) {
      std::vector<double> sum(V, 0.0);
      std::vector<int> n_users(V, 0);
      double base = 0;
      for (const auto& [user, images] : users) {
        double labelled = 0;
        for (const auto& img : images) labelled += img.label[li] ? 1.0 : 0.0;
        base += labelled / static_cast<double>(images.size());
        for (std::size_t t = 0; t < V; ++t) {
          double carrying = 0, with_label = 0;
          for (const auto& img : images)
            if (img.tagged[t]) {
              carrying += 1;
              if (img.label[li]) with_label += 1;
            }
          if (carrying > 0) {
            sum[t] += with_label / carrying;
            n_users[t] += 1;
          }
        }
      }
      subj.baseline[fips] = base / static_cast<double>(users.size());
      std::vector<std::optional<double>> row(V);
      for (std::size_t t = 0; t < V; ++t)
        if (n_users[t] > 0) row[t] = sum[t] / n_users[t];
      subj.values[fips] = row;
    }
    for (std::size_t t = 0; t < V; ++t) {
      double s = 0;
      int n = 0;
      for (const auto& [fips, row] : subj.values)
        if (row[t]) {
          s += *row[t];
          ++n;
        }
      if (n == 0) continue;
      for (auto& [fips, row] : subj.values)
        if (!row[t]) row[t] = s / n;
    }
    out.subjective[labels[li]] = std::move(subj);
  }
  return out;
}

OracleFeatures oracle_features(const std::string& posts_path, const std::string& counties_path,
                               const std::string& vocab_path, Weighting weighting,
                               const std::vector<std::string>& labels) {
  auto vocab = load_vocabulary(vocab_path);
  auto shapes = load_shapes(counties_path);
  auto parsed = parse_posts(posts_path);
  std::vector<Post> posts;
  for (auto& p : parsed.posts) {
    if (!p.county) p.county = assign_county_exhaustive(p.where, shapes.index.shapes());
    if (p.county) posts.push_back(std::move(p));
  }
  return oracle_features(posts, vocab, weighting, labels);
}

SynthData generate(const SynthPlan& plan) {
  if (plan.counties < 3) throw Error(ErrorKind::usage, "synth: need at least 3 counties");
  if (plan.counties > 99 * 499) throw Error(ErrorKind::usage, "synth: too many counties");
  if (plan.users_per_county < 1 || plan.images_per_user < 1)
    throw Error(ErrorKind::usage, "synth: users and images per county must be positive");

  const MetricRegistry metrics = MetricRegistry::defaults();
  SynthData data;
  data.plan = plan;

  // Planted tags first, then filler tags up to vocab_size.
  std::vector<std::string> planted_tags;
  std::set<std::size_t> planted_metrics;
  auto claim_metric = [&](const std::string& name) {
    auto m = metrics.find(name);
    if (!m) throw Error(ErrorKind::usage, "synth: unknown metric '" + name + "'");
    if (!planted_metrics.insert(*m).second)
      throw Error(ErrorKind::usage, "synth: metric '" + name + "' planted twice");
    return *m;
  };
  auto claim_tag = [&](const std::string& raw) {
    auto t = normalize_tag(raw);
    if (!t) throw Error(ErrorKind::usage, "synth: bad tag '" + raw + "'");
    if (std::find(planted_tags.begin(), planted_tags.end(), *t) == planted_tags.end())
      planted_tags.push_back(*t);
    return *t;
  };
  auto check_r = [](double r) {
    if (!(r > -1.0 && r < 1.0)) throw Error(ErrorKind::usage, "synth: target r must lie in (-1, 1)");
  };

  struct Effect {
    std::string tag;
    std::size_t metric;
    Family family;
    double r, sd;
    std::vector<double> common, driver;  // per county
  };
  struct Subj {
    std::string label, tag;
    std::size_t metric;
    double r;
    std::vector<double> driver;
  };
  std::vector<Effect> effects;
  std::vector<Subj> subjs;
  for (const auto& e : plan.effects) {
    check_r(e.target_r);
    if (e.noise_sd < 0) throw Error(ErrorKind::usage, "synth: noise sd must be non-negative");
    effects.push_back({claim_tag(e.tag), claim_metric(e.metric), e.family, e.target_r, e.noise_sd, {}, {}});
  }
  std::vector<std::string> labels = SubjectiveLabels().labels();
  for (const auto& s : plan.subjective) {
    check_r(s.target_r);
    auto label = normalize_tag(s.label);
    if (!label) throw Error(ErrorKind::usage, "synth: bad label '" + s.label + "'");
    if (std::find(labels.begin(), labels.end(), *label) == labels.end()) labels.push_back(*label);
    subjs.push_back({*label, claim_tag(s.tag), claim_metric(s.metric), s.target_r, {}});
  }
  for (const auto& l : labels)
    if (std::find(planted_tags.begin(), planted_tags.end(), l) != planted_tags.end())
      throw Error(ErrorKind::usage, "synth: label '" + l + "' cannot be a tag");

  const std::size_t min_filler = 8;
  if (plan.vocab_size < planted_tags.size() + min_filler)
    throw Error(ErrorKind::usage,
                fmt::format("synth: vocab size must be at least {}", planted_tags.size() + min_filler));
  std::vector<std::string> filler;
  for (std::size_t i = 0; filler.size() + planted_tags.size() < plan.vocab_size; ++i) {
    std::string t = fmt::format("food{:04d}", i);
    if (std::find(planted_tags.begin(), planted_tags.end(), t) == planted_tags.end()) filler.push_back(t);
  }
  {
    std::vector<Tag> tags;
    const TagCategory cats[] = {TagCategory::drinks, TagCategory::part_of_dish,
                                TagCategory::name_of_dish, TagCategory::food101_derived};
    std::size_t k = 0;
    for (const auto& t : planted_tags) tags.push_back({t, cats[k++ % 4]});
    for (const auto& t : filler) tags.push_back({t, cats[k++ % 4]});
    data.vocab = Vocabulary(std::move(tags));
  }

  SynthRng rng(plan.seed);
  const std::size_t C = plan.counties;

  // County grid.
  const std::size_t width = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(C))));
  const double side = std::min(1.0, 40.0 / static_cast<double>(width));
  const double pitch = 1.5 * side;
  struct Square {
    double lon0, lat0;
  };
  std::vector<Square> squares(C);
  std::string geo = "{\"type\":\"FeatureCollection\",\"features\":[\n";
  for (std::size_t c = 0; c < C; ++c) {
    data.counties.push_back(*Fips::parse(fmt::format("{:02d}{:03d}", 1 + c / 499, 1 + 2 * (c % 499))));
    squares[c] = {-125.0 + pitch * static_cast<double>(c % width),
                  25.0 + pitch * static_cast<double>(c / width)};
    geo += fmt::format(
        "{}{{\"type\":\"Feature\",\"properties\":{{\"fips\":\"{}\",\"NAME\":\"Synth {}\"}},"
        "\"geometry\":{{\"type\":\"Polygon\",\"coordinates\":[{}]}}}}",
        c == 0 ? "" : ",\n", data.counties[c].str(), c, ring_json(squares[c].lon0, squares[c].lat0, side));
  }
  geo += "\n]}\n";
  data.counties_geojson = std::move(geo);

  for (auto& e : effects)
    for (std::size_t c = 0; c < C; ++c) {
      e.common.push_back(rng.truncated_normal(2.0));
      e.driver.push_back(rng.truncated_normal(2.0));
    }
  for (auto& s : subjs)
    for (std::size_t c = 0; c < C; ++c) s.driver.push_back(rng.truncated_normal(2.0));

  auto clamp01 = [](double p) { return std::clamp(p, 0.0, 1.0); };
  const std::vector<std::string> chatter = {"foodie", "yummy", "hungry", "instafood"};
  const std::size_t machine_background = 4;
  const auto base_time = std::chrono::sys_days{std::chrono::year{2015} / 1 / 1};

  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t u = 0; u < plan.users_per_county; ++u) {
      // Per-user usage probabilities for each planted tag.
      std::vector<double> q_machine(effects.size()), q_human(effects.size());
      for (std::size_t k = 0; k < effects.size(); ++k) {
        const auto& e = effects[k];
        double s = e.common[c], d = e.driver[c];
        switch (e.family) {
          case Family::gap:
            q_machine[k] = 0.5 + 0.25 * s + 0.075 * d;
            q_human[k] = 0.2 + 0.1 * s - 0.03 * d;
            break;
          case Family::machine:
            q_machine[k] = 0.5 + 0.2 * d;
            q_human[k] = 0.2;
            break;
          case Family::human:
            q_machine[k] = 0.5;
            q_human[k] = 0.3 + 0.12 * d;
            break;
        }
        q_machine[k] = clamp01(q_machine[k] + e.sd * rng.normal());
        q_human[k] = clamp01(q_human[k] + e.sd * rng.normal());
      }
      std::vector<double> q_label(subjs.size());
      for (std::size_t k = 0; k < subjs.size(); ++k)
        q_label[k] = clamp01(0.3 + 0.12 * subjs[k].driver[c] + 0.05 * rng.normal());

      for (std::size_t i = 0; i < plan.images_per_user; ++i) {
        Post p;
        p.id = fmt::format("p{:05d}-{:04d}-{:04d}", c, u, i);
        p.user = fmt::format("u{:05d}-{:04d}", c, u);
        p.when = base_time + std::chrono::seconds{static_cast<long long>(rng.below(86400 * 365))};
        p.where = {squares[c].lon0 + side * (0.05 + 0.9 * rng.uniform()),
                   squares[c].lat0 + side * (0.05 + 0.9 * rng.uniform())};
        p.county = data.counties[c];

        std::vector<std::string> machine;
        while (machine.size() < machine_background) {
          const auto& t = filler[rng.below(filler.size())];
          if (std::find(machine.begin(), machine.end(), t) == machine.end()) machine.push_back(t);
        }
        for (std::size_t k = 0; k < effects.size(); ++k)
          if (rng.bernoulli(q_machine[k])) machine.push_back(effects[k].tag);
        for (const auto& s : subjs)
          if (std::find(machine.begin(), machine.end(), s.tag) == machine.end() && rng.bernoulli(0.5))
            machine.push_back(s.tag);
        std::vector<double> scores(machine.size());
        for (auto& s : scores) s = 0.05 + 0.95 * rng.uniform();
        std::sort(scores.begin(), scores.end(), std::greater<>());
        for (std::size_t k = 0; k < machine.size(); ++k) p.machine_tags.push_back({machine[k], scores[k]});

        p.human_tags.push_back(filler[rng.below(filler.size())]);
        for (std::size_t k = 0; k < effects.size(); ++k)
          if (rng.bernoulli(q_human[k])) p.human_tags.push_back(effects[k].tag);
        if (rng.bernoulli(0.3)) p.human_tags.push_back(chatter[rng.below(chatter.size())]);
        for (const auto& label : labels) {
          double prob = 0.1;
          for (std::size_t k = 0; k < subjs.size(); ++k)
            if (subjs[k].label == label &&
                std::find(machine.begin(), machine.end(), subjs[k].tag) != machine.end())
              prob = q_label[k];
          if (rng.bernoulli(prob)) p.human_tags.push_back(label);
        }
        std::vector<std::string> unique;
        for (auto& t : p.human_tags)
          if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(t);
        p.human_tags = std::move(unique);
        data.posts.push_back(std::move(p));
      }
    }
  }

  // Realized county features from the oracle, then the health metrics.
  auto oracle = oracle_features(data.posts, data.vocab, Weighting::uniform, labels);
  std::vector<std::vector<double>> z(metrics.size());
  std::vector<std::vector<double>> planted_feature(metrics.size());
  std::vector<std::string> planted_family(metrics.size());
  std::vector<std::string> planted_tag(metrics.size());
  for (const auto& e : effects) {
    const auto& fam = e.family == Family::gap ? oracle.gap
                      : e.family == Family::human ? oracle.human : oracle.machine;
    TagId id = *data.vocab.find(e.tag);
    std::vector<double> f;
    for (const auto& fips : data.counties) f.push_back(fam.at(fips)[id]);
    z[e.metric] = planted_metric(f, e.r, rng);
    planted_feature[e.metric] = std::move(f);
    planted_family[e.metric] = std::string(family_name(e.family));
    planted_tag[e.metric] = e.tag;
  }
  for (const auto& s : subjs) {
    TagId id = *data.vocab.find(s.tag);
    const auto& values = oracle.subjective.at(s.label).values;
    std::vector<double> f;
    for (const auto& fips : data.counties) f.push_back(values.at(fips)[id].value_or(0.0));
    z[s.metric] = planted_metric(f, s.r, rng);
    planted_feature[s.metric] = std::move(f);
    planted_family[s.metric] = "subjective:" + s.label;
    planted_tag[s.metric] = s.tag;
  }
  for (std::size_t m = 0; m < metrics.size(); ++m)
    if (z[m].empty())
      for (std::size_t c = 0; c < C; ++c) z[m].push_back(rng.normal());

  for (std::size_t c = 0; c < C; ++c) {
    std::vector<double> row(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      auto shape = shape_for(metrics.metrics()[m].column);
      row[m] = shape.mean + shape.sd * z[m][c];
    }
    data.health.rows.emplace(data.counties[c], std::move(row));
  }

  // Truth record: realized r of each planted feature against the final metric.
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    if (planted_feature[m].empty()) continue;
    std::vector<double> y;
    for (const auto& fips : data.counties) y.push_back(data.health.rows.at(fips)[m]);
    double target = 0;
    for (const auto& e : effects)
      if (e.metric == m) target = e.r;
    for (const auto& s : subjs)
      if (s.metric == m) target = s.r;
    data.realized.push_back({planted_tag[m], metrics.metrics()[m].label, planted_family[m], target,
                             oracle_pearson(planted_feature[m], y)});
  }

  // Serialized forms.
  for (const auto& p : data.posts) {
    Post copy = p;
    copy.county.reset();
    data.posts_jsonl += post_to_json_line(copy) + "\n";
  }
  data.health_csv = health_to_csv(data.health, metrics);
  data.vocab_csv = "tag,category\n";
  for (const auto& t : data.vocab.tags())
    data.vocab_csv += fmt::format("{},{}\n", t.text, category_name(t.category));

  json truth;
  truth["seed"] = plan.seed;
  truth["counties"] = plan.counties;
  truth["users_per_county"] = plan.users_per_county;
  truth["images_per_user"] = plan.images_per_user;
  truth["vocab_size"] = plan.vocab_size;
  truth["labels"] = labels;
  json eff = json::array();
  for (const auto& r : data.realized)
    eff.push_back({{"tag", r.tag}, {"metric", r.metric}, {"family", r.family},
                   {"target_r", r.target_r}, {"realized_r", r.realized_r}});
  truth["effects"] = std::move(eff);
  data.truth_json = truth.dump(2) + "\n";
  return data;
}

void write_synth(const SynthData& data, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  write_file(path("posts.jsonl"), data.posts_jsonl);
  write_file(path("counties.geojson"), data.counties_geojson);
  write_file(path("health.csv"), data.health_csv);
  write_file(path("vocab.csv"), data.vocab_csv);
  write_file(path("truth.json"), data.truth_json);

  std::string labels;
  const json truth = json::parse(data.truth_json);
  for (const auto& l : truth.at("labels")) {
    if (!labels.empty()) labels += ",";
    labels += l.get<std::string>();
  }
  const std::size_t per_county = data.plan.users_per_county * data.plan.images_per_user;
  std::string cfg = fmt::format(
      "# Generated by foodgap synth (seed {}).\n"
      "posts = \"{}\"\ncounties = \"{}\"\nhealth = \"{}\"\nvocab = \"{}\"\n"
      "min-county-posts = {}\nmin-tag-counties = {}\nlabels = \"{}\"\nseed = {}\n",
      data.plan.seed, fs::absolute(path("posts.jsonl")).string(),
      fs::absolute(path("counties.geojson")).string(), fs::absolute(path("health.csv")).string(),
      fs::absolute(path("vocab.csv")).string(), std::min<std::size_t>(per_county, 2000),
      std::min<std::size_t>(data.plan.counties, 20), labels, data.plan.seed);
  write_file(path("synth.cfg"), cfg);
}

}  // namespace foodgap
