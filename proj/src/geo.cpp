#include "foodgap/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

namespace foodgap {

bool is_valid(const GeoPoint& p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) return false;
  if (p.lon < -180.0 || p.lon > 180.0 || p.lat < -90.0 || p.lat > 90.0) return false;
  return !(p.lon == 0.0 && p.lat == 0.0);
}

namespace {

bool on_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
  if (cross != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

void check_ring(const Ring& ring, const std::string& what) {
  if (ring.size() < 4) throw data_error(what + ": ring has fewer than 4 points");
  const auto& f = ring.front();
  const auto& l = ring.back();
  if (f.lon != l.lon || f.lat != l.lat) throw data_error(what + ": ring is not closed");
  for (const auto& p : ring)
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat))
      throw data_error(what + ": non-finite coordinate");
}

}  // namespace

RingSide classify(const Ring& ring, const GeoPoint& p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const GeoPoint& a = ring[j];
    const GeoPoint& b = ring[i];
    if (on_segment(a, b, p)) return RingSide::boundary;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
      if (p.lon < x) inside = !inside;
    }
  }
  return inside ? RingSide::inside : RingSide::outside;
}

CountyShape::CountyShape(Fips fips, std::string name, std::vector<Polygon> polygons)
    : fips_(std::move(fips)), name_(std::move(name)), polygons_(std::move(polygons)) {
  const std::string what = "county " + fips_.str();
  if (polygons_.empty()) throw data_error(what + ": no polygons");
  constexpr double inf = std::numeric_limits<double>::infinity();
  bbox_ = {inf, inf, -inf, -inf};
  for (const auto& poly : polygons_) {
    check_ring(poly.outer, what);
    for (const auto& p : poly.outer) {
      bbox_.min_lon = std::min(bbox_.min_lon, p.lon);
      bbox_.min_lat = std::min(bbox_.min_lat, p.lat);
      bbox_.max_lon = std::max(bbox_.max_lon, p.lon);
      bbox_.max_lat = std::max(bbox_.max_lat, p.lat);
    }
    for (const auto& hole : poly.holes) {
      check_ring(hole, what + " hole");
      for (const auto& p : hole)
        if (classify(poly.outer, p) == RingSide::outside)
          throw data_error(what + ": hole lies outside its outer ring");
    }
  }
}

bool CountyShape::contains(const GeoPoint& p) const {
  if (!bbox_.covers(p)) return false;
  for (const auto& poly : polygons_) {
    if (classify(poly.outer, p) == RingSide::outside) continue;
    bool in_hole = false;
    for (const auto& hole : poly.holes) {
      if (classify(hole, p) == RingSide::inside) {
        in_hole = true;
        break;
      }
    }
    if (!in_hole) return true;
  }
  return false;
}

SpatialIndex::SpatialIndex(std::vector<CountyShape> shapes, std::size_t target_per_cell)
    : shapes_(std::move(shapes)) {
  if (shapes_.empty()) return;
  constexpr double inf = std::numeric_limits<double>::infinity();
  extent_ = {inf, inf, -inf, -inf};
  for (const auto& s : shapes_) {
    extent_.min_lon = std::min(extent_.min_lon, s.bbox().min_lon);
    extent_.min_lat = std::min(extent_.min_lat, s.bbox().min_lat);
    extent_.max_lon = std::max(extent_.max_lon, s.bbox().max_lon);
    extent_.max_lat = std::max(extent_.max_lat, s.bbox().max_lat);
  }
  double w = std::max(extent_.max_lon - extent_.min_lon, 1e-9);
  double h = std::max(extent_.max_lat - extent_.min_lat, 1e-9);
  double n_cells = std::clamp(
      static_cast<double>(shapes_.size()) / static_cast<double>(std::max<std::size_t>(target_per_cell, 1)) * 4.0,
      1.0, 1048576.0);
  cols_ = static_cast<std::size_t>(std::max(1.0, std::ceil(std::sqrt(n_cells * w / h))));
  rows_ = static_cast<std::size_t>(std::max(1.0, std::ceil(n_cells / static_cast<double>(cols_))));
  cols_ = std::min<std::size_t>(cols_, 4096);
  rows_ = std::min<std::size_t>(rows_, 4096);
  cell_w_ = w / static_cast<double>(cols_);
  cell_h_ = h / static_cast<double>(rows_);
  cells_.assign(cols_ * rows_, {});
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const auto& b = shapes_[i].bbox();
    std::size_t c0 = cell_of(b.min_lon, extent_.min_lon, cell_w_, cols_);
    std::size_t c1 = cell_of(b.max_lon, extent_.min_lon, cell_w_, cols_);
    std::size_t r0 = cell_of(b.min_lat, extent_.min_lat, cell_h_, rows_);
    std::size_t r1 = cell_of(b.max_lat, extent_.min_lat, cell_h_, rows_);
    for (std::size_t r = r0; r <= r1; ++r)
      for (std::size_t c = c0; c <= c1; ++c) cells_[r * cols_ + c].push_back(i);
  }
}

std::size_t SpatialIndex::cell_of(double v, double lo, double step, std::size_t n) const {
  double k = std::floor((v - lo) / step);
  if (k < 0) return 0;
  auto idx = static_cast<std::size_t>(k);
  return std::min(idx, n - 1);
}

std::vector<std::size_t> SpatialIndex::candidates(const GeoPoint& p) const {
  if (cells_.empty() || !extent_.covers(p)) return {};
  std::size_t c = cell_of(p.lon, extent_.min_lon, cell_w_, cols_);
  std::size_t r = cell_of(p.lat, extent_.min_lat, cell_h_, rows_);
  return cells_[r * cols_ + c];
}

namespace {

std::optional<Fips> smallest_containing(const GeoPoint& p, std::span<const CountyShape> shapes,
                                        const std::vector<std::size_t>* subset) {
  std::optional<Fips> best;
  auto consider = [&](const CountyShape& s) {
    if (best && !(s.fips() < *best)) return;
    if (s.contains(p)) best = s.fips();
  };
  if (subset)
    for (std::size_t i : *subset) consider(shapes[i]);
  else
    for (const auto& s : shapes) consider(s);
  return best;
}

void require_valid(const GeoPoint& p) {
  if (!is_valid(p)) throw data_error(fmt::format("invalid point ({}, {})", p.lon, p.lat));
}

}  // namespace

std::optional<Fips> assign_county(const GeoPoint& p, const SpatialIndex& index) {
  require_valid(p);
  auto cand = index.candidates(p);
  return smallest_containing(p, index.shapes(), &cand);
}

std::optional<Fips> assign_county_exhaustive(const GeoPoint& p,
                                             std::span<const CountyShape> shapes) {
  require_valid(p);
  return smallest_containing(p, shapes, nullptr);
}

namespace {

using nlohmann::json;

Ring parse_ring(const json& coords, const std::string& what) {
  if (!coords.is_array()) throw data_error(what + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw data_error(what + ": bad coordinate");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

Polygon parse_polygon(const json& rings, const std::string& what) {
  if (!rings.is_array() || rings.empty()) throw data_error(what + ": empty polygon");
  Polygon poly;
  poly.outer = parse_ring(rings[0], what);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i], what));
  return poly;
}

}  // namespace

ShapeSet parse_shapes(std::string_view geojson) {
  json doc;
  try {
    doc = json::parse(geojson);
  } catch (const json::parse_error& e) {
    throw data_error(std::string("boundary file: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw data_error("boundary file: expected a FeatureCollection");
  const auto& features = doc["features"];
  if (features.empty()) throw data_error("boundary file: feature collection is empty");

  std::map<Fips, std::pair<std::string, std::vector<Polygon>>> merged;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    std::string what = fmt::format("feature {}", i);
    const json props = f.contains("properties") && f["properties"].is_object()
                           ? f["properties"] : json::object();
    std::string code;
    for (const char* key : {"fips", "GEOID", "FIPS", "geoid"}) {
      if (props.contains(key) && props[key].is_string()) {
        code = props[key].get<std::string>();
        break;
      }
    }
    if (code.empty()) throw data_error(what + ": missing fips/GEOID property");
    auto fips = Fips::parse(code);
    if (!fips) throw data_error(what + ": malformed FIPS '" + code + "'");
    what += " (" + fips->str() + ")";
    std::string name;
    for (const char* key : {"NAME", "name"})
      if (props.contains(key) && props[key].is_string()) {
        name = props[key].get<std::string>();
        break;
      }

    if (!f.contains("geometry") || !f["geometry"].is_object())
      throw data_error(what + ": missing geometry");
    const auto& g = f["geometry"];
    std::string type = g.value("type", "");
    if (!g.contains("coordinates")) throw data_error(what + ": missing coordinates");
    auto& slot = merged[*fips];
    if (slot.first.empty()) slot.first = name;
    if (type == "Polygon") {
      slot.second.push_back(parse_polygon(g["coordinates"], what));
    } else if (type == "MultiPolygon") {
      if (!g["coordinates"].is_array()) throw data_error(what + ": bad MultiPolygon");
      for (const auto& p : g["coordinates"]) slot.second.push_back(parse_polygon(p, what));
    } else {
      throw data_error(what + ": unsupported geometry '" + type + "'");
    }
  }

  ShapeSet out;
  std::vector<CountyShape> shapes;
  shapes.reserve(merged.size());
  for (auto& [fips, entry] : merged) {
    out.registry.add(fips, entry.first);
    shapes.emplace_back(fips, std::move(entry.first), std::move(entry.second));
  }
  out.index = SpatialIndex(std::move(shapes));
  return out;
}

ShapeSet load_shapes(const std::string& path) { return parse_shapes(read_file(path)); }

}  // namespace foodgap
