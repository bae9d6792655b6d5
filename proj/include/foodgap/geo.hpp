#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foodgap/util.hpp"
#include "foodgap/vocab.hpp"

namespace foodgap {

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

// Finite, in range, and not the (0, 0) "null island" placeholder.
bool is_valid(const GeoPoint& p);

// Closed ring: first point equals last, at least 4 points.
using Ring = std::vector<GeoPoint>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

struct BoundingBox {
  double min_lon, min_lat, max_lon, max_lat;
  bool covers(const GeoPoint& p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
  }
};

enum class RingSide { outside, boundary, inside };

// Even-odd crossing test with an explicit on-edge check.
RingSide classify(const Ring& ring, const GeoPoint& p);

class CountyShape {
 public:
  // Validates rings and computes the bounding box; throws on bad geometry.
  CountyShape(Fips fips, std::string name, std::vector<Polygon> polygons);

  const Fips& fips() const { return fips_; }
  const std::string& name() const { return name_; }
  const std::vector<Polygon>& polygons() const { return polygons_; }
  const BoundingBox& bbox() const { return bbox_; }

  // Inside some outer ring and not strictly inside one of its holes.
  // Boundary points count as inside.
  bool contains(const GeoPoint& p) const;

 private:
  Fips fips_;
  std::string name_;
  std::vector<Polygon> polygons_;
  BoundingBox bbox_;
};

// Uniform grid over shape bounding boxes.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<CountyShape> shapes, std::size_t target_per_cell = 4);

  const std::vector<CountyShape>& shapes() const { return shapes_; }
  // Indices of shapes whose bbox may cover p; superset of the true hits.
  std::vector<std::size_t> candidates(const GeoPoint& p) const;

 private:
  std::size_t cell_of(double v, double lo, double step, std::size_t n) const;

  std::vector<CountyShape> shapes_;
  BoundingBox extent_{0, 0, 0, 0};
  std::size_t cols_ = 0, rows_ = 0;
  double cell_w_ = 1.0, cell_h_ = 1.0;
  std::vector<std::vector<std::size_t>> cells_;
};

// FIPS of the containing county, smallest FIPS on shared boundaries.
// Throws data error for an invalid point.
std::optional<Fips> assign_county(const GeoPoint& p, const SpatialIndex& index);
std::optional<Fips> assign_county_exhaustive(const GeoPoint& p,
                                             std::span<const CountyShape> shapes);

struct ShapeSet {
  SpatialIndex index;
  CountyRegistry registry;
};

// GeoJSON FeatureCollection with a `fips` or `GEOID` string property and
// Polygon/MultiPolygon geometry. Features sharing a FIPS are merged.
ShapeSet load_shapes(const std::string& path);
ShapeSet parse_shapes(std::string_view geojson);

}  // namespace foodgap
