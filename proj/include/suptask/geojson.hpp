#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "suptask/geometry.hpp"

namespace suptask {

using PropertyValue = std::variant<std::string, double, bool>;
using PropertyMap = std::map<std::string, PropertyValue>;

// One GeoJSON feature: a Polygon (one part) or MultiPolygon (any number of
// parts) plus a flat properties map.
struct FeatureRecord {
    std::vector<Polygon> parts;
    bool multi = false;
    PropertyMap properties;
};

// Accepts a FeatureCollection of Polygon/MultiPolygon features. Rings must
// be explicitly closed in the file (first == last, dropped on load); ring
// orientation is normalized. Any other geometry type, nested property
// value, or malformed structure is rejected with the feature index.
std::vector<FeatureRecord> parse_geojson(const std::string& text);

// Deterministic emission: features in input order, properties in sorted
// key order, numbers with 17 significant digits, rings explicitly closed,
// no insignificant whitespace. emit(parse(emit(x))) == emit(x).
std::string emit_geojson(const std::vector<FeatureRecord>& records);

bool operator==(const FeatureRecord& a, const FeatureRecord& b);

}  // namespace suptask
