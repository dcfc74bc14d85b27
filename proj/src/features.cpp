#include "suptask/features.hpp"

#include <cmath>
#include <numbers>

#include "suptask/errors.hpp"

namespace suptask {

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "area_m2",    "perimeter_m",    "convexity",
        "elongation", "rectangularity", "compactness"};
    return names;
}

GeometryFeatures extract_features(const Footprint& fp) {
    const Polygon& poly = fp.geometry;
    GeometryFeatures f;
    f.area_m2 = polygon_area(poly);
    f.perimeter_m = polygon_perimeter(poly);
    if (f.area_m2 <= 0.0 || f.perimeter_m <= 0.0) {
        throw DegenerateGeometry("footprint has no area or perimeter");
    }
    const Polygon hull = convex_hull(poly);
    const double hull_area = polygon_area(hull);
    if (hull_area <= 0.0) {
        throw DegenerateGeometry("hull has no area");
    }
    f.convexity = f.area_m2 / hull_area;
    const OrientedBBox obb = oriented_bbox(poly);
    if (obb.height <= 0.0) {
        throw DegenerateGeometry("oriented box has no height");
    }
    f.elongation = obb.width / obb.height;
    f.rectangularity = f.area_m2 / (obb.width * obb.height);
    f.compactness =
        4.0 * std::numbers::pi * f.area_m2 / (f.perimeter_m * f.perimeter_m);
    return f;
}

}  // namespace suptask
