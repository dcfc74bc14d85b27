#pragma once

#include <array>
#include <string>

#include "suptask/geometry.hpp"

namespace suptask {

inline constexpr int kFeatureCount = 6;

// Geometry descriptors feeding size-class classification. The vector order
// is fixed (index 0..5 as listed); the classifier depends on it.
struct GeometryFeatures {
    double area_m2 = 0.0;         // 0
    double perimeter_m = 0.0;     // 1, exterior plus hole rings
    double convexity = 0.0;       // 2, area / hull area, in (0, 1]
    double elongation = 0.0;      // 3, obb width / obb height, >= 1
    double rectangularity = 0.0;  // 4, area / obb area, in (0, 1]
    double compactness = 0.0;     // 5, 4*pi*area / perimeter^2, in (0, 1]

    std::array<double, kFeatureCount> to_array() const {
        return {area_m2, perimeter_m, convexity,
                elongation, rectangularity, compactness};
    }
};

// Canonical names, index-aligned with GeometryFeatures::to_array.
const std::array<std::string, kFeatureCount>& feature_names();

GeometryFeatures extract_features(const Footprint& fp);

}  // namespace suptask
