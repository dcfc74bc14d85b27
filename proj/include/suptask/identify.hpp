#pragma once

#include <optional>
#include <vector>

#include "suptask/geometry.hpp"
#include "suptask/raster.hpp"

namespace suptask {

// Stage-1 knobs. The minimum area stands in for the segmentation model's
// learned exclusion of garages and garden sheds.
struct IdentificationConfig {
    double min_area_m2 = 25.0;
    // Defaults to 0.5 * pixel_size when unset.
    std::optional<double> simplify_tolerance_m;
    Connectivity connectivity = Connectivity::Eight;
    double merge_gap_m = 0.0;

    double resolved_tolerance(double pixel_size) const {
        return simplify_tolerance_m.value_or(0.5 * pixel_size);
    }
};

// Mask -> cleaned building footprints:
// label components, polygonize each, simplify, drop areas below the
// threshold, merge contiguous footprints. Ids are component numbers in
// scan order, assigned before filtering and merging; output is sorted by
// id. Deterministic for a given grid and config.
std::vector<Footprint> identify_buildings(const GeoGrid& g,
                                          const IdentificationConfig& cfg);

// GeoJSON FeatureCollection -> footprints, one per polygon part,
// ids 1..n in (feature, part) order, source = Imported.
std::vector<Footprint> import_footprints(const std::string& geojson_text);

}  // namespace suptask
