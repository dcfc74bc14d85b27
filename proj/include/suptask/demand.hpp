#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "suptask/geometry.hpp"
#include "suptask/typology.hpp"

namespace suptask {

struct DemandParams {
    double household_annual_kwh = 0.0;  // statistical average, > 0
};

// Per-building result with its derivation inputs.
struct BuildingDemand {
    std::uint64_t footprint_id = 0;
    double area_m2 = 0.0;            // identified building area
    std::string type_id;
    double reference_area_m2 = 0.0;  // reference type area
    int households = 1;              // reference type household count
    double annual_kwh = 0.0;
};

// annual = (area / reference_area) * households * household_annual_kwh.
// Linear in the building area and in the per-household value.
double building_demand(double area_m2, const ResidentialBuildingType& rbt,
                       const DemandParams& params);

BuildingDemand make_building_demand(std::uint64_t footprint_id, double area_m2,
                                    const ResidentialBuildingType& rbt,
                                    const DemandParams& params);

// Aggregation polygon, e.g. a postal-code area.
struct Zone {
    std::string zone_id;
    Polygon geometry;
};

struct ZoneDemand {
    std::string zone_id;
    std::size_t building_count = 0;
    double total_kwh = 0.0;
};

struct ZoneAggregation {
    std::vector<ZoneDemand> zones;  // ascending zone_id
    ZoneDemand unassigned;          // buildings whose centroid hits no zone
};

// Assigns each building to the zone containing its footprint centroid
// (ray casting); overlapping zones resolve to the lexicographically lowest
// zone_id. Totals accumulate in ascending footprint-id order, so the sum
// of zone totals plus the unassigned bucket reproduces the grouped sum of
// building demands bit for bit.
ZoneAggregation aggregate_by_zone(const std::vector<BuildingDemand>& demands,
                                  const std::vector<Footprint>& footprints,
                                  const std::vector<Zone>& zones);

struct ZoneDeviation {
    std::string zone_id;
    double reference_kwh = 0.0;
    double presented_kwh = 0.0;
    // (reference - presented) / reference; unset when reference == 0.
    std::optional<double> deviation;
};

struct DeviationReport {
    std::vector<ZoneDeviation> zones;  // joined zones, ascending zone_id
    std::optional<double> overall_deviation;
    std::vector<std::string> missing_in_presented;
    std::vector<std::string> missing_in_reference;
};

// Joins on zone_id. Sign convention: presented below reference gives a
// positive deviation. Zones with a zero reference are reported without a
// deviation value; zones missing on either side are listed, not dropped.
DeviationReport compare_to_reference(
    const std::vector<ZoneDemand>& presented,
    const std::vector<std::pair<std::string, double>>& reference);

}  // namespace suptask
