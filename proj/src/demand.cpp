#include "suptask/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "suptask/errors.hpp"

namespace suptask {

double building_demand(double area_m2, const ResidentialBuildingType& rbt,
                       const DemandParams& params) {
    if (!(rbt.reference_area_m2 > 0.0) || !std::isfinite(rbt.reference_area_m2)) {
        throw InvalidParams("reference area must be > 0");
    }
    if (!(params.household_annual_kwh > 0.0) ||
        !std::isfinite(params.household_annual_kwh)) {
        throw InvalidParams("household_annual_kwh must be > 0");
    }
    if (area_m2 < 0.0 || !std::isfinite(area_m2)) {
        throw InvalidParams("building area must be finite and >= 0");
    }
    // Fixed evaluation order keeps the linearity identities exact.
    return ((area_m2 / rbt.reference_area_m2) * rbt.households) *
           params.household_annual_kwh;
}

BuildingDemand make_building_demand(std::uint64_t footprint_id, double area_m2,
                                    const ResidentialBuildingType& rbt,
                                    const DemandParams& params) {
    BuildingDemand d;
    d.footprint_id = footprint_id;
    d.area_m2 = area_m2;
    d.type_id = rbt.type_id;
    d.reference_area_m2 = rbt.reference_area_m2;
    d.households = rbt.households;
    d.annual_kwh = building_demand(area_m2, rbt, params);
    return d;
}

ZoneAggregation aggregate_by_zone(const std::vector<BuildingDemand>& demands,
                                  const std::vector<Footprint>& footprints,
                                  const std::vector<Zone>& zones) {
    std::map<std::uint64_t, const Footprint*> by_id;
    for (const Footprint& fp : footprints) by_id.emplace(fp.id, &fp);

    // Zone order is irrelevant to the caller: process in ascending zone_id,
    // which also realizes the overlap tie rule (first containing zone wins).
    std::vector<const Zone*> sorted_zones;
    sorted_zones.reserve(zones.size());
    for (const Zone& z : zones) sorted_zones.push_back(&z);
    std::sort(sorted_zones.begin(), sorted_zones.end(),
              [](const Zone* a, const Zone* b) { return a->zone_id < b->zone_id; });
    for (std::size_t i = 1; i < sorted_zones.size(); ++i) {
        if (sorted_zones[i]->zone_id == sorted_zones[i - 1]->zone_id) {
            throw InvalidParams("duplicate zone_id '" +
                                sorted_zones[i]->zone_id + "'");
        }
    }

    ZoneAggregation agg;
    agg.zones.reserve(sorted_zones.size());
    for (const Zone* z : sorted_zones) {
        agg.zones.push_back(ZoneDemand{z->zone_id, 0, 0.0});
    }
    agg.unassigned.zone_id = "unassigned";

    // Fixed summation order: ascending footprint id.
    std::vector<const BuildingDemand*> sorted_demands;
    sorted_demands.reserve(demands.size());
    for (const BuildingDemand& d : demands) sorted_demands.push_back(&d);
    std::sort(sorted_demands.begin(), sorted_demands.end(),
              [](const BuildingDemand* a, const BuildingDemand* b) {
                  return a->footprint_id < b->footprint_id;
              });

    for (const BuildingDemand* d : sorted_demands) {
        const auto it = by_id.find(d->footprint_id);
        if (it == by_id.end()) {
            throw UnknownFootprintId(d->footprint_id);
        }
        const Point centroid = polygon_centroid(it->second->geometry);
        ZoneDemand* target = &agg.unassigned;
        for (std::size_t z = 0; z < sorted_zones.size(); ++z) {
            if (point_in_polygon(centroid, sorted_zones[z]->geometry)) {
                target = &agg.zones[z];
                break;
            }
        }
        target->building_count += 1;
        target->total_kwh += d->annual_kwh;
    }
    return agg;
}

DeviationReport compare_to_reference(
    const std::vector<ZoneDemand>& presented,
    const std::vector<std::pair<std::string, double>>& reference) {
    std::map<std::string, double> pres;
    for (const ZoneDemand& z : presented) {
        if (!pres.emplace(z.zone_id, z.total_kwh).second) {
            throw InvalidParams("duplicate presented zone_id '" + z.zone_id + "'");
        }
    }
    std::map<std::string, double> ref;
    for (const auto& [zone_id, kwh] : reference) {
        if (!ref.emplace(zone_id, kwh).second) {
            throw InvalidParams("duplicate reference zone_id '" + zone_id + "'");
        }
    }

    DeviationReport report;
    double sum_ref = 0.0, sum_pres = 0.0;
    bool any_joined = false;
    for (const auto& [zone_id, ref_kwh] : ref) {
        const auto it = pres.find(zone_id);
        if (it == pres.end()) {
            report.missing_in_presented.push_back(zone_id);
            continue;
        }
        any_joined = true;
        ZoneDeviation zd;
        zd.zone_id = zone_id;
        zd.reference_kwh = ref_kwh;
        zd.presented_kwh = it->second;
        if (ref_kwh != 0.0) {
            zd.deviation = (ref_kwh - it->second) / ref_kwh;
        }
        sum_ref += ref_kwh;
        sum_pres += it->second;
        report.zones.push_back(std::move(zd));
    }
    for (const auto& [zone_id, kwh] : pres) {
        if (!ref.count(zone_id)) {
            report.missing_in_reference.push_back(zone_id);
        }
    }
    if (any_joined && sum_ref != 0.0) {
        report.overall_deviation = (sum_ref - sum_pres) / sum_ref;
    }
    return report;
}

}  // namespace suptask
