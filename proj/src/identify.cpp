#include "suptask/identify.hpp"

#include <string>

#include "suptask/errors.hpp"
#include "suptask/geojson.hpp"

namespace suptask {

std::vector<Footprint> identify_buildings(const GeoGrid& g,
                                          const IdentificationConfig& cfg) {
    if (cfg.min_area_m2 < 0.0 || cfg.merge_gap_m < 0.0 ||
        (cfg.simplify_tolerance_m && *cfg.simplify_tolerance_m < 0.0)) {
        throw InvalidParams("identification thresholds must be >= 0");
    }
    const ComponentLabeling labeling =
        connected_components(g, cfg.connectivity);
    const std::vector<PixelBox> bounds = component_bounds(g, labeling);
    const double tolerance = cfg.resolved_tolerance(g.pixel_size);

    std::vector<Footprint> fps;
    fps.reserve(labeling.count);
    for (std::int32_t comp = 1; comp <= labeling.count; ++comp) {
        Polygon poly = polygonize(g, labeling, comp, bounds[comp - 1]);
        if (tolerance > 0.0) poly = simplify(poly, tolerance);
        Footprint fp = make_footprint(static_cast<std::uint64_t>(comp),
                                      std::move(poly),
                                      FootprintSource::MaskDerived);
        if (fp.area_m2 < cfg.min_area_m2) continue;  // shed / garage proxy
        fps.push_back(std::move(fp));
    }
    return merge_contiguous(fps, cfg.merge_gap_m);
}

std::vector<Footprint> import_footprints(const std::string& geojson_text) {
    const std::vector<FeatureRecord> records = parse_geojson(geojson_text);
    std::vector<Footprint> fps;
    std::uint64_t next_id = 1;
    for (const FeatureRecord& rec : records) {
        for (const Polygon& part : rec.parts) {
            fps.push_back(
                make_footprint(next_id++, part, FootprintSource::Imported));
        }
    }
    return fps;
}

}  // namespace suptask
