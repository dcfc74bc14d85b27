#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suptask/config.hpp"
#include "suptask/forest.hpp"

namespace suptask {

struct YearBand {
    std::string label;
    int lower = 0;  // year, inclusive
    int upper = 0;  // year, inclusive
};

inline bool operator==(const YearBand& a, const YearBand& b) {
    return a.label == b.label && a.lower == b.lower && a.upper == b.upper;
}

// Construction-year distribution for a region. Bands are disjoint, ordered
// by year, with non-negative weights summing to 1 (within 1e-9).
class AgeDistribution {
public:
    AgeDistribution(std::vector<YearBand> bands, std::vector<double> weights);

    const std::vector<YearBand>& bands() const { return bands_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<YearBand> bands_;
    std::vector<double> weights_;
};

// Reference building description for one (size class, year band) pair:
// floor area of the reference building and its household count.
struct ResidentialBuildingType {
    std::string type_id;
    SizeClass size_class = SizeClass::DetachedSingle;
    YearBand year_band;
    double reference_area_m2 = 0.0;  // > 0
    int households = 1;              // >= 1
};

// Lookup table over (size class, band label); at most one row per pair.
class TypologyTable {
public:
    explicit TypologyTable(std::vector<ResidentialBuildingType> rows);

    const std::vector<ResidentialBuildingType>& rows() const { return rows_; }
    const ResidentialBuildingType* find_by_type_id(const std::string& id) const;

private:
    std::vector<ResidentialBuildingType> rows_;
};

// Inverse-CDF draw from a per-building stream derived from (seed, id).
// The same (seed, id) always yields the same band, independent of call
// order, so parallel or incremental runs reproduce exactly.
const YearBand& sample_year_band(const AgeDistribution& dist,
                                 std::uint64_t building_id,
                                 std::uint64_t seed);

// Exact lookup; throws MissingTypologyRow naming the missing pair.
const ResidentialBuildingType& assign_type(const TypologyTable& table,
                                           SizeClass size_class,
                                           const YearBand& band);

// Config-file representation (see README): the [age_distribution] section
// maps band labels to "lower upper weight"; the [typology] section maps
// type ids to "size_class band_label reference_area households".
AgeDistribution age_distribution_from_config(const Config& cfg);
TypologyTable typology_from_config(const Config& cfg);

}  // namespace suptask
