#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "suptask/errors.hpp"
#include "suptask/rng.hpp"
#include "suptask/typology.hpp"

using namespace suptask;

namespace {

AgeDistribution two_bands() {
    return AgeDistribution(
        {YearBand{"pre1978", 1800, 1978}, YearBand{"post1978", 1979, 2030}},
        {0.3, 0.7});
}

const char* kTypologyConfig =
    "# synthetic illustrative typology, values invented for tests\n"
    "[age_distribution]\n"
    "pre1978 = 1800 1978 0.3\n"
    "post1978 = 1979 2030 0.7\n"
    "[typology]\n"
    "SFH_OLD = DetachedSingle pre1978 120 1\n"
    "SFH_NEW = DetachedSingle post1978 140 1\n"
    "ROW_OLD = RowHouse pre1978 420 5\n"
    "ROW_NEW = RowHouse post1978 450 5\n"
    "BLOCK_OLD = PerimeterBlock pre1978 1600 24\n"
    "BLOCK_NEW = PerimeterBlock post1978 1800 24\n";

}  // namespace

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(AgeDistribution({YearBand{"a", 1900, 1950}}, {0.5}),
                    InvalidParams);  // weights must sum to 1
    CHECK_THROWS_AS(
        AgeDistribution({YearBand{"a", 1900, 1950}, YearBand{"b", 1940, 1990}},
                        {0.5, 0.5}),
        InvalidParams);  // overlapping bands
    CHECK_THROWS_AS(
        AgeDistribution({YearBand{"a", 1950, 1900}}, {1.0}),
        InvalidParams);  // lower > upper
}

TEST_CASE("single band distributions are constant") {
    const AgeDistribution dist({YearBand{"always", 1900, 2000}}, {1.0});
    for (std::uint64_t id = 0; id < 64; ++id) {
        CHECK(sample_year_band(dist, id, id * 31 + 7).label == "always");
    }
}

TEST_CASE("samples are deterministic per (seed, id) and order independent") {
    const AgeDistribution dist = two_bands();
    const std::uint64_t seed = 99;
    std::map<std::uint64_t, std::string> forward;
    for (std::uint64_t id = 0; id < 500; ++id) {
        forward[id] = sample_year_band(dist, id, seed).label;
    }
    for (std::uint64_t id = 500; id-- > 0;) {  // reversed iteration order
        CHECK(sample_year_band(dist, id, seed).label == forward[id]);
    }
    CHECK(sample_year_band(dist, 7, seed).label ==
          sample_year_band(dist, 7, seed).label);
}

TEST_CASE("empirical frequencies converge to the configured weights") {
    const AgeDistribution dist = two_bands();
    const int n = 100000;
    int pre = 0;
    for (int id = 0; id < n; ++id) {
        if (sample_year_band(dist, id, 4242).label == "pre1978") ++pre;
    }
    const double freq = static_cast<double>(pre) / n;
    CHECK(std::abs(freq - 0.3) < 0.01);
}

TEST_CASE("chi-squared goodness of fit across band counts") {
    // Critical values at significance 0.001 for df = 1..5.
    static constexpr double kCritical[5] = {10.828, 13.816, 16.266, 18.467,
                                            20.515};
    SplitMix64 rng(31337);
    for (int n_bands = 2; n_bands <= 6; ++n_bands) {
        std::vector<YearBand> bands;
        std::vector<double> weights;
        double remaining = 1.0;
        for (int b = 0; b < n_bands; ++b) {
            bands.push_back(YearBand{"band" + std::to_string(b),
                                     1800 + 40 * b, 1839 + 40 * b});
            double w = (b + 1 == n_bands)
                           ? remaining
                           : remaining * (0.2 + 0.5 * rng.next_double());
            weights.push_back(w);
            remaining -= w;
        }
        const AgeDistribution dist(bands, weights);
        const int n = 100000;
        std::vector<int> counts(n_bands, 0);
        for (int id = 0; id < n; ++id) {
            const std::string label =
                sample_year_band(dist, id, 777 + n_bands).label;
            for (int b = 0; b < n_bands; ++b) {
                if (bands[b].label == label) {
                    ++counts[b];
                    break;
                }
            }
        }
        double chi2 = 0.0;
        for (int b = 0; b < n_bands; ++b) {
            const double expected = weights[b] * n;
            if (expected == 0.0) continue;
            chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
        }
        CHECK(chi2 < kCritical[n_bands - 2]);
    }
}

TEST_CASE("assign_type is an exact lookup") {
    const Config cfg = Config::parse(kTypologyConfig);
    const TypologyTable table = typology_from_config(cfg);
    const AgeDistribution dist = age_distribution_from_config(cfg);

    const ResidentialBuildingType& row = assign_type(
        table, SizeClass::DetachedSingle, dist.bands()[0]);
    CHECK(row.type_id == "SFH_OLD");
    CHECK(row.reference_area_m2 == 120.0);
    CHECK(row.households == 1);

    CHECK_THROWS_AS(
        assign_type(table, SizeClass::RowHouse, YearBand{"missing", 0, 1}),
        MissingTypologyRow);
}

TEST_CASE("typology values come from the table alone") {
    const Config cfg_a = Config::parse(kTypologyConfig);
    std::string other = kTypologyConfig;
    const auto pos = other.find("120 1");
    other.replace(pos, 5, "150 2");
    const Config cfg_b = Config::parse(other);
    const TypologyTable table_a = typology_from_config(cfg_a);
    const TypologyTable table_b = typology_from_config(cfg_b);
    const YearBand band{"pre1978", 1800, 1978};
    CHECK(assign_type(table_a, SizeClass::DetachedSingle, band)
              .reference_area_m2 == 120.0);
    CHECK(assign_type(table_b, SizeClass::DetachedSingle, band)
              .reference_area_m2 == 150.0);
    CHECK(assign_type(table_b, SizeClass::DetachedSingle, band).households == 2);
}

TEST_CASE("typology config validation") {
    CHECK_THROWS_AS(typology_from_config(Config::parse("[typology]\n")),
                    InvalidParams);  // no age distribution
    // Unknown band reference.
    CHECK_THROWS_AS(
        typology_from_config(Config::parse(
            "[age_distribution]\na = 1900 1950 1.0\n"
            "[typology]\nX = RowHouse nosuchband 100 1\n")),
        ConfigError);
    // Duplicate (size class, band) pair.
    CHECK_THROWS_AS(
        typology_from_config(Config::parse(
            "[age_distribution]\na = 1900 1950 1.0\n"
            "[typology]\nX = RowHouse a 100 1\nY = RowHouse a 110 2\n")),
        InvalidParams);
    // Bad numbers.
    CHECK_THROWS_AS(
        typology_from_config(Config::parse(
            "[age_distribution]\na = 1900 1950 1.0\n"
            "[typology]\nX = RowHouse a -5 1\n")),
        InvalidParams);
    CHECK_THROWS_AS(
        typology_from_config(Config::parse(
            "[age_distribution]\na = 1900 1950 1.0\n"
            "[typology]\nX = RowHouse a 100 0\n")),
        InvalidParams);
}
