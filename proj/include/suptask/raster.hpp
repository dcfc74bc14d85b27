#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "suptask/geometry.hpp"

namespace suptask {

enum class Connectivity { Four, Eight };

// Georeferenced binary occupancy grid. origin_x/origin_y is the world
// position of the top-left corner of pixel (row 0, col 0); rows advance
// toward smaller y (north-up raster convention), columns toward larger x.
struct GeoGrid {
    int width = 0;            // pixels
    int height = 0;           // pixels
    double origin_x = 0.0;    // meters, top-left corner
    double origin_y = 0.0;    // meters, top-left corner
    double pixel_size = 1.0;  // meters per pixel, > 0, square pixels
    std::vector<std::uint8_t> data;  // row-major, 0/1

    bool at(int row, int col) const {
        return data[static_cast<std::size_t>(row) * width + col] != 0;
    }
    std::size_t occupied_count() const;
};

// Dense component labels, 0 = background, components numbered 1..count by
// the row-major position of their first pixel.
struct ComponentLabeling {
    std::vector<std::int32_t> labels;  // row-major, same shape as the grid
    std::int32_t count = 0;
    Connectivity connectivity = Connectivity::Eight;
};

// Parses the ASCII grid format:
//   width <int>
//   height <int>
//   origin_x <float>
//   origin_y <float>
//   pixel_size <float>
//   data
//   <height rows of width space-separated 0/1 tokens>
// '#' starts a comment line; UTF-8, LF line endings. Header keys may appear
// in any order, each exactly once; unknown keys are rejected.
GeoGrid parse_grid(const std::string& text);

// Deterministic emitter; parse_grid(emit_grid(g)) == g.
std::string emit_grid(const GeoGrid& g);

// Two-pass labeling with union-find.
ComponentLabeling connected_components(const GeoGrid& g, Connectivity conn);

struct PixelBox {
    int r0 = 0, c0 = 0, r1 = -1, c1 = -1;  // inclusive; r1 < r0 means empty
};

// Bounding boxes of all components in one scan, indexed by component - 1.
std::vector<PixelBox> component_bounds(const GeoGrid& g,
                                       const ComponentLabeling& labeling);

// Boundary of one component as a world-coordinate polygon, vertices on
// pixel corners, holes included. Area equals pixel count times
// pixel_size^2 (exactly so when pixel_size is a binary fraction).
Polygon polygonize(const GeoGrid& g, const ComponentLabeling& labeling,
                   std::int32_t component);
Polygon polygonize(const GeoGrid& g, const ComponentLabeling& labeling,
                   std::int32_t component, const PixelBox& bounds);

}  // namespace suptask
