#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace suptask {

// All coordinates are meters in a projected planar CRS. No geodesic math.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
}

using Ring = std::vector<Point>;

// Simple polygon with optional holes.
//
// Storage conventions, enforced on construction:
//  - rings are stored open (first vertex not repeated at the end),
//  - the exterior ring is counter-clockwise, hole rings clockwise
//    (input rings with the wrong orientation are reversed, not rejected),
//  - consecutive vertices closer than 1e-9 m are deduplicated,
//  - every ring has at least 3 distinct vertices and nonzero area,
//  - no two ring edges cross properly and no edge overlaps another
//    collinearly. A ring may touch itself at isolated vertices; this is
//    required to represent mask components whose pixels meet only
//    diagonally (the boundary pinches through the shared corner).
class Polygon {
public:
    explicit Polygon(Ring exterior, std::vector<Ring> holes = {});

    const Ring& exterior() const { return exterior_; }
    const std::vector<Ring>& holes() const { return holes_; }

private:
    Ring exterior_;
    std::vector<Ring> holes_;
};

enum class FootprintSource { MaskDerived, Imported };

// A georeferenced building outline with a stable id.
struct Footprint {
    std::uint64_t id = 0;
    Polygon geometry;
    double area_m2 = 0.0;  // equals polygon_area(geometry) within 1e-9 relative
    FootprintSource source = FootprintSource::MaskDerived;
};

Footprint make_footprint(std::uint64_t id, Polygon geometry, FootprintSource source);

// Exterior area minus hole areas; >= 0 for any constructible Polygon.
double polygon_area(const Polygon& p);

// Exterior plus hole ring lengths.
double polygon_perimeter(const Polygon& p);

// Area-weighted centroid, holes taken into account.
Point polygon_centroid(const Polygon& p);

// Odd-even (ray casting) containment over all rings; points inside a hole
// are outside. Boundary points follow the half-open ray rule and are
// deterministic but not specified.
bool point_in_polygon(const Point& pt, const Polygon& p);

// Convex hull (monotone chain) of a point set, CCW, collinear boundary
// points removed. Throws DegenerateGeometry when all points are collinear.
std::vector<Point> convex_hull_points(std::span<const Point> points);

// Convex hull of the exterior vertices, as a Polygon.
Polygon convex_hull(const Polygon& p);

struct OrientedBBox {
    double width = 0.0;   // >= height
    double height = 0.0;
    double angle = 0.0;   // direction of the width axis, in [0, pi)
};

// Minimum-area rotated rectangle via rotating calipers on the hull.
OrientedBBox oriented_bbox(const Polygon& p);

// Douglas-Peucker on each ring. The ring is split at its diameter pair
// (two mutually farthest vertices) and each open chain is simplified
// independently. tolerance == 0 returns the input unchanged. Holes that
// collapse below 3 vertices are dropped; a collapsing exterior throws
// InvalidPolygon.
Polygon simplify(const Polygon& p, double tolerance);

// Footprints whose boundaries touch or lie within gap_tolerance of each
// other are unioned (union-find over pairwise adjacency, then a geometric
// union per group). The merged footprint takes the smallest member id and
// that member's source. Output is sorted by id.
std::vector<Footprint> merge_contiguous(const std::vector<Footprint>& fps,
                                        double gap_tolerance);

// Minimum distance between the boundaries of two polygons; 0 when they
// touch or overlap.
double polygon_distance(const Polygon& a, const Polygon& b);

}  // namespace suptask
