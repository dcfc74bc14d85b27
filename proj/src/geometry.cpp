#include "suptask/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

#include "cell_trace.hpp"
#include "suptask/errors.hpp"

namespace suptask {

namespace {

constexpr double kVertexEps = 1e-9;  // vertex deduplication, meters

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dot(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.x - o.x) + (a.y - o.y) * (b.y - o.y);
}

double dist2(const Point& a, const Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

double ring_signed_area(const Ring& r) {
    double a2 = 0.0;
    for (std::size_t i = 0, n = r.size(); i < n; ++i) {
        const Point& p = r[i];
        const Point& q = r[(i + 1) % n];
        a2 += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a2;
}

double ring_length(const Ring& r) {
    double len = 0.0;
    for (std::size_t i = 0, n = r.size(); i < n; ++i) {
        len += std::sqrt(dist2(r[i], r[(i + 1) % r.size()]));
    }
    return len;
}

Ring dedup_ring(Ring r) {
    Ring out;
    out.reserve(r.size());
    for (const Point& p : r) {
        if (out.empty() || dist2(out.back(), p) > kVertexEps * kVertexEps) {
            out.push_back(p);
        }
    }
    while (out.size() > 1 &&
           dist2(out.front(), out.back()) <= kVertexEps * kVertexEps) {
        out.pop_back();
    }
    return out;
}

bool points_equal(const Point& a, const Point& b) {
    return a.x == b.x && a.y == b.y;
}

// Rejects proper edge crossings and collinear overlaps within one ring.
// Edges may share endpoints (adjacent edges, pinch vertices) as long as
// they do not run back over each other.
void check_ring_simple(const Ring& r, const char* what) {
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a1 = r[i];
        const Point& a2 = r[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point& b1 = r[j];
            const Point& b2 = r[(j + 1) % n];
            // Shared endpoints: only check for a collinear fold-back.
            int shared = 0;
            Point s{}, ea{}, eb{};
            if (points_equal(a1, b1)) { ++shared; s = a1; ea = a2; eb = b2; }
            if (points_equal(a1, b2)) { ++shared; s = a1; ea = a2; eb = b1; }
            if (points_equal(a2, b1)) { ++shared; s = a2; ea = a1; eb = b2; }
            if (points_equal(a2, b2)) { ++shared; s = a2; ea = a1; eb = b1; }
            if (shared > 0) {
                if (shared >= 2) {
                    throw InvalidPolygon(std::string(what) +
                                         " ring has a doubled edge");
                }
                if (cross(s, ea, eb) == 0.0 && dot(s, ea, eb) > 0.0) {
                    throw InvalidPolygon(std::string(what) +
                                         " ring folds back over itself");
                }
                continue;
            }
            const double d1 = cross(b1, b2, a1);
            const double d2 = cross(b1, b2, a2);
            const double d3 = cross(a1, a2, b1);
            const double d4 = cross(a1, a2, b2);
            if (((d1 > 0) != (d2 > 0)) && d1 != 0 && d2 != 0 &&
                ((d3 > 0) != (d4 > 0)) && d3 != 0 && d4 != 0) {
                throw InvalidPolygon(std::string(what) +
                                     " ring is self-intersecting");
            }
            if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0) {
                // Collinear edges: reject any positive-length overlap.
                // Project onto the dominant axis of the shared line.
                const bool use_x =
                    std::abs(a2.x - a1.x) >= std::abs(a2.y - a1.y);
                auto coord = [use_x](const Point& p) { return use_x ? p.x : p.y; };
                const double lo_a = std::min(coord(a1), coord(a2));
                const double hi_a = std::max(coord(a1), coord(a2));
                const double lo_b = std::min(coord(b1), coord(b2));
                const double hi_b = std::max(coord(b1), coord(b2));
                if (std::min(hi_a, hi_b) > std::max(lo_a, lo_b)) {
                    throw InvalidPolygon(std::string(what) +
                                         " ring has overlapping edges");
                }
            } else {
                // T-touch: a vertex in the interior of another edge.
                auto on_segment = [](const Point& p, const Point& q, const Point& x) {
                    return cross(p, q, x) == 0.0 && dot(x, p, q) < 0.0;
                };
                if (on_segment(b1, b2, a1) || on_segment(b1, b2, a2) ||
                    on_segment(a1, a2, b1) || on_segment(a1, a2, b2)) {
                    throw InvalidPolygon(std::string(what) +
                                         " ring touches its own edge");
                }
            }
        }
    }
}

Ring normalize_ring(Ring r, bool want_ccw, const char* what) {
    for (const Point& p : r) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidPolygon(std::string(what) +
                                 " ring has non-finite coordinates");
        }
    }
    r = dedup_ring(std::move(r));
    if (r.size() < 3) {
        throw InvalidPolygon(std::string(what) +
                             " ring has fewer than 3 distinct vertices");
    }
    const double a = ring_signed_area(r);
    if (a == 0.0) {
        throw InvalidPolygon(std::string(what) + " ring has zero area");
    }
    if ((a > 0.0) != want_ccw) {
        std::reverse(r.begin(), r.end());
    }
    check_ring_simple(r, what);
    return r;
}

bool ray_crosses(const Point& pt, const Ring& ring) {
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& pi = ring[i];
        const Point& pj = ring[j];
        if (((pi.y > pt.y) != (pj.y > pt.y)) &&
            (pt.x < (pj.x - pi.x) * (pt.y - pi.y) / (pj.y - pi.y) + pi.x)) {
            inside = !inside;
        }
    }
    return inside;
}

double segment_distance2(const Point& a1, const Point& a2, const Point& b1,
                         const Point& b2);

double point_segment_distance2(const Point& p, const Point& a, const Point& b) {
    const double l2 = dist2(a, b);
    if (l2 == 0.0) return dist2(p, a);
    double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / l2;
    t = std::clamp(t, 0.0, 1.0);
    const Point proj{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    return dist2(p, proj);
}

double segment_distance2(const Point& a1, const Point& a2, const Point& b1,
                         const Point& b2) {
    const double d1 = cross(b1, b2, a1);
    const double d2 = cross(b1, b2, a2);
    const double d3 = cross(a1, a2, b1);
    const double d4 = cross(a1, a2, b2);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
    return std::min(std::min(point_segment_distance2(a1, b1, b2),
                             point_segment_distance2(a2, b1, b2)),
                    std::min(point_segment_distance2(b1, a1, a2),
                             point_segment_distance2(b2, a1, a2)));
}

}  // namespace

Polygon::Polygon(Ring exterior, std::vector<Ring> holes) {
    exterior_ = normalize_ring(std::move(exterior), /*want_ccw=*/true, "exterior");
    holes_.reserve(holes.size());
    for (Ring& h : holes) {
        holes_.push_back(normalize_ring(std::move(h), /*want_ccw=*/false, "hole"));
    }
}

double polygon_area(const Polygon& p) {
    double a = ring_signed_area(p.exterior());
    for (const Ring& h : p.holes()) a += ring_signed_area(h);  // holes are CW
    return std::max(a, 0.0);
}

double polygon_perimeter(const Polygon& p) {
    double len = ring_length(p.exterior());
    for (const Ring& h : p.holes()) len += ring_length(h);
    return len;
}

Point polygon_centroid(const Polygon& p) {
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    auto accumulate = [&](const Ring& r) {
        for (std::size_t i = 0, n = r.size(); i < n; ++i) {
            const Point& u = r[i];
            const Point& v = r[(i + 1) % n];
            const double c = u.x * v.y - v.x * u.y;
            a2 += c;
            cx += (u.x + v.x) * c;
            cy += (u.y + v.y) * c;
        }
    };
    accumulate(p.exterior());
    for (const Ring& h : p.holes()) accumulate(h);
    if (a2 == 0.0) {  // unreachable for constructible polygons
        throw DegenerateGeometry("polygon has zero area");
    }
    return Point{cx / (3.0 * a2), cy / (3.0 * a2)};
}

bool point_in_polygon(const Point& pt, const Polygon& p) {
    bool inside = ray_crosses(pt, p.exterior());
    for (const Ring& h : p.holes()) {
        if (ray_crosses(pt, h)) inside = !inside;
    }
    return inside;
}

Footprint make_footprint(std::uint64_t id, Polygon geometry,
                         FootprintSource source) {
    const double area = polygon_area(geometry);
    return Footprint{id, std::move(geometry), area, source};
}

std::vector<Point> convex_hull_points(std::span<const Point> points) {
    std::vector<Point> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) {
                              return points_equal(a, b);
                          }),
              pts.end());
    if (pts.size() < 3) {
        throw DegenerateGeometry("convex hull of fewer than 3 distinct points");
    }
    // Monotone chain; strict turns only, so collinear points are dropped.
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const Point& p : pts) {  // lower hull
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {  // upper hull
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        throw DegenerateGeometry("all points are collinear");
    }
    return hull;
}

Polygon convex_hull(const Polygon& p) {
    return Polygon(convex_hull_points(p.exterior()));
}

OrientedBBox oriented_bbox(const Polygon& p) {
    const std::vector<Point> hull = convex_hull_points(p.exterior());
    const std::size_t n = hull.size();
    double best_area = std::numeric_limits<double>::infinity();
    OrientedBBox best;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % n];
        const double len = std::sqrt(dist2(a, b));
        if (len == 0.0) continue;
        const double ux = (b.x - a.x) / len, uy = (b.y - a.y) / len;
        double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
        double min_v = min_u, max_v = -min_u;
        for (const Point& q : hull) {
            const double u = q.x * ux + q.y * uy;
            const double v = -q.x * uy + q.y * ux;
            min_u = std::min(min_u, u);
            max_u = std::max(max_u, u);
            min_v = std::min(min_v, v);
            max_v = std::max(max_v, v);
        }
        const double du = max_u - min_u, dv = max_v - min_v;
        const double area = du * dv;
        if (area < best_area) {
            best_area = area;
            double w = du, h = dv;
            double angle = std::atan2(uy, ux);
            if (h > w) {
                std::swap(w, h);
                angle += std::numbers::pi / 2.0;  // long axis is the normal
            }
            angle = std::fmod(angle, std::numbers::pi);
            if (angle < 0.0) angle += std::numbers::pi;
            if (angle >= std::numbers::pi) angle -= std::numbers::pi;
            best = OrientedBBox{w, h, angle};
        }
    }
    if (!std::isfinite(best_area)) {
        throw DegenerateGeometry("cannot fit an oriented box");
    }
    return best;
}

namespace {

// Max perpendicular distance from the chain interior to the anchor line;
// returns the index of the farthest vertex.
std::pair<double, std::size_t> farthest_from_line(const Ring& ring,
                                                  std::size_t i, std::size_t j) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    const double len = std::sqrt(dist2(a, b));
    double best = -1.0;
    std::size_t best_k = i;
    for (std::size_t k = i + 1; k < j; ++k) {
        double d;
        if (len == 0.0) {
            d = std::sqrt(dist2(ring[k], a));
        } else {
            d = std::abs(cross(a, b, ring[k])) / len;
        }
        if (d > best) {
            best = d;
            best_k = k;
        }
    }
    return {best, best_k};
}

// Douglas-Peucker on the open chain ring[first..last], keeping endpoints.
void dp_chain(const Ring& ring, std::size_t first, std::size_t last,
              double tolerance, std::vector<bool>& keep) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{first, last}};
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (j <= i + 1) continue;
        const auto [d, k] = farthest_from_line(ring, i, j);
        if (d > tolerance) {
            keep[k] = true;
            stack.push_back({i, k});
            stack.push_back({k, j});
        }
    }
}

// Closed-ring simplification: split at the diameter pair, simplify both
// chains. Returns an empty ring when the result degenerates.
Ring simplify_ring(const Ring& ring, double tolerance) {
    const std::size_t n = ring.size();
    std::size_t ia = 0, ib = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist2(ring[i], ring[j]);
            if (d > best) {
                best = d;
                ia = i;
                ib = j;
            }
        }
    }
    // Rotate so the ring starts at one anchor; the other lands at `split`.
    Ring rot(n);
    for (std::size_t i = 0; i < n; ++i) rot[i] = ring[(ia + i) % n];
    const std::size_t split = (ib + n - ia) % n;
    Ring closed = rot;
    closed.push_back(rot[0]);

    std::vector<bool> keep(closed.size(), false);
    keep[0] = keep[split] = true;
    dp_chain(closed, 0, split, tolerance, keep);
    dp_chain(closed, split, closed.size() - 1, tolerance, keep);

    Ring out;
    for (std::size_t i = 0; i + 1 < closed.size(); ++i) {
        if (keep[i]) out.push_back(closed[i]);
    }
    return out;
}

}  // namespace

Polygon simplify(const Polygon& p, double tolerance) {
    if (tolerance < 0.0 || !std::isfinite(tolerance)) {
        throw InvalidParams("simplify tolerance must be finite and >= 0");
    }
    if (tolerance == 0.0) return p;
    Ring ext = simplify_ring(p.exterior(), tolerance);
    if (ext.size() < 3) {
        throw InvalidPolygon("simplification collapsed the exterior ring");
    }
    std::vector<Ring> holes;
    for (const Ring& h : p.holes()) {
        Ring s = simplify_ring(h, tolerance);
        if (s.size() >= 3 && ring_signed_area(s) != 0.0) {
            holes.push_back(std::move(s));
        }
    }
    return Polygon(std::move(ext), std::move(holes));
}

double polygon_distance(const Polygon& a, const Polygon& b) {
    // Overlap/containment count as contact.
    if (point_in_polygon(a.exterior()[0], b) ||
        point_in_polygon(b.exterior()[0], a)) {
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    const Ring& ra = a.exterior();
    const Ring& rb = b.exterior();
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const Point& a1 = ra[i];
        const Point& a2 = ra[(i + 1) % ra.size()];
        for (std::size_t j = 0; j < rb.size(); ++j) {
            const Point& b1 = rb[j];
            const Point& b2 = rb[(j + 1) % rb.size()];
            best = std::min(best, segment_distance2(a1, a2, b1, b2));
            if (best == 0.0) return 0.0;
        }
    }
    return std::sqrt(best);
}

namespace {

bool ring_rectilinear(const Ring& r) {
    for (std::size_t i = 0, n = r.size(); i < n; ++i) {
        const Point& p = r[i];
        const Point& q = r[(i + 1) % n];
        if (std::abs(p.x - q.x) > kVertexEps && std::abs(p.y - q.y) > kVertexEps) {
            return false;
        }
    }
    return true;
}

bool polygon_rectilinear(const Polygon& p) {
    if (!ring_rectilinear(p.exterior())) return false;
    for (const Ring& h : p.holes()) {
        if (!ring_rectilinear(h)) return false;
    }
    return true;
}

void collect_coords(const Polygon& p, std::vector<double>& xs,
                    std::vector<double>& ys) {
    auto take = [&](const Ring& r) {
        for (const Point& q : r) {
            xs.push_back(q.x);
            ys.push_back(q.y);
        }
    };
    take(p.exterior());
    for (const Ring& h : p.holes()) take(h);
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > kVertexEps) out.push_back(x);
    }
    return out;
}

Polygon loops_to_polygon(const detail::CellLoops& loops,
                         const std::vector<double>& xs,
                         const std::vector<double>& ys) {
    if (loops.outer.size() != 1) {
        throw InvalidPolygon("footprint union is not a single connected region");
    }
    auto to_ring = [&](const detail::IndexRing& ir) {
        Ring r;
        r.reserve(ir.size());
        for (const auto& gp : ir) r.push_back(Point{xs[gp.c], ys[gp.r]});
        return r;
    };
    std::vector<Ring> holes;
    holes.reserve(loops.holes.size());
    for (const auto& h : loops.holes) holes.push_back(to_ring(h));
    return Polygon(to_ring(loops.outer[0]), std::move(holes));
}

// Exact union of rectilinear polygons on the non-uniform grid spanned by
// their vertex coordinates. Every member edge lies on a grid line, so each
// cell is entirely inside or outside each member.
Polygon union_rectilinear(const std::vector<const Polygon*>& members) {
    std::vector<double> xs, ys;
    for (const Polygon* m : members) collect_coords(*m, xs, ys);
    xs = sorted_unique(std::move(xs));
    ys = sorted_unique(std::move(ys));
    const int cols = static_cast<int>(xs.size()) - 1;
    const int rows = static_cast<int>(ys.size()) - 1;
    std::vector<char> covered(static_cast<std::size_t>(rows) * cols, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Point center{0.5 * (xs[c] + xs[c + 1]), 0.5 * (ys[r] + ys[r + 1])};
            for (const Polygon* m : members) {
                if (point_in_polygon(center, *m)) {
                    covered[static_cast<std::size_t>(r) * cols + c] = 1;
                    break;
                }
            }
        }
    }
    const auto loops = detail::trace_cells(
        rows, cols,
        [&](int r, int c) {
            return covered[static_cast<std::size_t>(r) * cols + c] != 0;
        },
        /*eight_connected=*/true);
    return loops_to_polygon(loops, xs, ys);
}

// Approximate union for non-rectilinear groups: rasterize onto a uniform
// grid and re-polygonize. Adequate for mask-derived shapes; the exact
// rectilinear path above handles the conservation-critical cases.
Polygon union_rasterized(const std::vector<const Polygon*>& members,
                         double gap_tolerance) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const Polygon* m : members) {
        for (const Point& q : m->exterior()) {
            min_x = std::min(min_x, q.x);
            max_x = std::max(max_x, q.x);
            min_y = std::min(min_y, q.y);
            max_y = std::max(max_y, q.y);
        }
    }
    const double span = std::max(max_x - min_x, max_y - min_y);
    double pitch = span / 512.0;
    if (gap_tolerance > 0.0) pitch = std::min(pitch, gap_tolerance / 4.0);
    pitch = std::max(pitch, span / 4096.0);  // cap the grid size
    const double margin = 2.0 * pitch + gap_tolerance;
    min_x -= margin;
    min_y -= margin;
    max_x += margin;
    max_y += margin;
    const int cols = static_cast<int>(std::ceil((max_x - min_x) / pitch));
    const int rows = static_cast<int>(std::ceil((max_y - min_y) / pitch));
    std::vector<char> covered(static_cast<std::size_t>(rows) * cols, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Point center{min_x + (c + 0.5) * pitch, min_y + (r + 0.5) * pitch};
            for (const Polygon* m : members) {
                if (point_in_polygon(center, *m)) {
                    covered[static_cast<std::size_t>(r) * cols + c] = 1;
                    break;
                }
            }
        }
    }
    if (gap_tolerance > 0.0) {
        // Morphological closing so gaps within tolerance fuse.
        const int radius = static_cast<int>(std::ceil(gap_tolerance / (2.0 * pitch))) + 1;
        auto pass = [&](const std::vector<char>& src, char grow) {
            std::vector<char> dst(src.size(), static_cast<char>(1 - grow));
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    if (src[static_cast<std::size_t>(r) * cols + c] != grow) continue;
                    for (int dr = -radius; dr <= radius; ++dr) {
                        for (int dc = -radius; dc <= radius; ++dc) {
                            const int rr = r + dr, cc = c + dc;
                            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
                            dst[static_cast<std::size_t>(rr) * cols + cc] = grow;
                        }
                    }
                }
            }
            return dst;
        };
        covered = pass(covered, 1);   // dilate
        covered = pass(covered, 0);   // erode
    }
    const auto loops = detail::trace_cells(
        rows, cols,
        [&](int r, int c) {
            return covered[static_cast<std::size_t>(r) * cols + c] != 0;
        },
        /*eight_connected=*/true);
    std::vector<double> xs(cols + 1), ys(rows + 1);
    for (int c = 0; c <= cols; ++c) xs[c] = min_x + c * pitch;
    for (int r = 0; r <= rows; ++r) ys[r] = min_y + r * pitch;
    return loops_to_polygon(loops, xs, ys);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct BBox {
    double min_x, min_y, max_x, max_y;
};

BBox bbox_of(const Polygon& p) {
    BBox b{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
    for (const Point& q : p.exterior()) {
        b.min_x = std::min(b.min_x, q.x);
        b.min_y = std::min(b.min_y, q.y);
        b.max_x = std::max(b.max_x, q.x);
        b.max_y = std::max(b.max_y, q.y);
    }
    return b;
}

bool bbox_near(const BBox& a, const BBox& b, double gap) {
    return a.min_x <= b.max_x + gap && b.min_x <= a.max_x + gap &&
           a.min_y <= b.max_y + gap && b.min_y <= a.max_y + gap;
}

}  // namespace

std::vector<Footprint> merge_contiguous(const std::vector<Footprint>& fps,
                                        double gap_tolerance) {
    if (gap_tolerance < 0.0 || !std::isfinite(gap_tolerance)) {
        throw InvalidParams("merge gap tolerance must be finite and >= 0");
    }
    const std::size_t n = fps.size();
    if (n == 0) return {};

    std::vector<BBox> boxes;
    boxes.reserve(n);
    for (const Footprint& fp : fps) boxes.push_back(bbox_of(fp.geometry));

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!bbox_near(boxes[i], boxes[j], gap_tolerance)) continue;
            if (polygon_distance(fps[i].geometry, fps[j].geometry) <=
                gap_tolerance) {
                uf.unite(i, j);
            }
        }
    }

    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

    std::vector<Footprint> out;
    out.reserve(n);
    for (const auto& group : groups) {
        if (group.empty()) continue;
        if (group.size() == 1) {
            out.push_back(fps[group[0]]);  // untouched, keeps exact area
            continue;
        }
        std::size_t lead = group[0];
        for (std::size_t idx : group) {
            if (fps[idx].id < fps[lead].id) lead = idx;
        }
        std::vector<const Polygon*> members;
        members.reserve(group.size());
        bool rectilinear = true;
        bool touching = true;
        for (std::size_t idx : group) {
            members.push_back(&fps[idx].geometry);
            rectilinear = rectilinear && polygon_rectilinear(fps[idx].geometry);
        }
        if (gap_tolerance > 0.0) {
            // With a positive tolerance members may not actually touch;
            // only the exact grid path requires contact.
            for (std::size_t a = 0; a < group.size() && touching; ++a) {
                double nearest = std::numeric_limits<double>::infinity();
                for (std::size_t b = 0; b < group.size(); ++b) {
                    if (a == b) continue;
                    nearest = std::min(nearest,
                                       polygon_distance(fps[group[a]].geometry,
                                                        fps[group[b]].geometry));
                }
                touching = touching && nearest == 0.0;
            }
        }
        Polygon merged = (rectilinear && touching)
                             ? union_rectilinear(members)
                             : union_rasterized(members, gap_tolerance);
        out.push_back(make_footprint(fps[lead].id, std::move(merged),
                                     fps[lead].source));
    }
    std::sort(out.begin(), out.end(), [](const Footprint& a, const Footprint& b) {
        return a.id < b.id;
    });
    return out;
}

}  // namespace suptask
