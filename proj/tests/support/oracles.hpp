#pragma once

// Independent reference implementations used as test oracles. These follow
// the documented contracts but share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "suptask/geometry.hpp"
#include "suptask/rng.hpp"

namespace testsupport {

using suptask::Point;
using suptask::Ring;

inline double tcross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double tdist2(const Point& a, const Point& b) {
    return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

// Gift-wrapping convex hull, CCW, collinear points dropped.
inline std::vector<Point> gift_wrap_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Point& a, const Point& b) {
                              return a.x == b.x && a.y == b.y;
                          }),
              pts.end());
    const std::size_t n = pts.size();
    std::vector<Point> hull;
    if (n < 3) return hull;
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (pts[i].y < pts[start].y ||
            (pts[i].y == pts[start].y && pts[i].x < pts[start].x)) {
            start = i;
        }
    }
    std::size_t cur = start;
    do {
        hull.push_back(pts[cur]);
        std::size_t next = (cur + 1) % n;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = tcross(pts[cur], pts[next], pts[i]);
            if (c < 0.0 ||
                (c == 0.0 && tdist2(pts[cur], pts[i]) > tdist2(pts[cur], pts[next]))) {
                next = i;
            }
        }
        cur = next;
    } while (cur != start && hull.size() <= n);
    return hull;
}

namespace detail {

inline void dp_keep(const std::vector<Point>& pts, std::size_t i,
                    std::size_t j, double tol, std::vector<bool>& keep) {
    if (j <= i + 1) return;
    double best = -1.0;
    std::size_t best_k = i;
    const double len = std::sqrt(tdist2(pts[i], pts[j]));
    for (std::size_t k = i + 1; k < j; ++k) {
        const double d = len == 0.0
                             ? std::sqrt(tdist2(pts[k], pts[i]))
                             : std::abs(tcross(pts[i], pts[j], pts[k])) / len;
        if (d > best) {
            best = d;
            best_k = k;
        }
    }
    if (best > tol) {
        keep[best_k] = true;
        dp_keep(pts, i, best_k, tol, keep);
        dp_keep(pts, best_k, j, tol, keep);
    }
}

}  // namespace detail

// Closed-ring Douglas-Peucker with the documented convention: split at the
// first diameter pair (lowest indices on ties), simplify both chains.
inline Ring reference_simplify(const Ring& ring, double tol) {
    const std::size_t n = ring.size();
    std::size_t ia = 0, ib = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (tdist2(ring[i], ring[j]) > best) {
                best = tdist2(ring[i], ring[j]);
                ia = i;
                ib = j;
            }
        }
    }
    std::vector<Point> closed;
    closed.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) closed.push_back(ring[(ia + i) % n]);
    const std::size_t split = (ib + n - ia) % n;
    std::vector<bool> keep(closed.size(), false);
    keep[0] = keep[split] = true;
    detail::dp_keep(closed, 0, split, tol, keep);
    detail::dp_keep(closed, split, closed.size() - 1, tol, keep);
    Ring out;
    for (std::size_t i = 0; i + 1 < closed.size(); ++i) {
        if (keep[i]) out.push_back(closed[i]);
    }
    return out;
}

// Simple star-shaped polygon: strictly increasing angles around the origin
// guarantee no self-intersection.
inline Ring random_star_polygon(suptask::SplitMix64& rng, int n_vertices,
                                double radius) {
    Ring ring;
    ring.reserve(n_vertices);
    const double tau = 2.0 * std::acos(-1.0);
    for (int i = 0; i < n_vertices; ++i) {
        const double base = tau * i / n_vertices;
        const double jitter = 0.35 * (tau / n_vertices) * (rng.next_double() - 0.5);
        const double r = radius * (0.35 + 0.65 * rng.next_double());
        ring.push_back(
            Point{r * std::cos(base + jitter), r * std::sin(base + jitter)});
    }
    return ring;
}

// Square with every edge replaced by an inward-jittered staircase; the four
// exact corners stay in the ring.
inline Ring staircase_square(double size, double step, double amplitude) {
    Ring ring;
    const int steps = static_cast<int>(std::round(size / step));
    auto add_edge = [&](Point from, Point dir, Point inward) {
        for (int i = 0; i < steps; ++i) {
            const double offset = (i % 2 == 1) ? amplitude : 0.0;
            ring.push_back(Point{from.x + dir.x * (i * step) + inward.x * offset,
                                 from.y + dir.y * (i * step) + inward.y * offset});
        }
    };
    add_edge({0, 0}, {1, 0}, {0, 1});
    add_edge({size, 0}, {0, 1}, {-1, 0});
    add_edge({size, size}, {-1, 0}, {0, -1});
    add_edge({0, size}, {0, -1}, {1, 0});
    return ring;
}

inline Ring rect_ring(double x0, double y0, double x1, double y1) {
    return Ring{Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}};
}

}  // namespace testsupport
