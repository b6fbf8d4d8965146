#ifndef SUPNORM_VEC2_HPP
#define SUPNORM_VEC2_HPP

#include <cmath>

namespace supnorm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }

inline Vec2 normalized(Vec2 v) {
    double n = norm(v);
    if (n == 0.0) return {0.0, 0.0};
    return {v.x / n, v.y / n};
}

// Euclidean distance from p to the segment [a,b].
inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 d = b - a;
    double l2 = norm2(d);
    if (l2 == 0.0) return norm(p - a);
    double t = dot(p - a, d) / l2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return norm(p - (a + t * d));
}

// True when segments [a,b] and [c,d] properly intersect or touch.
inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        if (v > 0) return 1;
        if (v < 0) return -1;
        return 0;
    };
    auto on_seg = [](Vec2 p, Vec2 q, Vec2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(a, b, c)) return true;
    if (o2 == 0 && on_seg(a, b, d)) return true;
    if (o3 == 0 && on_seg(c, d, a)) return true;
    if (o4 == 0 && on_seg(c, d, b)) return true;
    return false;
}

}  // namespace supnorm

#endif
