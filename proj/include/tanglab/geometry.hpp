#ifndef TANGLAB_GEOMETRY_HPP
#define TANGLAB_GEOMETRY_HPP

#include "tanglab/rational.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace tanglab {

template <class S> struct Point2 {
    S x{}, y{};
};

template <class S> struct Point4 {
    S xu{}, yu{}, xs{}, ys{};
    Point2<S> uv() const { return {xu, yu}; }
    Point2<S> sv() const { return {xs, ys}; }
};

// Closed interval [lo, hi].  All paper boxes are closed products of closed
// intervals, so boundary membership is inclusive throughout.
template <class S> struct Interval {
    S lo{}, hi{};

    S length() const { return hi - lo; }
    S mid() const { return (lo + hi) / S(2); }
    bool valid() const { return lo <= hi; }
    bool contains(const S& x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    // strict interior containment, exact in rational mode
    bool contains_interior(const Interval& o) const { return lo < o.lo && o.hi < hi; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

    Interval shifted(const S& d) const { return {lo + d, hi + d}; }

    static Interval hull(const Interval& a, const Interval& b) {
        return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
    static std::optional<Interval> intersection(const Interval& a, const Interval& b) {
        S lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
        if (lo > hi) return std::nullopt;
        return Interval{lo, hi};
    }
};

template <class S> struct Box2 {
    Interval<S> x, y;

    // P and Q are the coordinate projections used throughout the box calculus.
    const Interval<S>& P() const { return x; }
    const Interval<S>& Q() const { return y; }

    bool contains(const Point2<S>& p) const { return x.contains(p.x) && y.contains(p.y); }
    bool intersects(const Box2& o) const { return x.intersects(o.x) && y.intersects(o.y); }
    // box norm: the max side length
    S norm() const { return std::max(x.length(), y.length()); }
    Point2<S> center() const { return {x.mid(), y.mid()}; }
    Box2 shifted(const Point2<S>& d) const { return {x.shifted(d.x), y.shifted(d.y)}; }
};

template <class S> struct Box4 {
    Interval<S> xu, yu, xs, ys;

    bool contains(const Point4<S>& p) const {
        return xu.contains(p.xu) && yu.contains(p.yu) && xs.contains(p.xs) && ys.contains(p.ys);
    }
    bool intersects(const Box4& o) const {
        return xu.intersects(o.xu) && yu.intersects(o.yu) && xs.intersects(o.xs) &&
               ys.intersects(o.ys);
    }
    Point4<S> center() const { return {xu.mid(), yu.mid(), xs.mid(), ys.mid()}; }
    Box2<S> u_plane() const { return {xu, yu}; }
    Box2<S> s_plane() const { return {xs, ys}; }
    S norm() const {
        return std::max(std::max(xu.length(), yu.length()), std::max(xs.length(), ys.length()));
    }
};

// 1D affine map t -> m*t + b; the box calculus composes these exactly.
template <class S> struct Affine1 {
    S m{1}, b{0};

    S operator()(const S& t) const { return m * t + b; }
    Interval<S> operator()(const Interval<S>& iv) const {
        S a = m * iv.lo + b, c = m * iv.hi + b;
        return a <= c ? Interval<S>{a, c} : Interval<S>{c, a};
    }
    Affine1 after(const Affine1& inner) const { return {m * inner.m, m * inner.b + b}; }
    Affine1 inverse() const { return {S(1) / m, -b / m}; }
};

// Pair of 1D affine maps acting independently on the two plane coordinates.
template <class S> struct Affine2 {
    Affine1<S> x, y;

    Point2<S> operator()(const Point2<S>& p) const { return {x(p.x), y(p.y)}; }
    Box2<S> operator()(const Box2<S>& b) const { return {x(b.x), y(b.y)}; }
    Affine2 after(const Affine2& inner) const { return {x.after(inner.x), y.after(inner.y)}; }
    Affine2 inverse() const { return {x.inverse(), y.inverse()}; }
};

template <class S>
inline Box2<S> square(const S& lo, const S& hi) { return {{lo, hi}, {lo, hi}}; }

template <class S>
inline Box2<double> to_double_box(const Box2<S>& b) {
    return {{to_double(b.x.lo), to_double(b.x.hi)}, {to_double(b.y.lo), to_double(b.y.hi)}};
}

} // namespace tanglab

#endif
