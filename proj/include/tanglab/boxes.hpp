#ifndef TANGLAB_BOXES_HPP
#define TANGLAB_BOXES_HPP

#include "tanglab/dynamics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tanglab {

// Finite word over {0,1} addressing cylinder boxes.
struct Code {
    std::vector<uint8_t> w;

    Code() = default;
    explicit Code(std::vector<uint8_t> v) : w(std::move(v)) {}
    static Code from_string(const std::string& s) {
        Code c;
        c.w.reserve(s.size());
        for (char ch : s) {
            if (ch != '0' && ch != '1') throw std::invalid_argument("Code: symbol not in {0,1}");
            c.w.push_back(ch == '1');
        }
        return c;
    }
    static Code run(uint8_t sym, size_t n) { return Code(std::vector<uint8_t>(n, sym)); }

    size_t size() const { return w.size(); }
    bool empty() const { return w.empty(); }
    uint8_t operator[](size_t i) const { return w[i]; }
    void push_back(uint8_t s) { w.push_back(s); }

    Code reversed() const { return Code(std::vector<uint8_t>(w.rbegin(), w.rend())); }
    Code operator+(const Code& o) const {
        Code c = *this;
        c.w.insert(c.w.end(), o.w.begin(), o.w.end());
        return c;
    }
    bool operator==(const Code& o) const { return w == o.w; }
    bool is_prefix_of(const Code& o) const {
        if (w.size() > o.w.size()) return false;
        return std::equal(w.begin(), w.end(), o.w.begin());
    }
    size_t count(uint8_t sym) const {
        size_t n = 0;
        for (auto s : w) n += (s == sym);
        return n;
    }
    std::string str() const {
        std::string s;
        s.reserve(w.size());
        for (auto b : w) s.push_back(b ? '1' : '0');
        return s;
    }
    // first position (1-based) where the two codes differ; 0 if one is a
    // prefix of the other and lengths are equal
    static size_t first_difference(const Code& a, const Code& b) {
        size_t n = std::min(a.size(), b.size());
        for (size_t i = 0; i < n; ++i)
            if (a[i] != b[i]) return i + 1;
        return a.size() == b.size() ? 0 : n + 1;
    }
};

struct EmptyCylinder : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RefinementFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Composed contracting branch chain phi_{w(1)} o ... o phi_{w(n)} (u-side)
// applied to the ambient square, and its psi analogue on the s-side.  The
// boxes are computed analytically; the dynamics is used only as a
// verification oracle in the tests.
template <class S>
Affine2<S> phi_chain(const Code& w, const Branches<S>& br) {
    Affine2<S> m; // identity
    for (size_t i = w.size(); i-- > 0;) m = br.phi[w[i]].after(m);
    // note: building inner-to-outer; phi_{w(1)} ends outermost
    return m;
}

template <class S>
Affine2<S> psi_chain(const Code& w, const Branches<S>& br) {
    Affine2<S> m;
    for (size_t i = w.size(); i-- > 0;) m = br.psi[w[i]].after(m);
    return m;
}

// Planar u-box B^u(w): the set of (x_u,y_u) whose forward f-itinerary starts
// with w.  Equal to phi_{w(1)}(...phi_{w(n)}([-2,2]^2)).
template <class S>
Box2<S> u_box(const Code& w, const Branches<S>& br) {
    return phi_chain(w, br)(br.ambient);
}

// g-cylinder rectangle S(w) in the s-plane (backward itinerary w).
template <class S>
Box2<S> s_cylinder(const Code& w, const Branches<S>& br) {
    return psi_chain(w, br)(br.ambient);
}

// Planar s-box B^s(w) = f_*(S(w)) (the projected image through the tangency).
template <class S>
Box2<S> s_box(const Code& w, const Branches<S>& br) {
    return br.fstar(s_cylinder(w, br));
}

template <class S>
Box4<S> u_box4(const Code& w, const Branches<S>& br) {
    Box2<S> b = u_box(w, br);
    return {b.x, b.y, br.ambient.x, br.ambient.y};
}

template <class S>
Box4<S> s_box4(const Code& w, const Branches<S>& br) {
    Box2<S> b = s_cylinder(w, br);
    return {br.ambient.x, br.ambient.y, b.x, b.y};
}

// B_*(w) = { x in B^u(w) : F^{|w|}(x) in V_* } = phi_w([-delta,delta]^2) x [-2,2]^2.
template <class S>
Box4<S> tangency_cylinder(const Code& w, const Branches<S>& br) {
    Box2<S> core = square<S>(-br.par.delta, br.par.delta);
    Box2<S> b = phi_chain(w, br)(core);
    Box2<S> full = u_box(w, br);
    // the cylinder is empty only for degenerate parameters (delta <= 0)
    if (!(br.par.delta > S(0)) || !full.x.contains(b.x) || !full.y.contains(b.y))
        throw EmptyCylinder("tangency_cylinder: image misses V_*");
    return {b.x, b.y, br.ambient.x, br.ambient.y};
}

template <class S>
Point4<S> tangency_center(const Code& w, const Branches<S>& br) {
    Point2<S> c = phi_chain(w, br)(Point2<S>{S(0), S(0)});
    return {c.x, c.y, S(0), S(0)};
}

// Center of the 4D u-box B^u(w) x [-2,2]^2; equals the tangency center.
template <class S>
Point4<S> u_box_center4(const Code& w, const Branches<S>& br) {
    Point2<S> c = phi_chain(w, br)(Point2<S>{S(0), S(0)});
    return {c.x, c.y, S(0), S(0)};
}

// ---- blender rectangles -------------------------------------------------
//
// A, R_i in the u-plane and At, Rt_i in the s-plane, with R_i = phi_i(A) and
// Rt_i = psi_i(At), so that f(R_i) spans A and the printed covering
// conditions hold.  Z and Zt are taken as A and At.
template <class S> struct BlenderFrames {
    Box2<S> A, At;
    Box2<S> R[2], Rt[2];
    Interval<S> P_overlap;  // P(R_0) cap P(R_1)
    Interval<S> Q_overlap;  // Q(Rt_0) cap Q(Rt_1)

    explicit BlenderFrames(const Branches<S>& br) {
        const auto& p = br.par;
        A = {{-p.a_cu + p.c, 1 - p.c}, {S(-2), S(2)}};
        At = {{S(-2), S(2)}, {-p.a_cs + p.c, 1 - p.c}};
        for (int i = 0; i < 2; ++i) {
            R[i] = br.phi[i](A);
            Rt[i] = br.psi[i](At);
        }
        auto po = Interval<S>::intersection(R[0].x, R[1].x);
        auto qo = Interval<S>::intersection(Rt[0].y, Rt[1].y);
        if (!po || !qo) throw BadParams("BlenderFrames: covering rectangles do not overlap");
        P_overlap = *po;
        Q_overlap = *qo;
    }

    // the printed covering conditions, asserted at validation time
    bool coverings_hold() const {
        bool cover_p = R[0].x.lo <= A.x.lo && A.x.hi <= R[1].x.hi && R[1].x.lo < R[0].x.hi;
        bool cover_q = Rt[0].y.lo <= At.y.lo && At.y.hi <= Rt[1].y.hi && Rt[1].y.lo < Rt[0].y.hi;
        return cover_p && cover_q;
    }
};

// Restricted cylinder R^u(w) = A cap phi_{w(1)}(A cap phi_{w(2)}(A cap ...)).
template <class S>
Box2<S> restricted_u(const Code& w, const Branches<S>& br, const BlenderFrames<S>& fr) {
    Box2<S> cur = fr.A;
    for (size_t i = w.size(); i-- > 0;) {
        Box2<S> img = br.phi[w[i]](cur);
        auto ix = Interval<S>::intersection(img.x, fr.A.x);
        auto iy = Interval<S>::intersection(img.y, fr.A.y);
        if (!ix || !iy) throw EmptyCylinder("restricted_u: empty");
        cur = {*ix, *iy};
    }
    return cur;
}

// Mirror construction on the s-side, indexed by the s-code symbols and mapped
// forward through f_*.
template <class S>
Box2<S> restricted_s(const Code& w, const Branches<S>& br, const BlenderFrames<S>& fr) {
    Box2<S> cur = fr.At;
    for (size_t i = w.size(); i-- > 0;) {
        Box2<S> img = br.psi[w[i]](cur);
        auto ix = Interval<S>::intersection(img.x, fr.At.x);
        auto iy = Interval<S>::intersection(img.y, fr.At.y);
        if (!ix || !iy) throw EmptyCylinder("restricted_s: empty");
        cur = {*ix, *iy};
    }
    return br.fstar(cur);
}

} // namespace tanglab

#endif
