#ifndef TANGLAB_DYNAMICS_HPP
#define TANGLAB_DYNAMICS_HPP

#include "tanglab/geometry.hpp"
#include "tanglab/params.hpp"

#include <stdexcept>

namespace tanglab {

enum class Region { V0, V1, VStar, Outside };

struct DomainViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutsideDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Branch system of the planar maps f, g and the tangency map f_*.
//
// f (expanding, u-plane):  f|V_i onto [-2,2]^2, branches xi_i per axis.
// g (expanding, s-plane):  g|Vt_i onto [-2,2]^2.  The x-part of branch 1 is
// lambda_s^-1 (x - 1): this is the form forced by the explicit formula for F
// (its branch-1 s-part is x -> lambda_s x + 1, whose inverse g must be).
// psi_i denotes the contracting inverse branch of g, phi_i that of f.
template <class S> struct Branches {
    Params<S> par;
    Affine2<S> f_br[2];   // expanding branches of f
    Affine2<S> g_br[2];   // expanding branches of g
    Affine2<S> phi[2];    // (f|V_i)^-1
    Affine2<S> psi[2];    // (g|Vt_i)^-1
    Affine2<S> fstar;     // tangency projection, s-plane -> u-plane
    Box2<S> V[2], Vt[2];  // V_i in the u-plane, Vt_i in the s-plane
    Box2<S> ambient;      // [-2,2]^2

    explicit Branches(const Params<S>& p) : par(p) {
        const S one(1), two(2);
        ambient = square<S>(S(-2), S(2));
        // f branches (eq. for f): branch 0 around -1, branch 1 around +1
        f_br[0] = {{p.lambda_cu0, p.lambda_cu0}, {p.lambda_u, p.lambda_u}};
        f_br[1] = {{p.lambda_cu1, one - p.lambda_cu1}, {p.lambda_u, -p.lambda_u}};
        // g branches; branch-1 x-part maps Vt_1 onto [-2,2]
        g_br[0] = {{one / p.lambda_s, one / p.lambda_s},
                   {one / p.lambda_cs0, one / p.lambda_cs0}};
        g_br[1] = {{one / p.lambda_s, -one / p.lambda_s},
                   {one / p.lambda_cs1, one - one / p.lambda_cs1}};
        for (int i = 0; i < 2; ++i) {
            phi[i] = f_br[i].inverse();
            psi[i] = g_br[i].inverse();
            V[i] = phi[i](ambient);
            Vt[i] = psi[i](ambient);
        }
        fstar = {{one / p.lambda_star, one - p.a_s / p.lambda_star},
                 {p.mu_star, p.a_u - p.mu_star}};
    }

    Box4<S> V4(int i) const { return {V[i].x, V[i].y, ambient.x, ambient.y}; }
    Box4<S> Vt4(int i) const { return {ambient.x, ambient.y, Vt[i].x, Vt[i].y}; }
    Box4<S> VStar4() const {
        return {{-par.delta, par.delta}, {-par.delta, par.delta}, ambient.x, ambient.y};
    }
};

template <class S>
Region region_of(const Point4<S>& p, const Branches<S>& br) {
    // V0/V1 take precedence over VStar; they are disjoint, so the order only
    // documents boundary handling.
    if (br.V[0].contains(p.uv()) && br.ambient.contains(p.sv())) return Region::V0;
    if (br.V[1].contains(p.uv()) && br.ambient.contains(p.sv())) return Region::V1;
    if (br.VStar4().contains(p)) return Region::VStar;
    return Region::Outside;
}

template <class S>
Point2<S> f_expand(const Point2<S>& p, int branch, const Branches<S>& br) {
    return br.f_br[branch](p);
}

template <class S>
Point2<S> f_expand_checked(const Point2<S>& p, int branch, const Branches<S>& br) {
    if (!br.V[branch].contains(p)) throw DomainViolation("f_expand: point outside V_branch");
    return br.f_br[branch](p);
}

template <class S>
Point2<S> g_expand(const Point2<S>& p, int branch, const Branches<S>& br) {
    return br.g_br[branch](p);
}

template <class S>
Point2<S> g_expand_checked(const Point2<S>& p, int branch, const Branches<S>& br) {
    if (!br.Vt[branch].contains(p)) throw DomainViolation("g_expand: point outside Vt_branch");
    return br.g_br[branch](p);
}

template <class S>
Point2<S> f_star(const Point2<S>& p, const Branches<S>& br) {
    return br.fstar(p);
}

// The four-dimensional map.  Affine product branches on V0/V1, the quadratic
// tangency branch on V_*; undefined (OutsideDomain) elsewhere.
template <class S>
Point4<S> F_map(const Point4<S>& p, const Branches<S>& br) {
    Region reg = region_of(p, br);
    switch (reg) {
    case Region::V0:
    case Region::V1: {
        int i = reg == Region::V0 ? 0 : 1;
        Point2<S> u = br.f_br[i](p.uv());
        Point2<S> s = br.psi[i](p.sv());
        return {u.x, u.y, s.x, s.y};
    }
    case Region::VStar: {
        const auto& q = br.par;
        S xu = -p.xu * p.xu + (p.xs - q.a_s) / q.lambda_star + 1;
        S yu = -q.a1 * p.yu * p.yu + q.mu_star * (p.ys - 1) + q.a_u;
        return {xu, yu, q.a2 * p.xu, p.yu};
    }
    default:
        throw OutsideDomain("F_map: point outside V0|V1|V*");
    }
}

// Exact inverse of the affine branch i of F; defined on the branch image Vt_i.
template <class S>
Point4<S> F_branch_inverse(const Point4<S>& p, int branch, const Branches<S>& br) {
    if (!br.Vt[branch].contains(p.sv()) || !br.ambient.contains(p.uv()))
        throw DomainViolation("F_branch_inverse: point outside branch image");
    Point2<S> u = br.phi[branch](p.uv());
    Point2<S> s = br.g_br[branch](p.sv());
    return {u.x, u.y, s.x, s.y};
}

template <class S> Point4<S> fixed_point_p(const Params<S>& par) {
    return {-par.a_cu, -par.a_u, -par.a_s, -par.a_cs};
}
template <class S> Point4<S> fixed_point_q(const Params<S>& par) {
    return {S(1), par.a_u, par.a_s, S(1)};
}

// ---- Lemma A rectangle chain -------------------------------------------
//
// R_{*,n+1} = g(f_{*,n}^-1(V_1) cap R_{*,n} cap Vt_1),  f_{*,n+1} = f o f_{*,n} o g^-1,
// with branch 1 throughout.  Two starting rectangles are supported: the
// printed one and the centered variant whose f_*-image has Q exactly [-2,2].
enum class RStarVariant { Printed, Centered };

template <class S> struct LemmaAStep {
    int n = 0;
    Box2<S> rect;      // R_{*,n}
    Box2<S> image;     // f_{*,n}(R_{*,n})
    bool q_in_vt1 = false;      // Q(R) subset Int Q(Vt_1)
    bool p_full = false;        // P(R) == [-2,2]
    bool p_in_v1 = false;       // P(f R) subset Int P(V_1)
    bool q_full = false;        // Q(f R) == [-2,2]
    bool all() const { return q_in_vt1 && p_full && p_in_v1 && q_full; }
};

template <class S>
Box2<S> r_star_rect(const Branches<S>& br, RStarVariant v) {
    const auto& p = br.par;
    S half_hi = (2 - p.a_u) / p.mu_star;
    if (v == RStarVariant::Printed) return {{S(-2), S(2)}, {1 - half_hi, 1 + half_hi}};
    S half_lo = (2 + p.a_u) / p.mu_star;
    return {{S(-2), S(2)}, {1 - half_lo, 1 + half_hi}};
}

template <class S>
std::vector<LemmaAStep<S>> lemma_a_chain(const Branches<S>& br, RStarVariant v, int n_max) {
    std::vector<LemmaAStep<S>> out;
    Box2<S> R = r_star_rect(br, v);
    Affine2<S> Fn = br.fstar;
    for (int n = 0; n <= n_max; ++n) {
        LemmaAStep<S> st;
        st.n = n;
        st.rect = R;
        st.image = Fn(R);
        st.q_in_vt1 = br.Vt[1].y.contains_interior(R.y);
        st.p_full = R.x.lo == S(-2) && R.x.hi == S(2);
        st.p_in_v1 = br.V[1].x.contains_interior(st.image.x);
        st.q_full = st.image.y.lo == S(-2) && st.image.y.hi == S(2);
        out.push_back(st);
        if (!st.all()) break; // the chain degenerates once an inclusion fails
        // R_{n+1} = g(Fn^-1(V_1) cap R cap Vt_1)
        Box2<S> pre = Fn.inverse()(br.V[1]);
        auto ix = Interval<S>::intersection(pre.x, R.x);
        auto iy = Interval<S>::intersection(pre.y, R.y);
        if (!ix || !iy) break;
        ix = Interval<S>::intersection(*ix, br.Vt[1].x);
        iy = Interval<S>::intersection(*iy, br.Vt[1].y);
        if (!ix || !iy) break;
        R = br.g_br[1](Box2<S>{*ix, *iy});
        Fn = br.f_br[1].after(Fn.after(br.psi[1]));
    }
    return out;
}

} // namespace tanglab

#endif
