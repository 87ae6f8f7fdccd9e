#ifndef TANGLAB_PERTURBATION_HPP
#define TANGLAB_PERTURBATION_HPP

#include "tanglab/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tanglab {

struct InvalidL : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coefficients of the polynomial smoothstep of order 2r+1 on [0,1]: the
// unique degree-(2r+1) polynomial with r vanishing derivatives at both
// knots.  Rational coefficients keep h and G exact in rational mode.
inline std::vector<Rat> smoothstep_coeffs(long r) {
    auto binom = [](long n, long k) {
        Rat b(1);
        for (long i = 1; i <= k; ++i) b = b * (n - k + i) / i;
        return b;
    };
    std::vector<Rat> c(size_t(2 * r + 2), Rat(0));
    for (long j = 0; j <= r; ++j) {
        Rat v = binom(r + j, j) * binom(2 * r + 1, r - j);
        if (j % 2) v = -v;
        c[size_t(r + 1 + j)] = v;
    }
    return c;
}

inline std::vector<Rat> poly_derivative(const std::vector<Rat>& c) {
    std::vector<Rat> d;
    for (size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * long(i));
    return d;
}

template <class S>
S eval_poly(const std::vector<Rat>& c, const S& t) {
    S acc(0);
    for (size_t i = c.size(); i-- > 0;) acc = acc * t + from_rat<S>(c[i]);
    return acc;
}

// base bump: non-negative, non-decreasing, 0 for x <= -1, 1 for x >= 0
template <class S> struct BumpBase {
    long r;
    std::vector<Rat> coeffs;

    explicit BumpBase(long r_) : r(r_), coeffs(smoothstep_coeffs(r_)) {}

    S operator()(const S& x) const {
        if (x <= S(-1)) return S(0);
        if (x >= S(0)) return S(1);
        return eval_poly(coeffs, S(x + S(1)));
    }
    S derivative(const S& x) const {
        if (x <= S(-1) || x >= S(0)) return S(0);
        return eval_poly(poly_derivative(coeffs), S(x + S(1)));
    }

    // sup-norm of derivatives up to order r on [0,1], by dense sampling of
    // the exact derivative polynomials (report data, float is enough)
    double cr_norm() const {
        std::vector<Rat> d = coeffs;
        double m = 1.0; // sup |b| itself
        for (long ord = 1; ord <= r; ++ord) {
            d = poly_derivative(d);
            double mo = 0;
            for (int i = 0; i <= 4096; ++i) {
                double t = double(i) / 4096.0;
                mo = std::max(mo, std::fabs(eval_poly(d, t)));
            }
            m = std::max(m, mo);
        }
        return m;
    }
};

// bump over an interval I with collar rho*|I| on each side, via the printed
// two-term formula; equals 1 on I and 0 outside the collar
template <class S>
S bump_interval(const BumpBase<S>& b, const S& rho, const Interval<S>& I, const S& x) {
    S w = rho * I.length();
    return b((x - I.lo) / w) + b(-(x - I.hi) / w) - S(1);
}

// Localized shift schedule: per index k the pair (t_k, ttilde_k) and the
// x_s-support of the bump b_{s,k}.  Built from a GammaSchedule; the supports
// are the x_s-sides of the deep g-cylinders, which are pairwise disjoint by
// the structural branching of the omega codes.
template <class S> struct PerturbationSchedule {
    Params<S> par;
    long L = 0, r = 1;
    bool rigorous = true;
    BumpBase<S> bump;
    S tau_s;          // 2 lambda_s / (1 - 2 lambda_s)
    S rho_s;          // 1/(3 tau_s)
    Interval<S> gate; // [-delta, delta]

    struct Entry {
        Interval<S> support;        // plateau interval in x_s (S-cylinder side)
        Interval<S> collared;       // support extended by the rho collar
        Point2<S> shift;            // (t_{k+1}, ttilde_{k+1})
        long k = 0;                 // block index the entry aligns (k -> k+1)
    };
    std::vector<Entry> entries; // sorted by support position

    explicit PerturbationSchedule(const Params<S>& p)
        : par(p), L(p.L), r(p.r), bump(p.r), tau_s(2 * p.lambda_s / (1 - 2 * p.lambda_s)),
          rho_s((1 - 2 * p.lambda_s) / (6 * p.lambda_s)), gate{-p.delta, p.delta} {}

    static PerturbationSchedule from_gamma(const GammaSchedule<S>& g) {
        PerturbationSchedule ps(g.par);
        ps.L = g.L;
        ps.rigorous = g.rigorous;
        for (long k = 1; k + 1 <= g.k_max(); ++k) {
            Entry e;
            e.support = g.supports[size_t(k - 1)];
            S collar = ps.rho_s * e.support.length();
            e.collared = {e.support.lo - collar, e.support.hi + collar};
            e.shift = g.deltas[size_t(k)]; // Delta_{k+1}
            e.k = k;
            ps.entries.push_back(e);
        }
        std::sort(ps.entries.begin(), ps.entries.end(),
                  [](const Entry& a, const Entry& b) { return a.support.lo < b.support.lo; });
        for (size_t i = 1; i < ps.entries.size(); ++i)
            if (ps.entries[i - 1].collared.hi >= ps.entries[i].collared.lo)
                throw RefinementFailure("PerturbationSchedule: collared supports overlap");
        return ps;
    }

    // Shifts equal and bounded by half the gap between consecutive supports
    // (the bijectivity condition); fails in exploration mode, which is the
    // point of the rigor flag.
    bool shifts_within_gaps() const {
        for (size_t i = 0; i < entries.size(); ++i) {
            S m = sabs(par.lambda_star * entries[i].shift.x);
            S gap_lo = i == 0 ? S(4) : entries[i].collared.lo - entries[i - 1].collared.hi;
            S gap_hi =
                i + 1 == entries.size() ? S(4) : entries[i + 1].collared.lo - entries[i].collared.hi;
            if (!(2 * m < gap_lo && 2 * m < gap_hi)) return false;
        }
        return true;
    }

    // the entry whose collared support contains xs, by binary search
    const Entry* locate(const S& xs) const {
        size_t lo = 0, hi = entries.size();
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (entries[mid].collared.hi < xs) lo = mid + 1;
            else hi = mid;
        }
        if (lo < entries.size() && entries[lo].collared.contains(xs)) return &entries[lo];
        return nullptr;
    }
};

// h: identity off the gate box and the collared supports; on them the
// (x_s, y_s) coordinates are shifted by the bump-weighted amounts.
template <class S>
Point4<S> h_map(const PerturbationSchedule<S>& sch, const Point4<S>& p) {
    const auto& par = sch.par;
    const auto* e = sch.locate(p.xs);
    if (!e) return p;
    S gx = bump_interval(sch.bump, rat_const<S>(1, 4), sch.gate, p.xu);
    if (gx == S(0)) return p;
    S gy = bump_interval(sch.bump, rat_const<S>(1, 4), sch.gate, p.yu);
    if (gy == S(0)) return p;
    S bs = bump_interval(sch.bump, sch.rho_s, e->support, p.xs);
    S w = gx * gy * bs;
    Point4<S> q = p;
    q.xs += par.lambda_star * e->shift.x * w;
    q.ys += e->shift.y / par.mu_star * w;
    return q;
}

template <class S>
Point4<S> G_map(const PerturbationSchedule<S>& sch, const Branches<S>& br, const Point4<S>& p) {
    return F_map(h_map(sch, p), br);
}

// Closed-form C^r budget for ||h - id||: the two geometric series of the
// construction.  Finite only above the minimal L, decreasing in L.
inline double norm_budget(const Params<Rat>& p, long L) {
    long r = p.r;
    Rat qnum = spow(p.lambda_s, L);
    Rat qden = spow(p.lambda_s, p.N_s * r);
    if (!(qnum < qden)) throw InvalidL("norm_budget: lambda_s^L >= lambda_s^(N_s r)");
    double lamL = to_double(qnum);
    double lamNsr = to_double(qden);
    double lamNs_r = std::pow(to_double(spow(p.lambda_s, p.N_s)), double(r));
    double S1 = lamL / lamNs_r * (lamL / (lamNsr - lamL));
    double S2 = S1 / 2;
    BumpBase<double> b(r);
    double bn = b.cr_norm();
    double tau = to_double(2 * p.lambda_s / (1 - 2 * p.lambda_s));
    double d = to_double(p.delta);
    double shell = std::pow(12 * tau / (d * d), double(r)) * bn;
    return to_double(p.lambda_star) * shell * S1 + shell / to_double(p.mu_star) * S2;
}

} // namespace tanglab

#endif
