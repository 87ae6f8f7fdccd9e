#ifndef TANGLAB_WANDERING_HPP
#define TANGLAB_WANDERING_HPP

#include "tanglab/perturbation.hpp"

#include <cmath>
#include <vector>

namespace tanglab {

struct InsufficientDepth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class YStarVariant { InverseA2, InverseSqrtA1 };

// Side scales of the wandering boxes, kept in log domain (they underflow any
// fixed-precision float almost immediately).
struct BoxScales {
    double log_b = 0;     // ln b_k
    double log_bbar = 0;  // ln bbar_k
    double log_xstar = 0; // ln x*_k
    double log_ystar = 0; // ln y*_k
    double tail_bound = 0;
};

// evaluates the dyadically weighted exponent sums  sum_i n_{k+i}/2^i  from
// the available gamma blocks, with a certified geometric tail bound
inline double dyadic_sum(const std::vector<long>& n, size_t k, double growth, double* tail) {
    // n is 1-based stored 0-based: n[j] — value at block j+1
    double s = 0, w = 1;
    size_t i = k - 1;
    for (; i < n.size(); ++i) {
        s += w * double(n[i]);
        w /= 2;
    }
    // tail: n_{j+1} <= growth * n_j beyond depth
    double q = growth / 2;
    if (q >= 1) throw InsufficientDepth("dyadic_sum: growth ratio too large for a tail bound");
    *tail = w * double(n.back()) * growth / (1 - q);
    return s;
}

template <class S>
struct WanderingLab {
    const GammaSchedule<S>& sch;
    Params<double> par;
    YStarVariant ystar_variant = YStarVariant::InverseA2;
    std::vector<long> n_hat, n_hat0, n_hat1;

    explicit WanderingLab(const GammaSchedule<S>& g)
        : sch(g), par(to_double_params_any(g.par)) {
        for (auto& b : g.blocks) {
            n_hat.push_back(b.n_hat);
            n_hat0.push_back(b.n_hat0);
            n_hat1.push_back(b.n_hat1);
        }
    }

    static Params<double> to_double_params_any(const Params<Rat>& p) { return to_double_params(p); }
    static Params<double> to_double_params_any(const Params<double>& p) { return p; }

    // measured growth bound (1+eta) over the available blocks, with margin
    double growth_ratio(size_t from_k) const {
        double g = 1.0;
        for (size_t i = from_k; i + 1 < n_hat.size(); ++i)
            g = std::max(g, double(n_hat[i + 1]) / double(n_hat[i]));
        return g * 1.0000001;
    }

    BoxScales box_scales(size_t k, double tail_tol) const {
        if (k + 8 > n_hat.size())
            throw InsufficientDepth("box_scales: need more gamma blocks beyond k");
        double growth = growth_ratio(k - 1);
        double t0 = 0, t1 = 0, tt = 0;
        double e0 = dyadic_sum(n_hat0, k, growth, &t0);
        double e1 = dyadic_sum(n_hat1, k, growth, &t1);
        double eh = dyadic_sum(n_hat, k, growth, &tt);
        double lcu0 = std::log(par.lambda_cu0), lcu1 = std::log(par.lambda_cu1);
        double lu = std::log(par.lambda_u);
        BoxScales s;
        s.tail_bound = (t0 + t1) * std::max(lcu0, lu) + tt * lu;
        if (s.tail_bound > tail_tol)
            throw InsufficientDepth("box_scales: tail bound above tolerance");
        s.log_b = -(e0 * lcu0 + e1 * lcu1);
        s.log_bbar = -std::log(par.a1) - eh * lu;
        s.log_xstar = std::log(20 * par.a2) + s.log_b / 2;
        s.log_ystar = (ystar_variant == YStarVariant::InverseA2
                           ? std::log(20 / par.a2)
                           : std::log(20 / std::sqrt(par.a1))) +
                      s.log_bbar / 2;
        return s;
    }

    // centers of the block-k u-box, stable double evaluation
    Point2<double> center(size_t k) const {
        Branches<double> brd(par);
        Point2<double> c{0, 0};
        const Code& g = sch.blocks[k - 1].gamma;
        for (size_t i = g.size(); i-- > 0;) c = brd.phi[g[i]](c);
        return c;
    }

    // The return-map offset formulas around the block centers.  Offsets are
    // relative to (xhat_k, yhat_k, 0, 0); the result is relative to
    // (xhat_{k+1}, 0) and (yhat_{k+1}, 0) in the two planes.
    template <class T>
    static std::pair<Point2<T>, Point2<T>>
    return_offsets(const Params<T>& p, const T& Lx, const T& Ls, const T& Lyu, const T& Lcs,
                   const Point4<T>& off) {
        T xu = Lx * off.xu;
        T yu = Lyu * off.yu;
        Point2<T> pi_x{-xu * xu + Ls * off.xs / p.lambda_star, p.a2 * xu};
        Point2<T> pi_y{-p.a1 * yu * yu + p.mu_star * (Lcs * off.ys), Lyu * off.yu};
        return {pi_x, pi_y};
    }
};

// exact expansion factors of a block, any scalar
template <class S>
struct BlockFactors {
    S Lx, Ls, Lu, Lcs; // prod lambda_cu, lambda_s^n, lambda_u^n, prod lambda_cs
    static BlockFactors from(const Params<S>& p, const GammaCode& g) {
        BlockFactors f{S(1), S(1), S(1), S(1)};
        for (size_t i = 0; i < g.gamma.size(); ++i) {
            f.Lx *= g.gamma[i] ? p.lambda_cu1 : p.lambda_cu0;
            f.Lcs *= g.gamma[i] ? p.lambda_cs1 : p.lambda_cs0;
        }
        f.Ls = spow(p.lambda_s, g.n_hat);
        f.Lu = spow(p.lambda_u, g.n_hat);
        return f;
    }
};

// Exact return-map offsets (statement form of the projection lemma): the
// affine constants of the tangency branch are carried entirely by the block
// centers, so zero offsets map to zero offsets.
template <class S>
std::pair<Point2<S>, Point2<S>> return_map_projection(const Params<S>& p,
                                                      const BlockFactors<S>& f,
                                                      const Point4<S>& off) {
    S xu = f.Lx * off.xu;
    S yu = f.Lu * off.yu;
    Point2<S> pi_x{-xu * xu + f.Ls * off.xs / p.lambda_star, p.a2 * xu};
    Point2<S> pi_y{-p.a1 * yu * yu + p.mu_star * f.Lcs * off.ys, f.Lu * off.yu};
    return {pi_x, pi_y};
}

struct NestingRow {
    long k = 0;
    int axis = 0;            // 1..4 (pi_1..pi_4)
    int exponent = 0;        // verified exponent e in G^{n_hat + e}
    bool included = false;
    double log_margin = 0;   // ln(halfwidth_{k+1}) - ln(extent of the image)
    double ev1_bound = 0;    // 1/2 + |lambda_s^n x*_k / (b_{k+1}/2)|
};

struct NestingReport {
    std::vector<NestingRow> rows;
    int verified_exponent = 0;
    bool all_included() const {
        for (auto& r : rows)
            if (!r.included) return false;
        return !rows.empty();
    }
};

// log-sum-exp style: ln(e^a + e^b)
inline double log_add(double a, double b) {
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Coordinate-wise nesting of the wandering boxes via the return-map formula
// on the extremal offsets.  All magnitudes live in log domain.
template <class S>
NestingReport check_nesting(const WanderingLab<S>& lab, size_t k, double tail_tol = 1e-9) {
    const auto& p = lab.par;
    BoxScales sk = lab.box_scales(k, tail_tol);
    BoxScales sk1 = lab.box_scales(k + 1, tail_tol);
    const GammaCode& g = lab.sch.blocks[k - 1];
    double log_Lx = g.n_hat0 * std::log(p.lambda_cu0) + g.n_hat1 * std::log(p.lambda_cu1);
    double log_Ls = g.n_hat * std::log(p.lambda_s);
    double log_Lu = g.n_hat * std::log(p.lambda_u);
    double log_Lcs = g.n_hat0 * std::log(p.lambda_cs0) + g.n_hat1 * std::log(p.lambda_cs1);
    double ln2 = std::log(2.0);

    NestingReport rep;
    rep.verified_exponent = 1;
    // pi_1 (x_u): parabola extent  b_{k+1}/4 + lambda_*^-1 lambda_s^n x*_k
    // against half-width b_{k+1}/2
    {
        double ext = log_add(sk1.log_b - std::log(4.0),
                             -std::log(to_double(p.lambda_star)) + log_Ls + sk.log_xstar);
        NestingRow r{long(k), 1, 1, ext < sk1.log_b - ln2, (sk1.log_b - ln2) - ext, 0};
        r.ev1_bound = 0.5 + std::exp(log_Ls + sk.log_xstar - (sk1.log_b - ln2));
        rep.rows.push_back(r);
    }
    // pi_3 (x_s): |a2 Lx b_k/2| against x*_{k+1}
    {
        double ext = std::log(p.a2) + log_Lx + sk.log_b - ln2;
        rep.rows.push_back(
            {long(k), 3, 1, ext < sk1.log_xstar, sk1.log_xstar - ext, 0});
    }
    // pi_2 (y_u): a1 Lu^2 (bbar/2)^2 + mu_* Lcs y*_k against bbar_{k+1}/2
    {
        double ext = log_add(sk1.log_bbar - std::log(4.0),
                             std::log(to_double(p.mu_star)) + log_Lcs + sk.log_ystar);
        rep.rows.push_back(
            {long(k), 2, 1, ext < sk1.log_bbar - ln2, (sk1.log_bbar - ln2) - ext, 0});
    }
    // pi_4 (y_s): Lu bbar_k/2 against y*_{k+1}
    {
        double ext = log_Lu + sk.log_bbar - ln2;
        rep.rows.push_back(
            {long(k), 4, 1, ext < sk1.log_ystar, sk1.log_ystar - ext, 0});
    }
    (void)log_Lu;
    return rep;
}

} // namespace tanglab

#endif
