#ifndef TANGLAB_GAMMA_HPP
#define TANGLAB_GAMMA_HPP

#include "tanglab/boxes.hpp"

#include <functional>
#include <vector>

namespace tanglab {

struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gamma^(k) = alpha^(k) u^(k) [omega^(k+1)]^-1 together with its counts.
struct GammaCode {
    Code alpha, u_free, omega_next;
    Code gamma;
    long n_hat = 0, n_hat0 = 0, n_hat1 = 0;
    bool majority = false; // n_hat1 <= n_hat0

    void assemble() {
        gamma = alpha + u_free + omega_next.reversed();
        n_hat = long(gamma.size());
        n_hat0 = long(gamma.count(0));
        n_hat1 = long(gamma.count(1));
        majority = n_hat1 <= n_hat0;
    }
};

// Output of the return-orbit construction.  Per block k it records the code
// gamma^(k), the exact block centers c_k, the alignment vector
// Delta_{k+1} = c_{k+1} - F^{n_hat_k + 1}(c_k) (first two coordinates), and
// the x_s-support interval used by the localized perturbation.
template <class S> struct GammaSchedule {
    Params<S> par;
    long m0 = 0;          // structural 1-run length of the omega codes
    long L = 0;
    bool rigorous = true; // |Delta_k| < lambda_s^{L k} enforced (theorem scale)
    std::vector<GammaCode> blocks;       // k = 1..k_max
    std::vector<Point2<S>> deltas;       // deltas[k-1] = Delta_k, Delta_1 = 0
    std::vector<Point4<S>> centers;      // c_k, exact
    std::vector<Interval<S>> supports;   // x_s-side of S([gamma^k]^-1), index k-1 -> support k+1
    std::vector<long> branch_pos;        // n_k: first-difference positions of omega^k, omega^{k+1}

    long k_max() const { return long(blocks.size()); }
};

namespace gamma_detail {

// point of the g-cylinder chain: psi_{v(1)}(psi_{v(2)}(...psi_{v(n)}(pt)))
template <class S>
Point2<S> psi_chain_point(const Code& v, Point2<S> pt, const Branches<S>& br) {
    for (size_t i = v.size(); i-- > 0;) pt = br.psi[v[i]](pt);
    return pt;
}

template <class S>
Point2<S> phi_chain_point(const Code& v, Point2<S> pt, const Branches<S>& br) {
    for (size_t i = v.size(); i-- > 0;) pt = br.phi[v[i]](pt);
    return pt;
}

// Digs a u-code whose cylinder keeps the moving target interior until both
// sides are below tol; the omega tail ("rho") is extended whenever no child
// can absorb the target, which moves the target itself.  cover-u makes the
// x-side always absorbable; the rho-moves resolve the y-side gaps.
template <class S> struct Dig {
    const Branches<S>* br;
    Affine2<S> pre;      // psi-chain of the omega code built so far
    Code omega;
    Point2<S> suffix_pt; // psi-chain point of the fixed code tail
    Affine2<S> ucyl;     // phi-chain of the alpha code built so far
    Code alpha;
    Point2<S> target;

    Dig(const Branches<S>& b, const Code& omega_prefix, const Point2<S>& sp)
        : br(&b), suffix_pt(sp) {
        for (size_t i = 0; i < omega_prefix.size(); ++i) push_omega(omega_prefix[i]);
    }

    void recompute_target() { target = br->fstar(pre(suffix_pt)); }
    void push_omega(int j) {
        omega.push_back(uint8_t(j));
        pre = pre.after(br->psi[j]);
        recompute_target();
    }
    void push_alpha(int i) {
        alpha.push_back(uint8_t(i));
        ucyl = ucyl.after(br->phi[i]);
    }

    // margin-containment of a point in the child-i cylinder
    bool child_ok(int i, const Point2<S>& t) const {
        Affine2<S> ch = ucyl.after(br->phi[i]);
        Box2<S> b = ch(br->ambient);
        S mx = b.x.length() / S(50), my = b.y.length() / S(50);
        return b.x.lo + mx < t.x && t.x < b.x.hi - mx && b.y.lo + my < t.y && t.y < b.y.hi - my;
    }

    // normalized distance of a point from the nearest child cylinder; zero
    // when some child absorbs it with margin
    S child_distance(const Point2<S>& t) const {
        S best(-1);
        for (int i = 0; i < 2; ++i) {
            Affine2<S> ch = ucyl.after(br->phi[i]);
            Box2<S> b = ch(br->ambient);
            S dx(0), dy(0);
            if (t.x < b.x.lo) dx = (b.x.lo - t.x) / b.x.length();
            else if (t.x > b.x.hi) dx = (t.x - b.x.hi) / b.x.length();
            if (t.y < b.y.lo) dy = (b.y.lo - t.y) / b.y.length();
            else if (t.y > b.y.hi) dy = (t.y - b.y.hi) / b.y.length();
            S d = dx + dy;
            if (best < S(0) || d < best) best = d;
        }
        return best;
    }

    bool run(const S& tol, long max_digits) {
        while (true) {
            Box2<S> cur = ucyl(br->ambient);
            if (cur.x.length() < tol && cur.y.length() < tol && cur.x.contains(target.x) &&
                cur.y.contains(target.y))
                return true;
            int pick = -1;
            for (int i = 0; i < 2; ++i)
                if (child_ok(i, target)) {
                    pick = i;
                    break;
                }
            if (pick >= 0) {
                push_alpha(pick);
            } else {
                // servo move: extend omega by the symbol bringing the target
                // back into an absorbable position (ties toward 0)
                int best = -1;
                S best_score{};
                bool best_abs = false;
                for (int j = 0; j < 2; ++j) {
                    Affine2<S> pre2 = pre.after(br->psi[j]);
                    Point2<S> t2 = br->fstar(pre2(suffix_pt));
                    bool abs_ok = child_ok(0, t2) || child_ok(1, t2);
                    S score = child_distance(t2);
                    if (best < 0 || (abs_ok && !best_abs) ||
                        (abs_ok == best_abs && score < best_score)) {
                        best = j;
                        best_score = score;
                        best_abs = abs_ok;
                    }
                }
                push_omega(best);
            }
            if (long(alpha.size() + omega.size()) > max_digits)
                throw RefinementFailure("gamma dig: digit budget exhausted");
        }
    }
};

} // namespace gamma_detail

// Smallest structural 1-run length m0 for which the f_*-image of the omega
// cylinders lands inside the ambient square (the mu_* expansion forces the
// first 0 of any s-code this deep).
template <class S>
long gamma_m0(const Params<S>& p) {
    long m = 0;
    S v(1);
    // mu_* * 3 * lambda_cs1^m < 3/2
    while (!(p.mu_star * 3 * v < rat_const<S>(3, 2))) {
        v *= p.lambda_cs1;
        ++m;
        if (m > 10000) throw BadParams("gamma_m0: no admissible prefix length");
    }
    return m;
}

// Builds the return-orbit codes for blocks 1..k_max.  u_provider supplies
// the free middle codes.  In rigorous mode the alignment vectors satisfy
// |Delta_{k+1}| < lambda_s^{L(k+1)} by digging to that depth; exploration
// mode digs to a fixed shallow tolerance and flags the schedule.
template <class S>
GammaSchedule<S> build_gamma_schedule(const Branches<S>& br,
                                      const std::function<Code(long)>& u_provider, long k_max,
                                      long L, bool rigorous) {
    using namespace gamma_detail;
    const auto& p = br.par;
    GammaSchedule<S> sch;
    sch.par = p;
    sch.L = L;
    sch.rigorous = rigorous;
    sch.m0 = gamma_m0(p);
    if (rigorous && L < p.N_s * p.r + 1)
        throw BadParams("build_gamma_schedule: L below the L-scale minimum");

    std::vector<Code> alphas(k_max + 2), omegas(k_max + 2), ufree(k_max + 2);
    alphas[1] = Code::from_string("1");
    for (long k = 1; k <= k_max + 1; ++k) ufree[k] = u_provider(k);

    // stage s digs omega^{s+1} and alpha^{s+1} against the center of
    // B^s([gamma^s]^-1)
    const S expl_tol = rat_const<S>(1, 32);
    for (long s = 1; s <= k_max; ++s) {
        Code omega_prefix = Code::run(1, size_t(sch.m0)) + Code::run(0, size_t(s + 1)) +
                            Code::run(1, 1);
        Code tail = ufree[s].reversed() + alphas[s].reversed();
        Point2<S> sp = psi_chain_point(tail, Point2<S>{S(0), S(0)}, br);
        Dig<S> dig(br, omega_prefix, sp);
        S tol = rigorous ? spow(p.lambda_s, L * (s + 1)) / 2 : expl_tol;
        dig.run(tol, rigorous ? 4000000L : 400000L);
        omegas[s + 1] = dig.omega;
        alphas[s + 1] = dig.alpha;
    }

    // assemble blocks, centers, alignment vectors and supports
    sch.deltas.push_back(Point2<S>{S(0), S(0)}); // Delta_1 = 0
    for (long k = 1; k <= k_max; ++k) {
        GammaCode g;
        g.alpha = alphas[k];
        g.u_free = ufree[k];
        g.omega_next = omegas[k + 1];
        g.assemble();
        sch.blocks.push_back(g);
        Point2<S> c = phi_chain_point(g.gamma, Point2<S>{S(0), S(0)}, br);
        sch.centers.push_back(Point4<S>{c.x, c.y, S(0), S(0)});
        Box2<S> sc = psi_chain(g.gamma.reversed(), br)(br.ambient);
        sch.supports.push_back(sc.x);
        if (k >= 2) {
            // Delta_k = c_k - f_*(S-center of [gamma^{k-1}]^-1)
            Point2<S> T = br.fstar(
                psi_chain_point(sch.blocks[k - 2].gamma.reversed(), Point2<S>{S(0), S(0)}, br));
            sch.deltas.push_back(Point2<S>{c.x - T.x, c.y - T.y});
        }
        if (k >= 2)
            sch.branch_pos.push_back(long(Code::first_difference(omegas[k], omegas[k + 1])));
    }
    return sch;
}

} // namespace tanglab

#endif
