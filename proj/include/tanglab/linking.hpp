#ifndef TANGLAB_LINKING_HPP
#define TANGLAB_LINKING_HPP

#include "tanglab/boxes.hpp"

#include <optional>
#include <vector>

namespace tanglab {

// linked pair predicate: boxes intersect, P(s) in Int P(u), Q(u) in Int Q(s)
template <class S>
bool is_linked(const Box2<S>& sb, const Box2<S>& ub) {
    return sb.intersects(ub) && ub.x.contains_interior(sb.x) && sb.y.contains_interior(ub.y);
}

// kappa-proportional: kappa*|u| < |s| <= |u| in the box norm
template <class S>
bool is_proportional(const Box2<S>& sb, const Box2<S>& ub, const S& kappa) {
    S su = ub.norm(), ss = sb.norm();
    return kappa * su < ss && ss <= su;
}

// children of a code, labeled so that the 0-child precedes the 1-child in
// the relevant projection (max proj(child0) < min proj(child1)); this is the
// labeling convention of the construction
inline std::pair<Code, Code> related_children(const Code& w) {
    Code c0 = w, c1 = w;
    c0.push_back(0);
    c1.push_back(1);
    return {c0, c1};
}

// A linked u/s pair under an accumulated translation D of the s-box,
// maintained through exact affine chains.  J and Jp are the two covering-
// frame intervals of the refinement argument:
//   J  = image of P(D + s-box) in the f^n-expanded frame,
//   Jp = image of Q(u-box) in the backward (g^m o f_*^-1)-expanded frame.
template <class S> struct PairState {
    const Branches<S>* br = nullptr;
    const BlenderFrames<S>* fr = nullptr;
    Code a, w;          // u-code, s-code
    Affine2<S> uchain;  // phi_{a(1)} o ... o phi_{a(n)}
    Affine2<S> schain;  // psi_{w(1)} o ... o psi_{w(m)}
    Point2<S> D{};      // accumulated translation of the s-box

    PairState() = default;
    PairState(const Branches<S>& b, const BlenderFrames<S>& f) : br(&b), fr(&f) {}

    Box2<S> ubox() const { return uchain(br->ambient); }
    Box2<S> sbox() const { return br->fstar(schain(br->ambient)); }
    Box2<S> sbox_shifted() const { return sbox().shifted(D); }
    S unorm() const { return ubox().norm(); }
    S snorm() const { return sbox().norm(); }
    S ratio() const { return snorm() / unorm(); }
    bool linked() const { return is_linked(sbox_shifted(), ubox()); }
    bool proportional() const {
        return is_proportional(sbox_shifted(), ubox(), S(1) / br->par.lambda_cu0);
    }

    Interval<S> J() const {
        Box2<S> sb = sbox();
        return uchain.x.inverse()(sb.x.shifted(D.x));
    }
    Interval<S> Jp() const {
        Box2<S> ub = ubox();
        Affine1<S> back = br->fstar.y.after(schain.y); // frame -> Q(s-box)
        return back.inverse()(ub.y.shifted(-D.y));
    }

    void push_u(int i) {
        a.push_back(uint8_t(i));
        uchain = uchain.after(br->phi[i]);
    }
    void push_s(int j) {
        w.push_back(uint8_t(j));
        schain = schain.after(br->psi[j]);
    }
};

// Which covering interval absorbed J (P(R_i)) / Jp (Q(Rt_j)); -1 when the
// step was valid only through the unrestricted V-rectangles.
struct AbsorptionLog {
    int u_symbol = -1, u_cover = -1;
    int s_symbol = -1, s_cover = -1;
    int u_symbol2 = -1, u_cover2 = -1; // second u-symbol of a double step
};

namespace detail {

template <class S>
bool u_step_valid(const PairState<S>& st, int i) {
    PairState<S> t = st;
    t.push_u(i);
    return t.linked();
}

template <class S>
bool s_step_valid(const PairState<S>& st, int j) {
    PairState<S> t = st;
    t.push_s(j);
    return t.linked();
}

template <class S>
int cover_index_u(const PairState<S>& st) {
    Interval<S> J = st.J();
    for (int i = 0; i < 2; ++i)
        if (st.fr->R[i].x.contains(J)) return i;
    return -1;
}

template <class S>
int cover_index_s(const PairState<S>& st) {
    Interval<S> Jp = st.Jp();
    for (int j = 0; j < 2; ++j)
        if (st.fr->Rt[j].y.contains(Jp)) return j;
    return -1;
}

// pick a u-symbol: prefer the covering-absorbed choice (tie -> 0), fall back
// to any linkedness-preserving symbol
template <class S>
std::optional<std::pair<int, int>> choose_u(const PairState<S>& st) {
    Interval<S> J = st.J();
    for (int i = 0; i < 2; ++i)
        if (st.fr->R[i].x.contains(J) && u_step_valid(st, i)) return std::make_pair(i, i);
    for (int i = 0; i < 2; ++i)
        if (u_step_valid(st, i)) return std::make_pair(i, -1);
    return std::nullopt;
}

template <class S>
std::optional<std::pair<int, int>> choose_s(const PairState<S>& st) {
    Interval<S> Jp = st.Jp();
    for (int j = 0; j < 2; ++j)
        if (st.fr->Rt[j].y.contains(Jp) && s_step_valid(st, j)) return std::make_pair(j, j);
    for (int j = 0; j < 2; ++j)
        if (s_step_valid(st, j)) return std::make_pair(j, -1);
    return std::nullopt;
}

} // namespace detail

// One refinement step of the covering argument: the s-code grows by one
// symbol and the u-code by one symbol, or by two when the appended s-symbol
// is 0 (otherwise the backward frame interval outgrows the covering).
// Symbols are chosen by covering absorption with ties broken toward 0; the
// refined pair must remain linked or RefinementFailure is thrown.
template <class S>
AbsorptionLog refine_linked(PairState<S>& st) {
    AbsorptionLog log;
    auto sj = detail::choose_s(st);
    if (!sj) throw RefinementFailure("refine_linked: no s-symbol keeps the pair linked");
    st.push_s(sj->first);
    log.s_symbol = sj->first;
    log.s_cover = sj->second;
    int u_steps = sj->first == 0 ? 2 : 1;
    for (int t = 0; t < u_steps; ++t) {
        auto ui = detail::choose_u(st);
        if (!ui) throw RefinementFailure("refine_linked: no u-symbol keeps the pair linked");
        st.push_u(ui->first);
        if (t == 0) {
            log.u_symbol = ui->first;
            log.u_cover = ui->second;
        } else {
            log.u_symbol2 = ui->first;
            log.u_cover2 = ui->second;
        }
    }
    if (!st.linked()) throw RefinementFailure("refine_linked: refined pair not linked");
    return log;
}

// Descend until the s-box norm lies in [s_lo, s_hi] and the norm ratio
// |s|/|u| lies in (r_lo, r_hi].  Pure u-extensions are used to trim the
// ratio; a bounded backtracking pass resolves the final landing.
template <class S>
void refine_to_window(PairState<S>& st, const S& s_lo, const S& s_hi, const S& r_lo,
                      const S& r_hi, int max_steps = 20000) {
    const S band_lo = r_hi * rat_const<S>(3, 4);
    int steps = 0;
    auto in_window = [&] {
        S sn = st.snorm();
        return s_lo <= sn && sn <= s_hi && r_lo < st.ratio() && st.ratio() <= r_hi;
    };
    while (!in_window()) {
        if (++steps > max_steps) throw RefinementFailure("refine_to_window: step budget exhausted");
        S sn = st.snorm(), r = st.ratio();
        if (sn < s_lo) throw RefinementFailure("refine_to_window: overshot the s-window");
        if (sn > s_hi) {
            // descent phase; keep the ratio in a working band with pure-u trims
            bool trimmed = false;
            if (r <= band_lo) {
                // prefer the fine trim (symbol 1) to avoid overshoot
                for (int i : {1, 0}) {
                    PairState<S> t = st;
                    t.push_u(i);
                    if (t.linked() && t.ratio() <= r_hi) {
                        st = t;
                        trimmed = true;
                        break;
                    }
                }
            }
            if (!trimmed) refine_linked(st);
            continue;
        }
        // s-norm inside the window; fix the ratio without leaving it
        if (r <= r_lo) {
            bool moved = false;
            for (int i : {1, 0}) {
                PairState<S> t = st;
                t.push_u(i);
                if (t.linked() && t.ratio() <= r_hi) {
                    st = t;
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            // coarse trim overshoots; take it and repair with an s-step below
            for (int i : {0, 1}) {
                PairState<S> t = st;
                t.push_u(i);
                if (t.linked()) {
                    st = t;
                    moved = true;
                    break;
                }
            }
            if (!moved) throw RefinementFailure("refine_to_window: no valid u-trim");
            continue;
        }
        // ratio above r_hi: an s-shrink is needed; only legal if it keeps
        // the s-norm at or above the window floor
        {
            bool moved = false;
            for (int j : {1, 0}) {
                PairState<S> t = st;
                t.push_s(j);
                if (t.linked() && t.snorm() >= s_lo) {
                    st = t;
                    moved = true;
                    break;
                }
            }
            if (!moved)
                throw RefinementFailure("refine_to_window: ratio high but s-window floor blocks");
        }
    }
}

// State of one generation of the inductive construction.
template <class S> struct LinkedState {
    Code u_code, s_code;
    Box2<S> u_box, s_box;      // untranslated boxes
    Point2<S> delta_accum;     // cumulative translation at this generation
    Point2<S> step_delta;      // the delta chosen at this generation
    long k = 0;
};

template <class S> struct LinkedSequence {
    std::vector<LinkedState<S>> states;
    std::vector<Point2<S>> deltas; // delta_1 ... delta_k
    Point2<S> delta_total{};
};

// The inductive construction: from the pure-1 seed pair, per generation a
// translation delta_k aligns the covering-frame intervals with the centers of
// the restricted-rectangle overlaps, both children pairs are split off (the
// 1-children are the generation's output, the 0-children continue), and the
// covering refinement descends to the next size window.
template <class S>
LinkedSequence<S> build_linked_sequence(const Branches<S>& br, const BlenderFrames<S>& fr,
                                        const S& eps, int k_max) {
    if (!(eps > S(0))) throw RefinementFailure("build_linked_sequence: eps must be positive");
    const auto& p = br.par;
    const S r_hi = S(1);
    // ratio floor keeping both the parent and its 1-children proportional
    const S r_lo = (S(1) / p.lambda_cu0) / (p.lambda_cs1 * p.lambda_cu1);

    LinkedSequence<S> seq;
    PairState<S> st(br, fr);

    // seed: pure-1 pair with |s| in [lcs0^2/2, lcs0/2) * eps and ratio landed
    S s_hi = p.lambda_cs0 / 2 * eps;
    S s_lo = p.lambda_cs0 * s_hi;
    while (st.snorm() >= s_hi) st.push_s(1);
    if (st.snorm() < s_lo) throw RefinementFailure("seed: s-window missed");
    while (st.ratio() <= r_lo) st.push_u(1);
    if (st.ratio() > r_hi) throw RefinementFailure("seed: ratio window missed");
    if (!st.linked()) throw RefinementFailure("seed: pure-1 pair not linked");

    for (int k = 1; k <= k_max; ++k) {
        // translation: center J in the overlap of P(R_0), P(R_1) and Jp in
        // the overlap of Q(Rt_0), Q(Rt_1)
        Interval<S> J = st.J(), Jp = st.Jp();
        S dx = (fr.P_overlap.mid() - J.mid()) * st.uchain.x.m;
        Affine1<S> back = br.fstar.y.after(st.schain.y);
        S dy = -(fr.Q_overlap.mid() - Jp.mid()) * back.m;
        Point2<S> delta{dx, dy};
        st.D.x += dx;
        st.D.y += dy;
        if (!st.linked()) throw RefinementFailure("split: translated parent lost linkedness");

        // children: 0-children continue the construction, 1-children are
        // the generation-k output
        PairState<S> out = st, cont = st;
        out.push_u(1);
        out.push_s(1);
        cont.push_u(0);
        cont.push_s(0);
        if (!out.linked() || !cont.linked())
            throw RefinementFailure("split: a child pair lost linkedness");
        if (!out.proportional())
            throw RefinementFailure("split: output pair not kappa-proportional");

        LinkedState<S> ls;
        ls.u_code = out.a;
        ls.s_code = out.w;
        ls.u_box = out.ubox();
        ls.s_box = out.sbox();
        ls.delta_accum = st.D;
        ls.step_delta = delta;
        ls.k = k;
        seq.states.push_back(ls);
        seq.deltas.push_back(delta);

        if (k == k_max) break;
        // claim window for the next generation, relative to the 0-child
        S base = cont.snorm();
        S w_hi = p.lambda_cs0 * p.xi0 / 8 * base;
        S w_lo = p.lambda_cs0 * w_hi;
        st = cont;
        refine_to_window(st, w_lo, w_hi, r_lo, r_hi);
    }
    seq.delta_total = seq.states.empty() ? Point2<S>{} : seq.states.back().delta_accum;
    return seq;
}

} // namespace tanglab

#endif
