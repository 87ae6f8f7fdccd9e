#ifndef TANGLAB_STATISTICS_HPP
#define TANGLAB_STATISTICS_HPP

#include "tanglab/perturbation.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tanglab {

// Era schedule: greedy-minimal increasing sequence k_s with
// sum_{k=k_s}^{k_{s+1}-1} k^2  >  s * sum_{k=k_1}^{k_s - 1} k^2.
struct EraSchedule {
    std::vector<long> k_start; // k_1, k_2, ..., k_{s_max+1}

    static EraSchedule build(long s_max, long k1 = 1) {
        EraSchedule es;
        es.k_start.push_back(k1);
        auto sq = [](long a) { return double(a) * double(a); };
        double before = 0; // sum_{k=k1}^{k_s - 1} k^2
        for (long s = 1; s <= s_max; ++s) {
            long ks = es.k_start.back();
            double block = 0;
            long k = ks;
            while (!(block > double(s) * before)) {
                block += sq(k);
                ++k;
            }
            es.k_start.push_back(k);
            before += block;
        }
        return es;
    }

    // era index s >= 1 with k_s <= k < k_{s+1}; k below k_1 counts as era 1
    long era_of(long k) const {
        long s = 1;
        for (size_t i = 1; i + 1 < k_start.size(); ++i)
            if (k >= k_start[i]) s = long(i) + 1;
        return s;
    }
    long eras() const { return long(k_start.size()) - 1; }
};

// Code condition: 0-runs of length floor(3k^2/4) (odd eras) or floor(7k^2/8)
// (even eras), then 1s up to total length k^2.
inline Code code_condition_u(long k, const EraSchedule& es) {
    long s = es.era_of(k);
    long k2 = k * k;
    long zeros = (s % 2 == 1) ? (3 * k2) / 4 : (7 * k2) / 8;
    Code c = Code::run(0, size_t(zeros));
    for (long i = zeros; i < k2; ++i) c.push_back(1);
    return c;
}

inline Code convergent_condition_u(long k) { return Code::run(0, size_t(k * k)); }

// generic orbit stream by naive iteration; throws OutsideDomain with the
// step index in the message if the orbit escapes
template <class S>
std::vector<Point4<S>> simulate_orbit(const Point4<S>& x0, long n_steps,
                                      const PerturbationSchedule<S>& sch,
                                      const Branches<S>& br) {
    std::vector<Point4<S>> out;
    out.reserve(size_t(n_steps) + 1);
    out.push_back(x0);
    Point4<S> x = x0;
    for (long i = 0; i < n_steps; ++i) {
        try {
            x = G_map(sch, br, x);
        } catch (const OutsideDomain&) {
            throw OutsideDomain("simulate_orbit: escaped at step " + std::to_string(i + 1));
        }
        out.push_back(x);
    }
    return out;
}

// One emitted orbit sample of the block-structured return orbit.
struct OrbitSample {
    long n = 0;          // time index
    double xu = 0, yu = 0, xs = 0, ys = 0;
    Region region = Region::Outside;
    long block = 0;      // block index k
    long era = 0;
};

// Streams the orbit of the block center c_K through the blocks of a
// GammaSchedule.  Positions are evaluated through the branch decomposition
// (backward for the expanding directions), which is numerically stable;
// naive forward iteration of F in floating point loses the cylinder after a
// few dozen steps.  Mathematically the stream is exactly the G-orbit of c_K.
class ReturnOrbit {
public:
    template <class S>
    ReturnOrbit(const GammaSchedule<S>& g, const EraSchedule& eras, long first_block)
        : eras_(eras), first_(first_block) {
        par_ = WanderingLabParams(g.par);
        for (long k = first_block; k <= g.k_max(); ++k)
            blocks_.push_back(g.blocks[size_t(k - 1)].gamma);
        br_ = std::make_unique<Branches<double>>(par_);
    }

    // visit(sample) is called once per orbit point, in order
    void stream(const std::function<void(const OrbitSample&)>& visit) const {
        long n = 0;
        for (size_t b = 0; b < blocks_.size(); ++b) {
            const Code& g = blocks_[b];
            size_t m = g.size();
            // backward pass: tail-cylinder centers
            std::vector<Point2<double>> c(m + 1);
            c[m] = {0, 0};
            for (size_t i = m; i-- > 0;) c[i] = br_->phi[g[i]](c[i + 1]);
            Point2<double> s{0, 0};
            long k = first_ + long(b);
            for (size_t i = 0; i < m; ++i) {
                OrbitSample smp;
                smp.n = n++;
                smp.xu = c[i].x;
                smp.yu = c[i].y;
                smp.xs = s.x;
                smp.ys = s.y;
                smp.region = g[i] ? Region::V1 : Region::V0;
                smp.block = k;
                smp.era = eras_.era_of(k);
                visit(smp);
                s = br_->psi[g[i]](s);
            }
            OrbitSample smp;
            smp.n = n++;
            smp.xu = 0;
            smp.yu = 0;
            smp.xs = s.x;
            smp.ys = s.y;
            smp.region = Region::VStar;
            smp.block = k;
            smp.era = eras_.era_of(k);
            visit(smp);
            // the aligned tangency step lands exactly on the next center
        }
    }

    long total_steps() const {
        long n = 0;
        for (auto& g : blocks_) n += long(g.size()) + 1;
        return n;
    }

private:
    static Params<double> WanderingLabParams(const Params<Rat>& p) { return to_double_params(p); }
    static Params<double> WanderingLabParams(const Params<double>& p) { return p; }

    EraSchedule eras_;
    long first_;
    Params<double> par_;
    std::vector<Code> blocks_;
    std::unique_ptr<Branches<double>> br_;
};

// Partial Birkhoff averages A_n with compensated accumulation.
struct EmpiricalSeries {
    std::vector<long> times;       // subsampled time indices
    std::vector<double> averages;  // A_n at those times
    std::vector<long> era_marks;   // indices n where the era changes
    std::vector<double> era_end_averages;
    double final_average = 0;
    long total = 0;
    double tail_min = 0, tail_max = 0; // over the last half of the run
    bool rigor_flag = false;           // carried from the schedule
};

template <class Phi>
EmpiricalSeries partial_averages(const ReturnOrbit& orbit, Phi&& phi, long subsample_target = 4000) {
    EmpiricalSeries es;
    long N = orbit.total_steps();
    es.total = N;
    long stride = std::max<long>(1, N / subsample_target);
    double sum = 0, comp = 0; // Kahan
    long last_era = -1;
    double tail_min = 1e300, tail_max = -1e300;
    orbit.stream([&](const OrbitSample& s) {
        double v = phi(s);
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        double a = sum / double(s.n + 1);
        if (s.era != last_era) {
            if (last_era >= 0) {
                es.era_marks.push_back(s.n);
                es.era_end_averages.push_back(es.final_average);
            }
            last_era = s.era;
        }
        if (s.n % stride == 0 || s.n + 1 == N) {
            es.times.push_back(s.n);
            es.averages.push_back(a);
        }
        if (2 * s.n >= N) {
            tail_min = std::min(tail_min, a);
            tail_max = std::max(tail_max, a);
        }
        es.final_average = a;
    });
    es.era_end_averages.push_back(es.final_average);
    es.tail_min = tail_min;
    es.tail_max = tail_max;
    return es;
}

enum class Verdict { Historic, Convergent, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Historic: return "historic";
    case Verdict::Convergent: return "convergent";
    default: return "inconclusive";
    }
}

struct DichotomyReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<double> gaps;   // era-boundary average gaps
    double first_gap = 0;
    double tail_oscillation = 0;
    double limit = 0;
    std::string detail;
};

// historic: alternating era-boundary gaps, each at least half the first gap;
// convergent: tail oscillation below tol and limit near the target value
inline DichotomyReport dichotomy_report(const EmpiricalSeries& es, double convergent_target,
                                        double osc_tol = 1e-3, double target_tol = 1e-2,
                                        long min_eras = 3, long min_steps = 10000) {
    DichotomyReport rep;
    rep.tail_oscillation = es.tail_max - es.tail_min;
    rep.limit = es.final_average;
    const auto& ea = es.era_end_averages;
    for (size_t i = 0; i + 1 < ea.size(); ++i) rep.gaps.push_back(ea[i + 1] - ea[i]);
    if (long(rep.gaps.size()) >= min_eras - 1 && rep.gaps.size() >= 2) {
        rep.first_gap = rep.gaps[0];
        bool alternating = rep.first_gap != 0;
        bool big = true;
        for (size_t i = 0; i + 1 < rep.gaps.size(); ++i)
            if (rep.gaps[i] * rep.gaps[i + 1] >= 0) alternating = false;
        for (double g : rep.gaps)
            if (std::fabs(g) < std::fabs(rep.first_gap) / 2) big = false;
        if (alternating && big) {
            rep.verdict = Verdict::Historic;
            rep.detail = "era-boundary averages alternate";
            return rep;
        }
    }
    if (es.total >= min_steps && rep.tail_oscillation < osc_tol &&
        std::fabs(rep.limit - convergent_target) < target_tol) {
        rep.verdict = Verdict::Convergent;
        rep.detail = "tail oscillation below tolerance";
        return rep;
    }
    rep.verdict = Verdict::Inconclusive;
    return rep;
}

} // namespace tanglab

#endif
