#ifndef TANGLAB_PARAMS_HPP
#define TANGLAB_PARAMS_HPP

#include "tanglab/rational.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tanglab {

// All constants of the construction.  Free fields come from the model
// definition; derived fields are filled in by derive_constants().
template <class S> struct Params {
    // stable / unstable rates
    S lambda_s{}, lambda_cs0{}, lambda_cs1{};
    S lambda_cu1{}, lambda_cu0{}, lambda_u{};
    // tangency-map coefficients and parameters
    S lambda_star{}, mu_star{};
    S a1{}, a2{};
    S delta{};      // half-width of V_* in x_u, y_u
    S c{};          // blender margin
    long L = 0;     // perturbation-scale exponent
    long r = 1;     // smoothness order

    // derived
    S a_cu{}, a_u{}, a_s{}, a_cs{};
    S xi0{};
    long N_u = 0, N_s = 0;
    bool derived = false;
};

struct BadParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Smallest integer n >= 0 with base^n <= target (0 < base < 1, target > 0).
inline long smallest_power_below(const Rat& base, const Rat& target) {
    if (!(base > 0 && base < 1) || !(target > 0)) throw BadParams("smallest_power_below: bad input");
    long n = 0;
    Rat v(1);
    while (v > target) {
        v *= base;
        ++n;
        if (n > 100000) throw BadParams("smallest_power_below: no solution below 1e5");
    }
    return n;
}

template <class S> Params<S> derive_constants(Params<S> p);

// Exact derivation.  N_s and N_u are the smallest integers satisfying the
// Lemma ll growth inequalities; they are found by exact rational power
// comparison, which can only agree with or exceed the real-log ceiling.
template <> inline Params<Rat> derive_constants(Params<Rat> p) {
    if (p.lambda_cu0 == 1 || p.lambda_u == 1 || p.lambda_s == 1 || p.lambda_cs0 == 1)
        throw BadParams("derive_constants: rate at forbidden boundary value");
    p.a_cu = 1 / (1 - 1 / p.lambda_cu0);
    p.a_u = 1 / (1 - 1 / p.lambda_u);
    p.a_s = 1 / (1 - p.lambda_s);
    p.a_cs = 1 / (1 - p.lambda_cs0);
    p.xi0 = (-1 + p.lambda_cs1 * p.a_s) / 3;
    if (!(p.xi0 > 0)) throw BadParams("derive_constants: xi0 <= 0");
    // N_s: smallest N with lambda_cs1^N <= lambda_cs0^3 * xi0 / 8
    Rat t_s = spow(p.lambda_cs0, 3) * p.xi0 / 8;
    p.N_s = smallest_power_below(p.lambda_cs1, t_s);
    // N_u: smallest N with lambda_cu1^N >= (lambda_cs0^3 * xi0 / (8 lambda_cu0))^-1
    Rat t_u = t_s / p.lambda_cu0;
    p.N_u = smallest_power_below(1 / p.lambda_cu1, t_u);
    if (p.L <= 0) p.L = p.N_s * p.r + 1; // minimal L with lambda_s^L < lambda_s^(N_s r)
    p.derived = true;
    return p;
}

template <> inline Params<double> derive_constants(Params<double> p) {
    p.a_cu = 1 / (1 - 1 / p.lambda_cu0);
    p.a_u = 1 / (1 - 1 / p.lambda_u);
    p.a_s = 1 / (1 - p.lambda_s);
    p.a_cs = 1 / (1 - p.lambda_cs0);
    p.xi0 = (-1 + p.lambda_cs1 * p.a_s) / 3;
    double t_s = p.lambda_cs0 * p.lambda_cs0 * p.lambda_cs0 * p.xi0 / 8;
    long n = 0;
    for (double v = 1; v > t_s; v *= p.lambda_cs1) ++n;
    p.N_s = n;
    n = 0;
    for (double v = 1; v > t_s / p.lambda_cu0; v *= p.lambda_cu1) ++n;
    p.N_u = n;
    if (p.L <= 0) p.L = p.N_s * p.r + 1;
    p.derived = true;
    return p;
}

inline Params<double> to_double_params(const Params<Rat>& p) {
    Params<double> d;
    d.lambda_s = to_double(p.lambda_s);
    d.lambda_cs0 = to_double(p.lambda_cs0);
    d.lambda_cs1 = to_double(p.lambda_cs1);
    d.lambda_cu1 = to_double(p.lambda_cu1);
    d.lambda_cu0 = to_double(p.lambda_cu0);
    d.lambda_u = to_double(p.lambda_u);
    d.lambda_star = to_double(p.lambda_star);
    d.mu_star = to_double(p.mu_star);
    d.a1 = to_double(p.a1);
    d.a2 = to_double(p.a2);
    d.delta = to_double(p.delta);
    d.c = to_double(p.c);
    d.L = p.L;
    d.r = p.r;
    d.a_cu = to_double(p.a_cu);
    d.a_u = to_double(p.a_u);
    d.a_s = to_double(p.a_s);
    d.a_cs = to_double(p.a_cs);
    d.xi0 = to_double(p.xi0);
    d.N_u = p.N_u;
    d.N_s = p.N_s;
    d.derived = p.derived;
    return d;
}

struct ConstraintResult {
    std::string name;
    bool pass = false;
    std::string lhs, rhs; // the two sides' values, printed exactly
};

struct ValidationReport {
    std::vector<ConstraintResult> constraints;
    bool all_pass() const {
        for (auto& c : constraints)
            if (!c.pass) return false;
        return true;
    }
    const ConstraintResult* find(const std::string& name) const {
        for (auto& c : constraints)
            if (c.name == name) return &c;
        return nullptr;
    }
};

// The full inequality ledger, checked in exact rational arithmetic so that
// no verdict depends on a tolerance.
inline ValidationReport validate(const Params<Rat>& p) {
    if (!p.derived) throw BadParams("validate: derive_constants first");
    ValidationReport rep;
    auto add = [&](const std::string& name, bool pass, const Rat& lhs, const Rat& rhs) {
        rep.constraints.push_back({name, pass, lhs.str(), rhs.str()});
    };

    add("ordering-u",
        1 < p.lambda_cu1 && p.lambda_cu1 < 2 && 2 < p.lambda_cu0 && p.lambda_cu0 < p.lambda_u,
        p.lambda_cu1, p.lambda_u);
    add("ordering-s",
        0 < p.lambda_s && p.lambda_s < p.lambda_cs0 && p.lambda_cs0 < Rat(1, 2) &&
            Rat(1, 2) < p.lambda_cs1 && p.lambda_cs1 < 1,
        p.lambda_s, p.lambda_cs1);
    add("cover-u", 1 / p.lambda_cu0 + 1 / p.lambda_cu1 > 1, 1 / p.lambda_cu0 + 1 / p.lambda_cu1,
        Rat(1));
    add("cover-s", p.lambda_cs0 + p.lambda_cs1 > 1, p.lambda_cs0 + p.lambda_cs1, Rat(1));
    {
        Rat lhs = p.lambda_cs0 * p.lambda_cs1 * p.lambda_u * p.lambda_u;
        add("contraction", lhs < 1, lhs, Rat(1));
    }
    {
        Rat v = p.lambda_cs0 * p.lambda_u * p.lambda_u;
        add("claim-window", 1 < v && v < 2, v, Rat(2));
    }
    {
        Rat lhs = p.lambda_cu0 * p.lambda_cu1 * p.lambda_s * p.lambda_s;
        add("contraction-dual", lhs < 1, lhs, Rat(1));
    }
    {
        Rat rhs = (-2 + 1 / p.lambda_cu0 + p.a_u / p.lambda_cu1) / 4;
        add("star-lambda", rhs > 0 && 1 / p.lambda_star < rhs, 1 / p.lambda_star, rhs);
    }
    {
        Rat rhs = (-2 + p.lambda_cs1 + p.lambda_cs1 * p.a_s) / 4;
        add("star-mu", rhs > 0 && 1 / p.mu_star < rhs, 1 / p.mu_star, rhs);
    }
    {
        Rat b1 = 1 / (2 * (1 - 2 / p.lambda_u));
        Rat b2 = 2 * p.lambda_s / p.delta;
        add("tangency-params", p.a1 > b1 && 0 < p.a2 && p.a2 < b2, p.a1, b1);
    }
    add("delta-range", 0 < p.delta && p.delta < 1 - 2 / p.lambda_u, p.delta, 1 - 2 / p.lambda_u);
    add("blender-margin", p.lambda_cs0 + p.lambda_cs1 > 1 / (1 - p.c), p.lambda_cs0 + p.lambda_cs1,
        1 / (1 - p.c));
    add("aux-1", p.lambda_u * p.lambda_cs1 > 1, p.lambda_u * p.lambda_cs1, Rat(1));
    add("aux-2", p.lambda_u * p.lambda_cs0 < 1, p.lambda_u * p.lambda_cs0, Rat(1));
    add("aux-3", p.lambda_cu1 * p.lambda_cs1 < 1, p.lambda_cu1 * p.lambda_cs1, Rat(1));
    add("xi0-positive", p.xi0 > 0, p.xi0, Rat(0));
    {
        bool ok = p.a_cu == 1 / (1 - 1 / p.lambda_cu0) && p.a_u == 1 / (1 - 1 / p.lambda_u) &&
                  p.a_s == 1 / (1 - p.lambda_s) && p.a_cs == 1 / (1 - p.lambda_cs0) &&
                  p.xi0 == (-1 + p.lambda_cs1 * p.a_s) / 3;
        add("derived-formulas", ok, p.a_cu, 1 / (1 - 1 / p.lambda_cu0));
    }
    {
        // lambda_s^L < lambda_s^(N_s r)  <=>  L > N_s * r
        bool ok = spow(p.lambda_s, p.L) < spow(p.lambda_s, p.N_s * p.r);
        add("L-scale", ok, Rat(p.L), Rat(p.N_s * p.r));
    }
    return rep;
}

// The frozen admissible parameter point used by every downstream test.  The
// constraint region is thin; this set was found by constraint search and is
// stored in exact rationals.
inline Params<Rat> reference_instance() {
    Params<Rat> p;
    p.lambda_s = Rat(29, 100);
    p.lambda_cs0 = Rat(292, 1000);
    p.lambda_cs1 = Rat(835, 1000);
    p.lambda_cu1 = Rat(105, 100);
    p.lambda_cu0 = Rat(201, 100);
    p.lambda_u = Rat(202, 100);
    p.lambda_star = Rat(16);
    p.mu_star = Rat(400);
    p.a1 = Rat(60);
    p.a2 = Rat(1);
    p.delta = Rat(9, 1000);
    p.c = Rat(1, 10);
    p.r = 1;
    p.L = 0; // filled with the minimal valid value by derive_constants
    return derive_constants(p);
}

// --- flat key = value serialization ------------------------------------

inline std::string serialize(const Params<Rat>& p) {
    std::ostringstream os;
    os << "lambda_s = " << p.lambda_s << "\n";
    os << "lambda_cs0 = " << p.lambda_cs0 << "\n";
    os << "lambda_cs1 = " << p.lambda_cs1 << "\n";
    os << "lambda_cu1 = " << p.lambda_cu1 << "\n";
    os << "lambda_cu0 = " << p.lambda_cu0 << "\n";
    os << "lambda_u = " << p.lambda_u << "\n";
    os << "lambda_star = " << p.lambda_star << "\n";
    os << "mu_star = " << p.mu_star << "\n";
    os << "a1 = " << p.a1 << "\n";
    os << "a2 = " << p.a2 << "\n";
    os << "delta = " << p.delta << "\n";
    os << "c = " << p.c << "\n";
    os << "L = " << p.L << "\n";
    os << "r = " << p.r << "\n";
    return os.str();
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Reads the flat format, one "key = value" per line, '#' comments allowed.
// Unknown keys are errors so that typos do not silently validate defaults.
inline Params<Rat> parse_params(std::istream& in) {
    Params<Rat> p;
    p.L = 0;
    std::map<std::string, bool> seen;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw BadParams("parse_params: missing '=' in: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto rv = parse_rational(val);
        if (!rv) throw BadParams("parse_params: bad value for " + key + ": " + val);
        seen[key] = true;
        if (key == "lambda_s") p.lambda_s = *rv;
        else if (key == "lambda_cs0") p.lambda_cs0 = *rv;
        else if (key == "lambda_cs1") p.lambda_cs1 = *rv;
        else if (key == "lambda_cu1") p.lambda_cu1 = *rv;
        else if (key == "lambda_cu0") p.lambda_cu0 = *rv;
        else if (key == "lambda_u") p.lambda_u = *rv;
        else if (key == "lambda_star") p.lambda_star = *rv;
        else if (key == "mu_star") p.mu_star = *rv;
        else if (key == "a1") p.a1 = *rv;
        else if (key == "a2") p.a2 = *rv;
        else if (key == "delta") p.delta = *rv;
        else if (key == "c") p.c = *rv;
        else if (key == "L") p.L = rv->convert_to<long>();
        else if (key == "r") p.r = rv->convert_to<long>();
        else throw BadParams("parse_params: unknown key " + key);
    }
    const char* required[] = {"lambda_s",  "lambda_cs0", "lambda_cs1", "lambda_cu1",
                              "lambda_cu0", "lambda_u",  "lambda_star", "mu_star",
                              "a1",        "a2",         "delta",      "c"};
    for (auto k : required)
        if (!seen[k]) throw BadParams(std::string("parse_params: missing key ") + k);
    return derive_constants(p);
}

} // namespace tanglab

#endif
