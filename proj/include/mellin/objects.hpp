#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"
#include "mellin/series.hpp"

namespace mellin {

enum class Point { Zero, Finite, Infinity };

inline const char* point_name(Point p) {
    switch (p) {
        case Point::Zero: return "zero";
        case Point::Finite: return "x";
        case Point::Infinity: return "infinity";
    }
    return "?";
}

// The local coordinate used at each expansion point.
inline Var point_var(Point p) {
    switch (p) {
        case Point::Zero: return Var::Z;
        case Point::Finite: return Var::Zx;
        case Point::Infinity: return Var::Zeta;
    }
    return Var::Z;
}

// One indecomposable summand: exponential part f (or operator symbol g) with a
// unipotent block of size m; the field degree is the series' own ramification.
template <class K>
struct Component {
    Series<K> f;
    long long m = 1;

    long long ram() const { return f.ram; }
};

template <class K>
struct ConnectionObject {
    Point point = Point::Zero;
    std::optional<K> x;  // expansion point, Finite only
    std::vector<Component<K>> components;
};

template <class K>
struct DiffOpObject {
    std::vector<Component<K>> components;
};

enum class OperatorExpr { Nabla, ZNabla, ZNablaInverse, Phi, ThetaPhiInverse };

inline const char* operator_expr_name(OperatorExpr e) {
    switch (e) {
        case OperatorExpr::Nabla: return "nabla";
        case OperatorExpr::ZNabla: return "znabla";
        case OperatorExpr::ZNablaInverse: return "znabla-inv";
        case OperatorExpr::Phi: return "phi";
        case OperatorExpr::ThetaPhiInverse: return "thetaphi-inv";
    }
    return "?";
}

// Exact symbolic norm epsilon^exponent; `value` is filled when the exponent is
// integral so the power is itself rational.
struct NormValue {
    Rational epsilon;
    Rational exponent;
    std::optional<Rational> value;
};

struct OrderEntry {
    Rational order;
    std::optional<NormValue> norm;
};

struct OrderReport {
    std::vector<OrderEntry> entries;
};

namespace detail {

// Reduces c modulo the additive lattice (1/q)Z into [0, 1/q).
inline Rational lattice_reduce(const Rational& c, long long q) {
    Rational scaled = c * q;
    return (scaled - Rational(rational_floor(scaled))) / q;
}

// Approx flavor: reduce the real part, snapping to the lattice within tolerance.
inline Complex lattice_reduce(const Complex& c, long long q) {
    Real y = c.re * q;
    Real frac = y - floor(y);
    Real eps = tolerance_real() * (Real(1) + abs(y));
    if (frac < eps || frac > 1 - eps) frac = 0;
    return Complex{frac / q, c.im};
}

template <class K>
int compare_scalar(const K& a, const K& b) {
    if (field_traits<K>::equal(a, b)) return 0;
    return field_traits<K>::less(a, b) ? -1 : 1;
}

// Total order on series: order exponent (zero series last), then ramification,
// then the term sequence (exponent, coefficient) lexicographically.
template <class K>
int compare_series(const Series<K>& x, const Series<K>& y) {
    bool xe = x.terms.empty(), ye = y.terms.empty();
    if (xe != ye) return xe ? 1 : -1;
    if (!xe && !ye) {
        Rational ox = x.ord(), oy = y.ord();
        if (ox != oy) return ox < oy ? -1 : 1;
    }
    if (x.ram != y.ram) return x.ram < y.ram ? -1 : 1;
    auto ia = x.terms.begin();
    auto ib = y.terms.begin();
    for (; ia != x.terms.end() && ib != y.terms.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
        int c = compare_scalar(ia->second, ib->second);
        if (c != 0) return c;
    }
    if (ia != x.terms.end()) return 1;
    if (ib != y.terms.end()) return -1;
    return 0;
}

template <class K>
bool component_less(const Component<K>& a, const Component<K>& b) {
    bool ae = a.f.terms.empty(), be = b.f.terms.empty();
    if (ae != be) return be;
    if (!ae && !be) {
        Rational oa = a.f.ord(), ob = b.f.ord();
        if (oa != ob) return oa < ob;
    }
    if (a.ram() != b.ram()) return a.ram() < b.ram();
    if (a.m != b.m) return a.m < b.m;
    return compare_series(a.f, b.f) < 0;
}

template <class K>
void sort_components(std::vector<Component<K>>& comps) {
    std::stable_sort(comps.begin(), comps.end(), component_less<K>);
}

template <class K>
void check_component(const Component<K>& c, Var expected) {
    if (c.f.var != expected)
        throw VarMismatch(std::string("component series must use variable '") +
                          var_name(expected) + "'");
    if (c.m < 1) throw std::invalid_argument("unipotent block size must be positive");
}

}  // namespace detail

// --- canonical representatives ------------------------------------------------

// Connection classes: positive exponents die in the quotient; the constant
// coefficient is reduced modulo (1/q)Z into [0, 1/q).  The result is exact.
template <class K>
Series<K> canonical_connection_series(const Series<K>& input) {
    Series<K> f = pruned(input);
    if (f.trunc && *f.trunc <= 0)
        throw InsufficientTruncation(
            "certified range must extend beyond exponent 0 to decide the class");
    Series<K> out(f.var, f.ram);
    for (auto& [k, c] : f.terms) {
        if (k > 0) continue;
        if (k == 0) {
            K r = detail::lattice_reduce(c, f.ram);
            if (!field_traits<K>::is_zero(r)) out.terms.emplace(0, r);
        } else {
            out.terms.emplace(k, c);
        }
    }
    return normalize_ram(out);
}

// Operator symbols: support is trimmed to the window [ord, ord+1] and the top
// coefficient is reduced so its ratio to the leading one lies in [0, 1/q).
template <class K>
Series<K> canonical_diffop_series(const Series<K>& input) {
    using FT = field_traits<K>;
    Series<K> g = pruned(input);
    if (g.terms.empty()) {
        if (g.trunc) throw InsufficientTruncation("no certified leading term");
        throw ZeroLeading("operator symbol must have a nonzero leading coefficient");
    }
    auto [l, a0] = g.leading();
    long long q = g.ram;
    if (g.trunc && *g.trunc <= l + q)
        throw InsufficientTruncation(
            "certified range must extend beyond the shift window to decide the class");
    Series<K> out(g.var, q);
    for (auto& [k, c] : g.terms) {
        if (k > l + q) continue;
        if (k == l + q) {
            K reduced = detail::lattice_reduce(c * FT::inverse(a0), q) * a0;
            if (!FT::is_zero(reduced)) out.terms.emplace(k, reduced);
        } else {
            out.terms.emplace(k, c);
        }
    }
    return normalize_ram(out);
}

template <class K>
ConnectionObject<K> canonicalize(const ConnectionObject<K>& e) {
    if (e.point == Point::Finite) {
        if (!e.x || field_traits<K>::is_zero(*e.x))
            throw std::invalid_argument("finite expansion point must be nonzero");
    } else if (e.x) {
        throw std::invalid_argument("expansion point coefficient only applies at a finite point");
    }
    ConnectionObject<K> out = e;
    for (auto& comp : out.components) {
        detail::check_component(comp, point_var(e.point));
        comp.f = canonical_connection_series(comp.f);
    }
    detail::sort_components(out.components);
    return out;
}

template <class K>
DiffOpObject<K> canonicalize(const DiffOpObject<K>& d) {
    DiffOpObject<K> out = d;
    for (auto& comp : out.components) {
        detail::check_component(comp, Var::Theta);
        comp.f = canonical_diffop_series(comp.f);
    }
    detail::sort_components(out.components);
    return out;
}

// --- Galois orbit -------------------------------------------------------------

// Applies coefficient-wise multiplication by the degree-q unit to the power
// j*k.  Exact mode returns nothing when some required unit is irrational.
template <class K>
std::optional<Series<K>> galois_act(const Series<K>& a, long long j, long long q) {
    using FT = field_traits<K>;
    Series<K> base = a.with_ram(q);
    Series<K> out(base.var, base.ram, base.trunc);
    for (auto& [k, c] : base.terms) {
        auto factor = FT::root_of_unity_factor(j * k, q);
        if (!factor) return std::nullopt;
        out.terms.emplace(k, c * *factor);
    }
    return out;
}

// Finds j in {0..q-1} with b_k = a_k * unit^(j*k) for all k, if any.
template <class K>
std::optional<long long> galois_witness(const Series<K>& a, const Series<K>& b, long long q) {
    using FT = field_traits<K>;
    if (q < 1) throw std::invalid_argument("field degree must be positive");
    Series<K> A = a.with_ram(q);  // throws RamMismatch when incompatible
    Series<K> B = b.with_ram(q);
    for (long long j = 0; j < q; ++j) {
        bool ok = true;
        auto ia = A.terms.begin();
        auto ib = B.terms.begin();
        while (ok && (ia != A.terms.end() || ib != B.terms.end())) {
            long long k;
            K av = FT::zero(), bv = FT::zero();
            if (ib == B.terms.end() || (ia != A.terms.end() && ia->first < ib->first)) {
                k = ia->first;
                av = ia->second;
                ++ia;
            } else if (ia == A.terms.end() || ib->first < ia->first) {
                k = ib->first;
                bv = ib->second;
                ++ib;
            } else {
                k = ia->first;
                av = ia->second;
                bv = ib->second;
                ++ia;
                ++ib;
            }
            auto factor = FT::root_of_unity_factor(j * k, q);
            if (!factor) {
                // Irrational unit: only a vanishing coefficient survives exactly.
                ok = FT::is_zero(av) && FT::is_zero(bv);
            } else {
                ok = FT::equal(bv, av * *factor);
            }
        }
        if (ok) return j;
    }
    return std::nullopt;
}

template <class K>
bool galois_equivalent(const Series<K>& a, const Series<K>& b, long long q) {
    return galois_witness(a, b, q).has_value();
}

// Stable display representative: the orbit element minimal in the sort order
// among those exactly representable.
template <class K>
Series<K> galois_orbit_min(const Series<K>& a, long long q) {
    Series<K> best = a.with_ram(q);
    for (long long j = 1; j < q; ++j) {
        auto img = galois_act(a, j, q);
        if (img && detail::compare_series(*img, best) < 0) best = *img;
    }
    return normalize_ram(best);
}

enum class ClassFlavor { Connection, DiffOp };

// Free-action criterion: the class cannot be presented over a smaller field
// exactly when no nontrivial unit power fixes every supported exponent.
template <class K>
bool is_primitive(const Series<K>& a, long long q, ClassFlavor /*flavor*/ = ClassFlavor::Connection) {
    if (q < 1) throw std::invalid_argument("field degree must be positive");
    Series<K> A = a.with_ram(q);
    long long g = q;
    for (auto& [k, c] : A.terms) g = llgcd(g, k < 0 ? -k : k);
    return g == 1;
}

// --- object-level comparisons -------------------------------------------------

namespace detail {

template <class K>
bool components_match(const std::vector<Component<K>>& lhs, const std::vector<Component<K>>& rhs) {
    if (lhs.size() != rhs.size()) return false;
    std::vector<bool> used(rhs.size(), false);
    for (const auto& a : lhs) {
        bool found = false;
        for (std::size_t i = 0; i < rhs.size() && !found; ++i) {
            if (used[i]) continue;
            const auto& b = rhs[i];
            if (a.m != b.m || a.ram() != b.ram()) continue;
            if (galois_equivalent(a.f, b.f, a.ram())) {
                used[i] = true;
                found = true;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace detail

template <class K>
bool iso_equivalent(const ConnectionObject<K>& o1, const ConnectionObject<K>& o2) {
    if (o1.point != o2.point)
        throw KindMismatch("objects expand at different points");
    if (o1.point == Point::Finite) {
        if (!o1.x || !o2.x || !field_traits<K>::equal(*o1.x, *o2.x))
            throw KindMismatch("objects expand at different finite points");
    }
    ConnectionObject<K> a = canonicalize(o1);
    ConnectionObject<K> b = canonicalize(o2);
    return detail::components_match(a.components, b.components);
}

template <class K>
bool iso_equivalent(const DiffOpObject<K>& o1, const DiffOpObject<K>& o2) {
    DiffOpObject<K> a = canonicalize(o1);
    DiffOpObject<K> b = canonicalize(o2);
    return detail::components_match(a.components, b.components);
}

template <class K>
ConnectionObject<K> direct_sum(const ConnectionObject<K>& o1, const ConnectionObject<K>& o2) {
    if (o1.point != o2.point)
        throw KindMismatch("cannot sum objects expanding at different points");
    if (o1.point == Point::Finite) {
        if (!o1.x || !o2.x || !field_traits<K>::equal(*o1.x, *o2.x))
            throw KindMismatch("cannot sum objects at different finite points");
    }
    ConnectionObject<K> out = o1;
    out.components.insert(out.components.end(), o2.components.begin(), o2.components.end());
    detail::sort_components(out.components);
    return out;
}

template <class K>
DiffOpObject<K> direct_sum(const DiffOpObject<K>& o1, const DiffOpObject<K>& o2) {
    DiffOpObject<K> out = o1;
    out.components.insert(out.components.end(), o2.components.begin(), o2.components.end());
    detail::sort_components(out.components);
    return out;
}

// --- spectral orders ----------------------------------------------------------

namespace detail {

inline OrderEntry make_entry(const Rational& order, const std::optional<Rational>& eps) {
    OrderEntry entry{order, std::nullopt};
    if (eps) {
        if (!(*eps > 0 && *eps < 1))
            throw std::invalid_argument("norm base must lie strictly between 0 and 1");
        NormValue norm{*eps, order, std::nullopt};
        if (denominator(order) == 1)
            norm.value = pow_int(*eps, static_cast<long long>(numerator(order)));
        entry.norm = norm;
    }
    return entry;
}

}  // namespace detail

template <class K>
OrderReport order_report(const ConnectionObject<K>& e, OperatorExpr expr,
                         std::optional<Rational> eps = std::nullopt) {
    ConnectionObject<K> canon = canonicalize(e);
    OrderReport report;
    for (const auto& comp : canon.components) {
        if (comp.f.terms.empty())
            throw HorizontalSection(
                "component has trivial class; the operator order formulas do not apply");
        Rational lam = comp.f.ord();
        Rational order;
        bool finite = canon.point == Point::Finite;
        switch (expr) {
            case OperatorExpr::Nabla: order = lam - 1; break;
            case OperatorExpr::ZNabla: order = finite ? Rational(lam - 1) : lam; break;
            case OperatorExpr::ZNablaInverse:
                order = finite ? Rational(1 - lam) : Rational(-lam);
                break;
            case OperatorExpr::Phi:
            case OperatorExpr::ThetaPhiInverse:
                throw KindMismatch("shift-operator expressions apply to operator objects");
        }
        report.entries.push_back(detail::make_entry(order, eps));
    }
    return report;
}

template <class K>
OrderReport order_report(const DiffOpObject<K>& d, OperatorExpr expr,
                         std::optional<Rational> eps = std::nullopt) {
    DiffOpObject<K> canon = canonicalize(d);
    OrderReport report;
    for (const auto& comp : canon.components) {
        Rational lam = comp.f.ord();  // canonical symbols are nonzero
        Rational order;
        switch (expr) {
            case OperatorExpr::Phi: order = lam; break;
            case OperatorExpr::ThetaPhiInverse: order = -lam - 1; break;
            case OperatorExpr::Nabla:
            case OperatorExpr::ZNabla:
            case OperatorExpr::ZNablaInverse:
                throw KindMismatch("connection expressions apply to connection objects");
        }
        report.entries.push_back(detail::make_entry(order, eps));
    }
    return report;
}

}  // namespace mellin
