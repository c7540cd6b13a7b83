#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"
#include "mellin/objects.hpp"
#include "mellin/series.hpp"

namespace mellin {

// ---------------------------------------------------------------------------
// Local Mellin transforms between connection classes and difference-operator
// classes, in three flavors indexed by the singular point (0, x, infinity),
// together with their inverses and the target-category membership tests.
// ---------------------------------------------------------------------------

enum class TransformKind { M0inf, Mxinf, Minfinf, InvM0inf, InvMxinf, InvMinfinf };

inline const char* transform_kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::M0inf: return "0-inf";
        case TransformKind::Mxinf: return "x-inf";
        case TransformKind::Minfinf: return "inf-inf";
        case TransformKind::InvM0inf: return "inv-0-inf";
        case TransformKind::InvMxinf: return "inv-x-inf";
        case TransformKind::InvMinfinf: return "inv-inf-inf";
    }
    return "?";
}

inline bool transform_is_inverse(TransformKind k) {
    return k == TransformKind::InvM0inf || k == TransformKind::InvMxinf ||
           k == TransformKind::InvMinfinf;
}

struct TransformOptions {
    long long margin = 2;  // extra certified exponent units beyond the class window
    long long branch = 0;  // which root to take whenever a radical is needed
};

namespace detail {

inline long long transform_base_units(const TransformOptions& opt) {
    if (opt.margin < 0) throw std::invalid_argument("working margin must be non-negative");
    // Start shallow: the canonicalizers raise InsufficientTruncation when the
    // class window is not certified, and with_depth_retry doubles the depth.
    return 6 + 2 * opt.margin;
}

// All pipelines track certified truncations; when the resulting window is too
// shallow to decide the canonical class, rerun with a deeper working depth.
template <class Fn>
auto with_depth_retry(Fn&& fn, long long wu0) -> decltype(fn(wu0)) {
    long long wu = wu0;
    for (int attempt = 0;; ++attempt) {
        try {
            return fn(wu);
        } catch (const InsufficientTruncation&) {
            if (attempt >= 3) throw;
            wu *= 2;
        }
    }
}

// x + var, as an exact degree-one polynomial.
template <class K>
Series<K> linear_shift(Var v, const K& x) {
    Series<K> out(v, 1);
    out.add_term(0, x);
    out.add_term(1, field_traits<K>::one());
    return out;
}

// Flavor 0 -> inf.  The defining system is f = -theta^(-1) with Phi acting as
// multiplication by z; solving it gives theta = -1/f, reverting gives
// z = h(theta), and the second-order correction produces the operator symbol.
template <class K>
Series<K> m0inf_series(const Series<K>& f, long long wu, long long branch) {
    using FT = field_traits<K>;
    if (f.terms.empty() || f.leading().first >= 0)
        throw SlopeNotPositive("exponential part must have negative order at zero");
    long long s = -f.leading().first;  // slope numerator over the ramification r
    long long r = f.ram;
    Series<K> theta = scalar_mul(-FT::one(), invert(f, wu));  // order s/r > 0
    Series<K> h = revert(theta, Var::Theta, branch, wu);      // z = h(theta), order r/s
    K croot = h.leading().second;  // the (-a)^(r/s) value consistent with the branch
    K ccorr = croot * FT::from_rational(Rational(r + s, 2 * s));
    Series<K> corr = Series<K>::monomial(Var::Theta, ccorr, s + r, s);  // theta^(1+r/s)
    return canonical_diffop_series(h - corr);
}

// Flavor x -> inf.  System: f = -(z_x/z) theta^(-1) with z = x + z_x, so
// theta = -z_x / ((x + z_x) f).  The regular-singular case (constant f) is the
// s = 0 instance of the same pipeline and its correction term vanishes.
template <class K>
Series<K> mxinf_series(const Series<K>& f, const K& x, long long wu, long long branch) {
    using FT = field_traits<K>;
    if (f.terms.empty())
        throw HorizontalSection("integer exponent class is trivial at a finite point");
    long long k0 = f.leading().first;
    if (k0 > 0) throw DomainMismatch("positive-order series is not a canonical class here");
    long long s = -k0;  // zero for the regular-singular case
    long long r = f.ram;
    Series<K> denom_inv = invert(linear_shift<K>(Var::Zx, x) * f, wu);
    Series<K> theta = shifted(denom_inv, -FT::one(), denom_inv.ram);  // times -z_x
    Series<K> h = revert(theta, Var::Theta, branch, wu);  // z_x = h(theta), order r/(r+s)
    Series<K> g = Series<K>::constant(Var::Theta, x) + h;
    if (s > 0) {
        K c = x * FT::from_rational(Rational(s, 2 * (s + r)));
        g = g + Series<K>::monomial(Var::Theta, c, 1, 1);
    }
    return canonical_diffop_series(g);
}

// Flavor inf -> inf.  Same system as the zero flavor but in the coordinate
// zeta = 1/z, so after reverting we additionally invert to express z itself.
template <class K>
Series<K> minfinf_series(const Series<K>& f, long long wu, long long branch) {
    using FT = field_traits<K>;
    if (f.terms.empty() || f.leading().first >= 0)
        throw SlopeNotPositive("exponential part must have negative order at infinity");
    long long s = -f.leading().first;
    long long r = f.ram;
    Series<K> theta = scalar_mul(-FT::one(), invert(f, wu));  // order s/r in zeta
    Series<K> ht = revert(theta, Var::Theta, branch, wu);     // zeta = h(theta), order r/s
    K croot = ht.leading().second;                            // (-a)^(r/s)
    Series<K> z = invert(ht, wu);                             // z = 1/zeta, order -r/s
    K ccorr = croot * FT::from_rational(Rational(r + s, 2 * s));
    Series<K> corr = Series<K>::monomial(Var::Theta, ccorr, s - r, s);  // theta^(1-r/s)
    return canonical_diffop_series(z - corr);
}

// Inverse of the zero flavor: rebuild z(theta) from the symbol plus its known
// correction term, revert back to theta(z), and read off f = -1/theta.
template <class K>
Series<K> inv_m0inf_series(const Series<K>& g, long long wu, long long branch) {
    using FT = field_traits<K>;
    auto [l, a0] = g.leading();
    if (l <= 0) throw OrderNotPositive("operator class must have positive order");
    long long p = l, q = g.ram;
    K c = a0 * FT::from_rational(Rational(p + q, 2 * q));
    Series<K> zs = g + Series<K>::monomial(Var::Theta, c, p + q, q);  // z(theta)
    Series<K> threv = revert(zs, Var::Z, branch, wu);                 // theta(z), order q/p
    Series<K> f = scalar_mul(-FT::one(), invert(threv, wu));
    return canonical_connection_series(f);
}

// Inverse of the x flavor.  Ramification one forces the regular-singular case,
// where the class is determined by alpha = -a_1/a_0 alone; otherwise undo the
// correction term, revert, and solve the defining system for f.
template <class K>
Series<K> inv_mxinf_series(const Series<K>& g, const K& x, long long wu, long long branch) {
    using FT = field_traits<K>;
    auto [l, a0] = g.leading();
    if (l != 0 || !field_traits<K>::equal(a0, x))
        throw DomainMismatch("class must have order zero with leading coefficient x");
    // In approximate mode the constant need only match x within tolerance, so
    // prune the sub-tolerance residue the subtraction leaves at exponent zero.
    Series<K> rest = pruned(g - Series<K>::constant(Var::Theta, x));
    if (rest.terms.empty())
        throw DomainMismatch("constant class is not in the image of the transform");
    if (g.ram == 1) {
        K alpha = -(rest.leading().second * FT::inverse(x));
        return canonical_connection_series(Series<K>::constant(Var::Zx, alpha));
    }
    long long Q = rest.ram;       // r + s
    long long r = rest.leading().first;  // order of g - x is r/(r+s)
    if (r <= 0 || r >= Q)
        throw DomainMismatch("fractional part must have order strictly between 0 and 1");
    long long s = Q - r;
    K ccorr = x * FT::from_rational(Rational(s, 2 * Q));
    Series<K> hrec = rest - Series<K>::monomial(Var::Theta, ccorr, Q, Q);
    Series<K> threv = revert(hrec, Var::Zx, branch, wu);  // theta(z_x), order (r+s)/r
    Series<K> prod_inv = invert(linear_shift<K>(Var::Zx, x) * threv, wu);
    Series<K> f = shifted(prod_inv, -FT::one(), prod_inv.ram);  // -z_x/((x+z_x) theta)
    return canonical_connection_series(f);
}

// Inverse of the infinity flavor.  The correction coefficient is the inverse
// of the symbol's leading coefficient, so no root extraction is needed here.
template <class K>
Series<K> inv_minfinf_series(const Series<K>& g, long long wu, long long branch) {
    using FT = field_traits<K>;
    auto [l, a0] = g.leading();
    if (l >= 0) throw DomainMismatch("operator class must have negative order");
    long long s = g.ram, r = -l;
    K gamma = FT::inverse(a0);  // equals the forward correction root (-a)^(r/s)
    K ccorr = gamma * FT::from_rational(Rational(r + s, 2 * s));
    Series<K> zs = g + Series<K>::monomial(Var::Theta, ccorr, s - r, s);  // z(theta)
    Series<K> ht = invert(zs, wu);                          // zeta(theta), order r/s
    Series<K> threv = revert(ht, Var::Zeta, branch, wu);    // theta(zeta), order s/r
    Series<K> f = scalar_mul(-FT::one(), invert(threv, wu));
    return canonical_connection_series(f);
}

template <class K, class Fn>
std::vector<Component<K>> map_components(const std::vector<Component<K>>& in, Fn&& fn) {
    std::vector<Component<K>> out;
    out.reserve(in.size());
    for (const auto& comp : in) out.push_back(Component<K>{fn(comp.f), comp.m});
    sort_components(out);
    return out;
}

}  // namespace detail

template <class K>
DiffOpObject<K> mellin_0_inf(const ConnectionObject<K>& e, const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    if (e.point != Point::Zero) throw DomainMismatch("expected an object expanding at zero");
    ConnectionObject<K> in = canonicalize(e);
    DiffOpObject<K> out;
    out.components = detail::map_components(in.components, [&](const Series<K>& f) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::m0inf_series(f, wu, opt.branch); }, wu0);
    });
    return out;
}

template <class K>
DiffOpObject<K> mellin_x_inf(const ConnectionObject<K>& e, const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    if (e.point != Point::Finite)
        throw DomainMismatch("expected an object expanding at a finite point");
    ConnectionObject<K> in = canonicalize(e);  // validates that x is present and nonzero
    const K x = *in.x;
    DiffOpObject<K> out;
    out.components = detail::map_components(in.components, [&](const Series<K>& f) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::mxinf_series(f, x, wu, opt.branch); }, wu0);
    });
    return out;
}

template <class K>
DiffOpObject<K> mellin_inf_inf(const ConnectionObject<K>& e, const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    if (e.point != Point::Infinity)
        throw DomainMismatch("expected an object expanding at infinity");
    ConnectionObject<K> in = canonicalize(e);
    DiffOpObject<K> out;
    out.components = detail::map_components(in.components, [&](const Series<K>& f) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::minfinf_series(f, wu, opt.branch); }, wu0);
    });
    return out;
}

template <class K>
ConnectionObject<K> inverse_mellin_0_inf(const DiffOpObject<K>& d,
                                         const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    DiffOpObject<K> in = canonicalize(d);
    ConnectionObject<K> out;
    out.point = Point::Zero;
    out.components = detail::map_components(in.components, [&](const Series<K>& g) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::inv_m0inf_series(g, wu, opt.branch); }, wu0);
    });
    return out;
}

template <class K>
ConnectionObject<K> inverse_mellin_x_inf(const DiffOpObject<K>& d, const K& x,
                                         const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    if (field_traits<K>::is_zero(x))
        throw std::invalid_argument("finite expansion point must be nonzero");
    DiffOpObject<K> in = canonicalize(d);
    ConnectionObject<K> out;
    out.point = Point::Finite;
    out.x = x;
    out.components = detail::map_components(in.components, [&](const Series<K>& g) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::inv_mxinf_series(g, x, wu, opt.branch); }, wu0);
    });
    return out;
}

template <class K>
ConnectionObject<K> inverse_mellin_inf_inf(const DiffOpObject<K>& d,
                                           const TransformOptions& opt = {}) {
    long long wu0 = detail::transform_base_units(opt);
    DiffOpObject<K> in = canonicalize(d);
    ConnectionObject<K> out;
    out.point = Point::Infinity;
    out.components = detail::map_components(in.components, [&](const Series<K>& g) {
        return detail::with_depth_retry(
            [&](long long wu) { return detail::inv_minfinf_series(g, wu, opt.branch); }, wu0);
    });
    return out;
}

// --- target-category membership ----------------------------------------------

enum class MembershipTarget { NPositive, NZero, NNegative };

inline const char* membership_target_name(MembershipTarget t) {
    switch (t) {
        case MembershipTarget::NPositive: return "N>0";
        case MembershipTarget::NZero: return "N=0";
        case MembershipTarget::NNegative: return "N<0";
    }
    return "?";
}

template <class K>
bool check_membership(const DiffOpObject<K>& d, MembershipTarget target,
                      const std::optional<K>& x = std::nullopt) {
    if (target == MembershipTarget::NZero && !x)
        throw std::invalid_argument("order-zero membership requires the expansion point");
    DiffOpObject<K> c = canonicalize(d);
    for (const auto& comp : c.components) {
        auto [l, a0] = comp.f.leading();
        switch (target) {
            case MembershipTarget::NPositive:
                if (l <= 0) return false;
                break;
            case MembershipTarget::NZero:
                if (l != 0 || !field_traits<K>::equal(a0, *x)) return false;
                break;
            case MembershipTarget::NNegative:
                if (l >= 0) return false;
                break;
        }
    }
    return true;
}

// --- request/response wrapper for the CLI and JSON front end -------------------

template <class K>
struct TransformRequest {
    TransformKind kind = TransformKind::M0inf;
    std::optional<ConnectionObject<K>> connection;  // input of the forward flavors
    std::optional<DiffOpObject<K>> diffop;          // input of the inverse flavors
    std::optional<K> x;                             // target point of the inverse x flavor
    TransformOptions options;
};

template <class K>
struct TransformOutput {
    std::optional<ConnectionObject<K>> connection;
    std::optional<DiffOpObject<K>> diffop;
};

template <class K>
TransformOutput<K> run_transform(const TransformRequest<K>& req) {
    TransformOutput<K> out;
    if (transform_is_inverse(req.kind)) {
        if (!req.diffop)
            throw std::invalid_argument("inverse transforms consume an operator object");
        switch (req.kind) {
            case TransformKind::InvM0inf:
                out.connection = inverse_mellin_0_inf(*req.diffop, req.options);
                break;
            case TransformKind::InvMxinf:
                if (!req.x)
                    throw std::invalid_argument("inverse x flavor requires the expansion point");
                out.connection = inverse_mellin_x_inf(*req.diffop, *req.x, req.options);
                break;
            default:
                out.connection = inverse_mellin_inf_inf(*req.diffop, req.options);
                break;
        }
    } else {
        if (!req.connection)
            throw std::invalid_argument("forward transforms consume a connection object");
        switch (req.kind) {
            case TransformKind::M0inf:
                out.diffop = mellin_0_inf(*req.connection, req.options);
                break;
            case TransformKind::Mxinf:
                out.diffop = mellin_x_inf(*req.connection, req.options);
                break;
            default:
                out.diffop = mellin_inf_inf(*req.connection, req.options);
                break;
        }
    }
    return out;
}

}  // namespace mellin
