#pragma once

// Brute-force verification layer.  Operators act on a finite window of
// monomial basis elements z^(k/q), K0 <= k <= K1, as dense matrices with a
// declared band.  Because the window truncates infinite matrices, every
// column carries a validity interval [cvlo, cvhi] of row numerators on which
// the stored column provably equals the true operator's action (stored value
// inside the window, zero outside).  Validity is monotone: composition and
// inversion only ever shrink it.  Checks assert identities on validated
// entries only and report the certified order they reached.

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"
#include "mellin/parser.hpp"
#include "mellin/series.hpp"

namespace mellin {

inline constexpr long long kRowNegInf = std::numeric_limits<long long>::min() / 4;
inline constexpr long long kRowPosInf = std::numeric_limits<long long>::max() / 4;

struct Window {
    long long q;
    long long K0;
    long long K1;
};

inline Window default_window(long long q) { return {q, -8 * q, 8 * q}; }

namespace oracle_detail {

inline long long sat(long long v) {
    if (v <= kRowNegInf / 2) return kRowNegInf;
    if (v >= kRowPosInf / 2) return kRowPosInf;
    return v;
}

inline long long sat_add(long long a, long long b) {
    if (a <= kRowNegInf || b <= kRowNegInf) return kRowNegInf;
    if (a >= kRowPosInf || b >= kRowPosInf) return kRowPosInf;
    return sat(a + b);
}

// Collapse per-row knowledge flags to the best contiguous interval; a run
// touching a window edge with certified outside knowledge extends to
// infinity on that side and is preferred over longer interior runs.
inline void reduce_interval(const std::vector<char>& f, long long K0, bool lo_inf, bool hi_inf,
                            long long& out_lo, long long& out_hi) {
    const long long W = static_cast<long long>(f.size());
    const long long BONUS = W + 2;
    long long best = -1, blo = 0, bhi = -1;
    long long i = 0;
    while (i < W) {
        if (!f[i]) {
            ++i;
            continue;
        }
        long long j = i;
        while (j < W && f[j]) ++j;
        long long score = (j - i) + ((i == 0 && lo_inf) ? BONUS : 0) +
                          ((j == W && hi_inf) ? BONUS : 0);
        if (score > best) {
            best = score;
            blo = i;
            bhi = j - 1;
        }
        i = j;
    }
    if (best < 0) {
        if (hi_inf) {
            out_lo = K0 + W;
            out_hi = kRowPosInf;
        } else if (lo_inf) {
            out_lo = kRowNegInf;
            out_hi = K0 - 1;
        } else {
            out_lo = kRowPosInf;
            out_hi = kRowNegInf;
        }
        return;
    }
    out_lo = (blo == 0 && lo_inf) ? kRowNegInf : K0 + blo;
    out_hi = (bhi == W - 1 && hi_inf) ? kRowPosInf : K0 + bhi;
}

}  // namespace oracle_detail

template <class K>
struct WindowVector {
    long long q = 1, K0 = 0, K1 = 0;
    std::vector<K> vals;
    long long vlo = kRowNegInf, vhi = kRowPosInf;

    long long width() const { return K1 - K0 + 1; }
    bool in_window(long long r) const { return r >= K0 && r <= K1; }
    const K& at(long long r) const { return vals[static_cast<std::size_t>(r - K0)]; }
    K& at(long long r) { return vals[static_cast<std::size_t>(r - K0)]; }
    bool known(long long r) const { return r >= vlo && r <= vhi; }

    static WindowVector basis(const Window& w, long long k) {
        WindowVector v;
        v.q = w.q;
        v.K0 = w.K0;
        v.K1 = w.K1;
        v.vals.assign(static_cast<std::size_t>(v.width()), field_traits<K>::zero());
        v.at(k) = field_traits<K>::one();
        return v;
    }
};

template <class K>
struct WindowOperator {
    long long q = 1, K0 = 0, K1 = 0;
    long long band_lo = 0, band_hi = 0;
    std::vector<K> mat;       // row-major, (r - K0) * width + (k - K0)
    std::vector<long long> cvlo, cvhi;

    long long width() const { return K1 - K0 + 1; }
    bool in_window(long long r) const { return r >= K0 && r <= K1; }
    const K& at(long long r, long long k) const {
        return mat[static_cast<std::size_t>((r - K0) * width() + (k - K0))];
    }
    K& at(long long r, long long k) {
        return mat[static_cast<std::size_t>((r - K0) * width() + (k - K0))];
    }
    long long col_lo(long long k) const { return cvlo[static_cast<std::size_t>(k - K0)]; }
    long long col_hi(long long k) const { return cvhi[static_cast<std::size_t>(k - K0)]; }
    long long& col_lo(long long k) { return cvlo[static_cast<std::size_t>(k - K0)]; }
    long long& col_hi(long long k) { return cvhi[static_cast<std::size_t>(k - K0)]; }
    bool entry_valid(long long r, long long k) const {
        return col_lo(k) <= r && r <= col_hi(k);
    }

    static WindowOperator make(const Window& w, long long blo, long long bhi) {
        WindowOperator op;
        op.q = w.q;
        op.K0 = w.K0;
        op.K1 = w.K1;
        op.band_lo = blo;
        op.band_hi = bhi;
        op.mat.assign(static_cast<std::size_t>(op.width() * op.width()),
                      field_traits<K>::zero());
        op.cvlo.assign(static_cast<std::size_t>(op.width()), kRowNegInf);
        op.cvhi.assign(static_cast<std::size_t>(op.width()), kRowPosInf);
        return op;
    }
    Window window() const { return {q, K0, K1}; }
};

namespace oracle_detail {

template <class K>
void require_same_window(const WindowOperator<K>& a, const WindowOperator<K>& b) {
    if (a.q != b.q) throw RamMismatch("window operators use different ramification");
    if (a.K0 != b.K0 || a.K1 != b.K1)
        throw std::invalid_argument("window operators use different windows");
}

}  // namespace oracle_detail

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

// Multiplication by a Puiseux polynomial (or truncated series): a banded
// convolution.  A truncation bound on f limits how far each column is known.
template <class K>
WindowOperator<K> mul_by(const Series<K>& f, const Window& w) {
    Series<K> g = f.with_ram(w.q);
    std::optional<long long> smin, smax;
    for (auto& [t, c] : g.terms) {
        if (!smin) smin = t;
        smax = t;
    }
    long long blo = smin ? *smin : 0;
    long long bhi = smax ? *smax : 0;
    if (g.trunc) bhi = kRowPosInf;  // unknown tail beyond the bound
    auto op = WindowOperator<K>::make(w, blo, bhi);
    for (long long k = w.K0; k <= w.K1; ++k) {
        for (auto& [t, c] : g.terms) {
            long long r = k + t;
            if (op.in_window(r)) op.at(r, k) = op.at(r, k) + c;
        }
        if (smin && k + *smin < w.K0) op.col_lo(k) = w.K0;
        if (smax && k + *smax > w.K1) op.col_hi(k) = w.K1;
        if (g.trunc)
            op.col_hi(k) = std::min(op.col_hi(k), oracle_detail::sat(k + *g.trunc - 1));
    }
    return op;
}

// z^n * d/dz: shifts the exponent numerator by (n-1)q and scales by k/q.
template <class K>
WindowOperator<K> z_pow_ddz(long long n, const Window& w) {
    using FT = field_traits<K>;
    long long shift = (n - 1) * w.q;
    auto op = WindowOperator<K>::make(w, shift, shift);
    for (long long k = w.K0; k <= w.K1; ++k) {
        if (k == 0) continue;  // image is exactly zero; fully known
        long long r = k + shift;
        if (op.in_window(r)) {
            op.at(r, k) = FT::from_rational(Rational(k, w.q));
        } else if (r > w.K1) {
            op.col_hi(k) = r - 1;
        } else {
            op.col_lo(k) = r + 1;
        }
    }
    return op;
}

template <class K>
WindowOperator<K> add(const WindowOperator<K>& a, const WindowOperator<K>& b) {
    oracle_detail::require_same_window(a, b);
    auto c = WindowOperator<K>::make(a.window(), std::min(a.band_lo, b.band_lo),
                                     std::max(a.band_hi, b.band_hi));
    for (std::size_t i = 0; i < c.mat.size(); ++i) c.mat[i] = a.mat[i] + b.mat[i];
    for (std::size_t i = 0; i < c.cvlo.size(); ++i) {
        c.cvlo[i] = std::max(a.cvlo[i], b.cvlo[i]);
        c.cvhi[i] = std::min(a.cvhi[i], b.cvhi[i]);
    }
    return c;
}

template <class K>
WindowOperator<K> sub(const WindowOperator<K>& a, const WindowOperator<K>& b) {
    oracle_detail::require_same_window(a, b);
    auto c = WindowOperator<K>::make(a.window(), std::min(a.band_lo, b.band_lo),
                                     std::max(a.band_hi, b.band_hi));
    for (std::size_t i = 0; i < c.mat.size(); ++i) c.mat[i] = a.mat[i] - b.mat[i];
    for (std::size_t i = 0; i < c.cvlo.size(); ++i) {
        c.cvlo[i] = std::max(a.cvlo[i], b.cvlo[i]);
        c.cvhi[i] = std::min(a.cvhi[i], b.cvhi[i]);
    }
    return c;
}

template <class K>
WindowOperator<K> scale(const WindowOperator<K>& a, const K& s) {
    WindowOperator<K> c = a;
    for (auto& e : c.mat) e = e * s;
    return c;
}

template <class K>
WindowOperator<K> identity(const Window& w) {
    auto op = WindowOperator<K>::make(w, 0, 0);
    for (long long k = w.K0; k <= w.K1; ++k) op.at(k, k) = field_traits<K>::one();
    return op;
}

// Forward application with validity propagation.  A result row is known when
// every input row it draws on is known and every validated matrix entry it
// uses is within its column's validity.
template <class K>
WindowVector<K> apply(const WindowOperator<K>& w, const WindowVector<K>& v) {
    using FT = field_traits<K>;
    if (w.q != v.q || w.K0 != v.K0 || w.K1 != v.K1)
        throw std::invalid_argument("operator and vector windows differ");
    WindowVector<K> y;
    y.q = v.q;
    y.K0 = v.K0;
    y.K1 = v.K1;
    y.vals.assign(static_cast<std::size_t>(v.width()), FT::zero());

    std::optional<long long> smin, smax;
    for (long long r = v.K0; r <= v.K1; ++r)
        if (!FT::is_zero(v.at(r))) {
            if (!smin) smin = r;
            smax = r;
        }

    std::vector<char> flag(static_cast<std::size_t>(v.width()), 0);
    for (long long r = v.K0; r <= v.K1; ++r) {
        long long klo = (w.band_hi >= kRowPosInf) ? v.K0 : std::max(v.K0, r - w.band_hi);
        long long khi = (w.band_lo <= kRowNegInf) ? v.K1 : std::min(v.K1, r - w.band_lo);
        K acc = FT::zero();
        for (long long k = klo; k <= khi; ++k) acc = acc + w.at(r, k) * v.at(k);
        y.at(r) = acc;

        bool ok = true;
        if (w.band_hi >= kRowPosInf) {
            if (v.vlo > kRowNegInf) ok = false;
        } else if (v.vlo > r - w.band_hi) {
            ok = false;
        }
        if (w.band_lo <= kRowNegInf) {
            if (v.vhi < kRowPosInf) ok = false;
        } else if (v.vhi < r - w.band_lo) {
            ok = false;
        }
        if (ok)
            for (long long k = klo; k <= khi; ++k)
                if (!FT::is_zero(v.at(k)) && !w.entry_valid(r, k)) {
                    ok = false;
                    break;
                }
        flag[static_cast<std::size_t>(r - v.K0)] = ok;
    }

    bool lo_inf = v.vlo <= kRowNegInf && w.band_lo > kRowNegInf &&
                  (!smin || *smin + w.band_lo >= v.K0) &&
                  (v.vhi >= oracle_detail::sat(v.K0 - 1 - w.band_lo));
    bool hi_inf = v.vhi >= kRowPosInf && w.band_hi < kRowPosInf &&
                  (!smax || *smax + w.band_hi <= v.K1) &&
                  (v.vlo <= oracle_detail::sat(v.K1 + 1 - w.band_hi));
    if (!smin && v.vlo <= kRowNegInf && v.vhi >= kRowPosInf) {
        lo_inf = true;  // the zero vector maps to zero, known everywhere
        hi_inf = true;
    }
    oracle_detail::reduce_interval(flag, v.K0, lo_inf, hi_inf, y.vlo, y.vhi);
    return y;
}

template <class K>
WindowOperator<K> compose(const WindowOperator<K>& a, const WindowOperator<K>& b) {
    oracle_detail::require_same_window(a, b);
    auto c = WindowOperator<K>::make(b.window(), oracle_detail::sat_add(a.band_lo, b.band_lo),
                                     oracle_detail::sat_add(a.band_hi, b.band_hi));
    for (long long k = b.K0; k <= b.K1; ++k) {
        WindowVector<K> col;
        col.q = b.q;
        col.K0 = b.K0;
        col.K1 = b.K1;
        col.vals.resize(static_cast<std::size_t>(b.width()));
        for (long long r = b.K0; r <= b.K1; ++r) col.at(r) = b.at(r, k);
        col.vlo = b.col_lo(k);
        col.vhi = b.col_hi(k);
        WindowVector<K> y = mellin::apply(a, col);
        for (long long r = b.K0; r <= b.K1; ++r) c.at(r, k) = y.at(r);
        c.col_lo(k) = y.vlo;
        c.col_hi(k) = y.vhi;
    }
    return c;
}

template <class K>
WindowOperator<K> pow_op(const WindowOperator<K>& a, long long e) {
    if (e < 0) throw std::invalid_argument("operator power must be nonnegative");
    WindowOperator<K> acc = identity<K>(a.window());
    for (long long i = 0; i < e; ++i) acc = compose(acc, a);
    return acc;
}

template <class K>
WindowOperator<K> commutator(const WindowOperator<K>& a, const WindowOperator<K>& b) {
    return sub(compose(a, b), compose(b, a));
}

// d/dz + z^(-1) f: the covariant derivative attached to the multiplier f.
template <class K>
WindowOperator<K> nabla(const Series<K>& f, const Window& w) {
    Series<K> g = f.with_ram(w.q);
    return add(z_pow_ddz<K>(0, w),
               mul_by(shifted(g, field_traits<K>::one(), -w.q), w));
}

// z d/dz + f.
template <class K>
WindowOperator<K> znabla(const Series<K>& f, const Window& w) {
    return add(z_pow_ddz<K>(1, w), mul_by(f, w));
}

// eta := -(z d/dz + f).
template <class K>
WindowOperator<K> eta(const Series<K>& f, const Window& w) {
    return scale(znabla(f, w), K(-field_traits<K>::one()));
}

// The shift operator of a difference symbol g: multiplication by g composed
// with the substitution automorphism theta^(k/q) -> theta^(k/q)(1+theta)^(-k/q),
// whose matrix is the generalized binomial column binom(-k/q, i) at row k+iq.
template <class K>
WindowOperator<K> phi_op(const Series<K>& g, const Window& w) {
    using FT = field_traits<K>;
    auto tw = WindowOperator<K>::make(w, 0, kRowPosInf);
    for (long long k = w.K0; k <= w.K1; ++k) {
        K x = FT::from_rational(Rational(-k, w.q));
        K b = FT::one();
        for (long long i = 0; k + i * w.q <= w.K1; ++i) {
            tw.at(k + i * w.q, k) = b;
            b = b * (x - FT::from_int(i)) * FT::inverse(FT::from_int(i + 1));
        }
        tw.col_hi(k) = w.K1;
    }
    return compose(mul_by(g, w), tw);
}

// ---------------------------------------------------------------------------
// Graded inverse: solve w·u = v order-by-order from the lowest band entry.
// ---------------------------------------------------------------------------

template <class K>
WindowVector<K> apply_inverse(const WindowOperator<K>& w, const WindowVector<K>& v) {
    using FT = field_traits<K>;
    if (w.q != v.q || w.K0 != v.K0 || w.K1 != v.K1)
        throw std::invalid_argument("operator and vector windows differ");
    if (w.band_lo <= kRowNegInf)
        throw SingularLeading("operator has no leading band to solve from");
    for (long long k = w.K0; k <= w.K1; ++k) {
        long long r = k + w.band_lo;
        if (w.in_window(r) && w.entry_valid(r, k) && FT::is_zero(w.at(r, k)))
            throw SingularLeading("leading band entry vanishes on the window");
    }

    WindowVector<K> u;
    u.q = v.q;
    u.K0 = v.K0;
    u.K1 = v.K1;
    u.vals.assign(static_cast<std::size_t>(v.width()), FT::zero());
    std::vector<char> flag(static_cast<std::size_t>(v.width()), 0);

    bool know_below = v.vlo <= kRowNegInf;
    std::optional<long long> smin_v;
    for (long long r = v.K0; r <= v.K1 && !smin_v; ++r)
        if (!FT::is_zero(v.at(r))) smin_v = r;
    long long u_zero_below = kRowPosInf;
    if (know_below && smin_v) u_zero_below = oracle_detail::sat(*smin_v - w.band_lo);
    if (!know_below) u_zero_below = kRowNegInf;

    for (long long k = v.K0; k <= v.K1; ++k) {
        if (know_below && k < u_zero_below) {
            flag[static_cast<std::size_t>(k - v.K0)] = 1;  // graded solution vanishes here
            continue;
        }
        long long r = k + w.band_lo;
        if (!w.in_window(r)) continue;  // defining row unavailable; unknown
        if (FT::is_zero(w.at(r, k))) continue;  // false zero from window clipping
        bool ok = v.known(r);
        K acc = v.at(r);
        long long dep_lo = (w.band_hi >= kRowPosInf) ? kRowNegInf : r - w.band_hi;
        if (dep_lo < v.K0 && !(know_below && u_zero_below >= v.K0)) ok = false;
        for (long long kp = std::max(v.K0, dep_lo); kp < k; ++kp) {
            const K& uv = u.at(kp);
            bool settled_zero = flag[static_cast<std::size_t>(kp - v.K0)] && FT::is_zero(uv);
            if (!settled_zero) {
                if (!flag[static_cast<std::size_t>(kp - v.K0)]) ok = false;
                if (!w.entry_valid(r, kp)) ok = false;
            }
            acc = acc - w.at(r, kp) * uv;
        }
        if (!w.entry_valid(r, k) && !FT::is_zero(acc)) ok = false;
        u.at(k) = acc * FT::inverse(w.at(r, k));
        flag[static_cast<std::size_t>(k - v.K0)] = ok;
    }

    bool lo_inf = know_below && u_zero_below >= v.K0;
    bool hi_inf = false;
    if (v.vhi >= kRowPosInf && w.band_hi < kRowPosInf) {
        hi_inf = true;
        for (long long k = v.K1 + 1; k <= v.K1 + (w.band_hi - w.band_lo) && hi_inf; ++k) {
            long long r = k + w.band_lo;
            if (r <= v.K1) {
                if (!(v.known(r) && FT::is_zero(v.at(r)))) hi_inf = false;
            }
            for (long long kp = std::max(v.K0, k + w.band_lo - w.band_hi);
                 kp <= v.K1 && kp < k && hi_inf; ++kp)
                if (!(flag[static_cast<std::size_t>(kp - v.K0)] && FT::is_zero(u.at(kp))))
                    hi_inf = false;
        }
    }
    oracle_detail::reduce_interval(flag, v.K0, lo_inf, hi_inf, u.vlo, u.vhi);
    return u;
}

// ---------------------------------------------------------------------------
// Order measurements
// ---------------------------------------------------------------------------

// Minimal validated exponent shift over all columns (the graded order of the
// operator as seen on monomial columns).
template <class K>
std::optional<Rational> measured_order(const WindowOperator<K>& w) {
    using FT = field_traits<K>;
    std::optional<long long> best;
    for (long long k = w.K0; k <= w.K1; ++k) {
        long long lo = std::max(w.K0, w.col_lo(k));
        long long hi = std::min(w.K1, w.col_hi(k));
        for (long long r = lo; r <= hi; ++r)
            if (!FT::is_zero(w.at(r, k))) {
                if (!best || r - k < *best) best = r - k;
                break;
            }
    }
    if (!best) return std::nullopt;
    return Rational(*best) / w.q;
}

// Graded order of the inverse, measured by solving on basis columns.
template <class K>
std::optional<Rational> measured_inverse_order(const WindowOperator<K>& w) {
    using FT = field_traits<K>;
    std::optional<long long> best;
    for (long long k = w.K0; k <= w.K1; ++k) {
        WindowVector<K> u = apply_inverse(w, WindowVector<K>::basis(w.window(), k));
        long long lo = std::max(w.K0, u.vlo);
        long long hi = std::min(w.K1, u.vhi);
        for (long long r = lo; r <= hi; ++r)
            if (!FT::is_zero(u.at(r))) {
                if (!best || r - k < *best) best = r - k;
                break;
            }
    }
    if (!best) return std::nullopt;
    return Rational(*best) / w.q;
}

// ---------------------------------------------------------------------------
// Residual evaluation and check reports
// ---------------------------------------------------------------------------

struct ResidualVerdict {
    std::optional<Rational> certified;  // first difference order seen, or the
                                        // bound certified zero-free (nullopt = unbounded)
    bool pass = false;
    long long seeing_columns = 0;
};

// A column "sees" the check when its validity covers every row the true band
// allows from below and certifies strictly past the required order (when one
// is given).  PASS needs every seen entry at order <= required to vanish and
// at least one seeing column.
template <class K>
ResidualVerdict evaluate_residual(const WindowOperator<K>& d,
                                  std::optional<Rational> required) {
    using FT = field_traits<K>;
    ResidualVerdict verdict;
    verdict.pass = true;
    bool cert_inf = true;
    std::optional<Rational> cert;
    auto fold = [&](std::optional<Rational> v) {
        if (!v) return;  // unbounded certification for this column
        if (!cert || *v < *cert) cert = v;
        cert_inf = false;
    };
    for (long long k = d.K0; k <= d.K1; ++k) {
        if (d.band_lo > kRowNegInf && d.col_lo(k) > oracle_detail::sat(k + d.band_lo))
            continue;
        if (d.band_lo <= kRowNegInf && d.col_lo(k) > kRowNegInf) continue;
        if (required) {
            // must certify strictly past the required order
            if (d.col_hi(k) < kRowPosInf &&
                Rational(d.col_hi(k) + 1 - k) <= *required * d.q)
                continue;
        } else if (d.col_hi(k) < std::max(d.K0, d.col_lo(k))) {
            continue;
        }
        ++verdict.seeing_columns;
        long long lo = std::max(d.K0, d.col_lo(k));
        long long hi = std::min(d.K1, d.col_hi(k));
        bool found = false;
        for (long long r = lo; r <= hi; ++r)
            if (!FT::is_zero(d.at(r, k))) {
                Rational shift = Rational(r - k) / d.q;
                if (!required || shift <= *required) verdict.pass = false;
                fold(shift);
                found = true;
                break;
            }
        if (!found)
            fold(d.col_hi(k) >= kRowPosInf
                     ? std::optional<Rational>()
                     : std::optional<Rational>(Rational(d.col_hi(k) + 1 - k) / d.q));
    }
    if (verdict.seeing_columns == 0) verdict.pass = false;
    verdict.certified = cert_inf ? std::nullopt : cert;
    return verdict;
}

struct OracleReport {
    std::string check;
    std::vector<std::pair<std::string, std::string>> params;
    std::optional<Rational> certified_order;
    std::optional<Rational> required_order;
    bool pass = false;
};

namespace oracle_detail {

inline std::string rat_str(const Rational& r) { return field_traits<Rational>::format(r); }

template <class K>
OracleReport finish_report(std::string check,
                           std::vector<std::pair<std::string, std::string>> params,
                           const WindowOperator<K>& diff,
                           std::optional<Rational> required) {
    ResidualVerdict v = evaluate_residual(diff, required);
    OracleReport rep;
    rep.check = std::move(check);
    rep.params = std::move(params);
    rep.certified_order = v.certified;
    rep.required_order = required;
    rep.pass = v.pass;
    return rep;
}

}  // namespace oracle_detail

// (A+B)^m versus A^m + m A^(m-1) B + (m(m-1)/2) A^(m-2) [B,A], with
// A = multiplication by f, B = z^n d/dz, [B,A] = multiplication by z^n f'.
// The three-term form must agree beyond order ord(f)(m-1) + n - 1.
template <class K = Rational>
OracleReport check_binomial_expansion(const Series<K>& f, long long n, long long m,
                                      std::optional<Window> win = std::nullopt) {
    using FT = field_traits<K>;
    if (m < 2) throw HypothesisViolated("expansion power must be at least 2");
    if (f.terms.empty()) throw HypothesisViolated("multiplier has no leading term");
    Series<K> g = normalize_ram(f);
    Rational ordf = g.ord();
    if (!(ordf < Rational(n - 1)))
        throw HypothesisViolated("multiplier order must lie below the derivation order");
    Window w = win ? *win : default_window(g.ram);

    auto A = mul_by(g, w);
    auto B = z_pow_ddz<K>(n, w);
    auto C = add(A, B);
    auto lhs = pow_op(C, m);
    Series<K> znfp = shifted(derivative(g), FT::one(), n * g.ram);
    auto rhs = add(pow_op(A, m),
                   add(scale(compose(pow_op(A, m - 1), B), FT::from_int(m)),
                       scale(compose(pow_op(A, m - 2), mul_by(znfp, w)),
                             FT::from_rational(Rational(m * (m - 1), 2)))));
    Rational required = ordf * (m - 1) + (n - 1);
    return oracle_detail::finish_report(
        "power-expansion",
        {{"f", format_series(g)},
         {"n", std::to_string(n)},
         {"m", std::to_string(m)},
         {"q", std::to_string(w.q)}},
        sub(lhs, rhs), required);
}

// Construct R with R^p = A + B by graded Newton iteration seeded with the
// p-th root of the leading multiplication, then realize R on the window and
// demand a residual beyond everything the window certifies.
//
// The construction runs in the algebra of polynomials in B1 = z d/dz with
// Puiseux-series coefficients, where B1 z^b = z^b (B1 + b).  There the
// two-sided linearization sum_m rho^m d rho^(p-1-m) of X^p at the monomial
// seed rho is triangular in the B1-degree with diagonal p rho^(p-1), so each
// graded piece of the residual can be annihilated exactly and the residual
// order strictly increases every step.
template <class K = Rational>
OracleReport check_operator_root(const Series<K>& f, long long n, long long p,
                                 std::optional<Window> win = std::nullopt) {
    using FT = field_traits<K>;
    if (p < 1) throw std::invalid_argument("root index must be positive");
    if (f.terms.empty()) throw SingularLeading("multiplier has no leading term");
    Series<K> g = normalize_ram(f);
    Rational ordf = g.ord();
    if (!(ordf < Rational(n - 1)))
        throw HypothesisViolated("multiplier order must lie below the derivation order");
    long long Q = g.ram * p;
    Window w = win ? *win : default_window(Q);
    if (w.q % Q != 0) throw RamMismatch("window lattice too coarse for the root");

    Series<K> gq = g.with_ram(w.q);
    auto [k0, c0] = gq.leading();
    const long long e0 = k0 / p;  // exponent numerator of the seed root
    K rootc = FT::nth_root(c0, p, 0);

    const Var var = gq.var;
    const long long Tgoal = 8 * w.q;                              // certify this far
    const long long Ttr = Tgoal + 1;                              // realized truncation
    const long long Tcap = Tgoal + (p - 1) * std::llabs(e0) + 2 * w.q;  // working bound

    using BPoly = std::map<long long, Series<K>>;  // B1-degree -> coefficient
    auto bp_chop = [&](BPoly x) {
        BPoly out;
        for (auto& [j, s] : x) {
            Series<K> t = s.truncated(Tcap);
            t.trunc = std::nullopt;
            if (!t.terms.empty()) out.emplace(j, std::move(t));
        }
        return out;
    };
    auto apply_euler = [&](const Series<K>& s) {  // z d/dz termwise
        Series<K> out(var, w.q);
        for (auto& [k, c] : s.terms)
            if (k != 0) out.add_term(k, c * FT::from_rational(Rational(k, w.q)));
        return out;
    };
    auto bp_mul = [&](const BPoly& a, const BPoly& b) {
        BPoly out;
        for (auto& [i, fa] : a) {
            for (auto& [j, gb] : b) {
                Series<K> dt = gb;
                K bin = FT::one();
                for (long long t = 0; t <= i; ++t) {
                    if (t > 0) {
                        dt = apply_euler(dt);
                        bin = bin * FT::from_rational(Rational(i - t + 1, t));
                    }
                    if (dt.terms.empty()) break;
                    Series<K> term = scalar_mul(bin, fa * dt);
                    auto [it, fresh] = out.emplace(i + j - t, term);
                    if (!fresh) it->second = it->second + term;
                }
            }
        }
        return bp_chop(std::move(out));
    };
    auto bp_pow = [&](const BPoly& a, long long e) {
        BPoly acc;
        acc.emplace(0, Series<K>::monomial(var, FT::one(), 0, w.q));
        for (long long i = 0; i < e; ++i) acc = bp_mul(acc, a);
        return acc;
    };

    BPoly C;
    C.emplace(0, gq);
    {
        Series<K> bpart = Series<K>::monomial(var, FT::one(), (n - 1) * w.q, w.q);
        auto [it, fresh] = C.emplace(1, bpart);
        if (!fresh) it->second = it->second + bpart;
    }
    BPoly X;
    X.emplace(0, Series<K>::monomial(var, rootc, e0, w.q));

    const K rc_pm1 = pow_int<K>(rootc, p - 1);
    const K diag_inv = FT::inverse(rc_pm1 * FT::from_int(p));
    const Rational a_exp(e0, w.q);
    auto shift_sum = [&](long long t) {  // sum_u (a_exp * u)^t over u = 0..p-1
        K acc = FT::zero();
        for (long long u = 0; u < p; ++u)
            acc = acc + pow_int<K>(FT::from_rational(a_exp * u), t);
        return acc;
    };
    auto binom_int = [&](long long m, long long t) {
        K acc = FT::one();
        for (long long i = 1; i <= t; ++i)
            acc = acc * FT::from_rational(Rational(m - i + 1, i));
        return acc;
    };

    for (int guard = 0; guard < 512; ++guard) {
        BPoly Xp = bp_pow(X, p);
        BPoly res;
        for (auto& [j, s] : C) res.emplace(j, s);
        for (auto& [j, s] : Xp) {
            auto [it, fresh] = res.emplace(j, scalar_mul(K(-FT::one()), s));
            if (!fresh) it->second = it->second - s;
        }
        res = bp_chop(std::move(res));

        std::optional<long long> sigma;
        for (auto& [j, s] : res)
            for (auto& [k, c] : s.terms) {
                if (FT::is_zero(c)) continue;  // tolerance dust in approx mode
                if (!sigma || k < *sigma) sigma = k;
                break;
            }
        if (!sigma || *sigma > Tgoal) break;

        std::map<long long, K> piece;
        for (auto& [j, s] : res) {
            auto it = s.terms.find(*sigma);
            if (it != s.terms.end() && !FT::is_zero(it->second)) piece.emplace(j, it->second);
        }
        long long jtop = piece.rbegin()->first;
        std::map<long long, K> delta;
        for (long long j = jtop; j >= 0; --j) {
            K acc = FT::zero();
            if (auto it = piece.find(j); it != piece.end()) acc = it->second;
            for (long long jp = j + 1; jp <= jtop; ++jp) {
                auto it = delta.find(jp);
                if (it == delta.end()) continue;
                acc = acc - it->second * rc_pm1 * binom_int(jp, jp - j) * shift_sum(jp - j);
            }
            K val = acc * diag_inv;
            if (!FT::is_zero(val)) delta.emplace(j, val);
        }
        const long long dgrade = *sigma - (p - 1) * e0;
        for (auto& [j, c] : delta) {
            Series<K> mono = Series<K>::monomial(var, c, dgrade, w.q);
            auto [it, fresh] = X.emplace(j, mono);
            if (!fresh) it->second = it->second + mono;
        }
        X = bp_chop(std::move(X));
    }

    // Realize the constructed root on the window with truncated coefficients;
    // validity bookkeeping then bounds exactly how far the residual is
    // certified, and the verdict demands zero on every validated entry.
    auto Cw = add(mul_by(gq, w), z_pow_ddz<K>(n, w));
    auto B1 = z_pow_ddz<K>(1, w);
    WindowOperator<K> R = WindowOperator<K>::make(w, 0, 0);
    WindowOperator<K> Bj = identity<K>(w);
    long long jtop_X = X.empty() ? 0 : X.rbegin()->first;
    for (long long j = 0; j <= jtop_X; ++j) {
        if (j > 0) Bj = compose(Bj, B1);
        auto it = X.find(j);
        if (it == X.end()) continue;
        R = add(R, compose(mul_by(it->second.truncated(Ttr), w), Bj));
    }
    auto diff = sub(pow_op(R, p), Cw);
    return oracle_detail::finish_report(
        "power-root",
        {{"f", format_series(g)},
         {"n", std::to_string(n)},
         {"p", std::to_string(p)},
         {"q", std::to_string(w.q)}},
        diff, std::nullopt);
}

// (eta + 1) Phi = Phi eta with eta = -(z d/dz + f), Phi = multiplication by z,
// together with [nabla, z] = 1; both must vanish identically on validated
// entries.
template <class K = Rational>
OracleReport check_commutation(const Series<K>& f, std::optional<Window> win = std::nullopt) {
    using FT = field_traits<K>;
    Series<K> g = normalize_ram(f);
    Window w = win ? *win : default_window(g.ram);
    Series<K> zmono = Series<K>::monomial(g.var, FT::one(), w.q, w.q);

    auto et = eta(g, w);
    auto Phi = mul_by(zmono, w);
    auto d1 = sub(compose(add(et, identity<K>(w)), Phi), compose(Phi, et));

    auto del = nabla(g, w);
    auto d2 = sub(commutator(del, Phi), identity<K>(w));

    ResidualVerdict v1 = evaluate_residual(d1, std::nullopt);
    ResidualVerdict v2 = evaluate_residual(d2, std::nullopt);
    OracleReport rep;
    rep.check = "commutation";
    rep.params = {{"f", format_series(g)}, {"q", std::to_string(w.q)}};
    if (v1.certified && v2.certified)
        rep.certified_order = std::min(*v1.certified, *v2.certified);
    else if (v1.certified)
        rep.certified_order = v1.certified;
    else
        rep.certified_order = v2.certified;
    rep.required_order = std::nullopt;
    rep.pass = v1.pass && v2.pass;
    return rep;
}

// The r-th power of the graded inverse of z·nabla against the corrected
// multiplication expansion: with f of leading term a·z^(-s/r), compare
// (z·nabla)^(-r) to MulBy(f^(-r)) composed with s first-order correction
// factors T_i = I - (r/s) MulBy(1/f) Z + MulBy(((r/s)^2 i - c3) z f' / f^2),
// c3 = (r/s)(-r/s - 1)/2, Z = z d/dz.  Agreement is required beyond order
// (s-1) + (r+s)/r.
template <class K = Rational>
OracleReport check_inverse_expansion(const Series<K>& f,
                                     std::optional<Window> win = std::nullopt) {
    using FT = field_traits<K>;
    if (f.terms.empty()) throw SingularLeading("multiplier has no leading term");
    Series<K> g = normalize_ram(f);
    auto [k0, a] = g.leading();
    if (k0 >= 0) throw SingularLeading("multiplier must have negative order");
    long long r = g.ram;
    long long s = -k0;
    if (llgcd(s, r) != 1)
        throw HypothesisViolated("leading slope must be presented in lowest terms");
    Window w = win ? *win : default_window(r);

    Series<K> invf = invert(g);
    Series<K> zfp = shifted(derivative(g), FT::one(), g.ram);
    Series<K> invf2zfp = invf * invf * zfp;
    K rs = FT::from_rational(Rational(r, s));
    Rational c3r = Rational(r) / s * (Rational(-r) / s - 1) / 2;

    auto Z = z_pow_ddz<K>(1, w);
    auto I = identity<K>(w);
    auto middle = scale(compose(mul_by(invf, w), Z), K(-rs));
    WindowOperator<K> rhs = mul_by(pow_int_series(invf, r), w);
    for (long long i = s - 1; i >= 0; --i) {
        Rational ci = Rational(r) * r / (Rational(s) * s) * i - c3r;
        auto Ti = add(add(I, middle),
                      mul_by(scalar_mul(FT::from_rational(ci), invf2zfp),
                             w));
        rhs = compose(rhs, Ti);
    }

    auto zn = znabla(g, w);
    // Each graded inverse raises orders by s/r, so r of them shift the support
    // up by at least s*r window steps; the tail above is unbounded.
    auto lhs = WindowOperator<K>::make(w, s * r, kRowPosInf);
    for (long long k = w.K0; k <= w.K1; ++k) {
        WindowVector<K> u = WindowVector<K>::basis(w, k);
        for (long long j = 0; j < r; ++j) u = apply_inverse(zn, u);
        for (long long row = w.K0; row <= w.K1; ++row) lhs.at(row, k) = u.at(row);
        lhs.col_lo(k) = u.vlo;
        lhs.col_hi(k) = u.vhi;
    }

    Rational required = Rational(s - 1) + Rational(r + s) / r;
    return oracle_detail::finish_report(
        "inverse-expansion",
        {{"f", format_series(g)},
         {"a", FT::format(a)},
         {"s", std::to_string(s)},
         {"r", std::to_string(r)}},
        sub(lhs, rhs), required);
}

}  // namespace mellin
