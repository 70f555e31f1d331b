#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "nchodge/rational.hpp"

namespace nchodge {

struct InversionAtZeroPrecision : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite sum of rational coefficients times rational powers of T, together
// with an adic truncation marker: all exponents >= `precision` are unknown
// (nullopt = known to all orders). Invariant: no stored exponent >= precision,
// no stored zero coefficients.
class NovikovScalar {
public:
    using Terms = std::map<Rational, Rational>;

    NovikovScalar() = default;
    explicit NovikovScalar(const Rational& constant) {
        if (constant != 0) terms_[Rational(0)] = constant;
    }
    NovikovScalar(const Rational& coeff, const Rational& exponent) {
        if (coeff != 0) terms_[exponent] = coeff;
    }

    static NovikovScalar zero() { return NovikovScalar(); }
    static NovikovScalar one() { return NovikovScalar(Rational(1)); }
    static NovikovScalar T(const Rational& exponent) { return NovikovScalar(Rational(1), exponent); }
    static NovikovScalar o(const Rational& precision) {  // 0 + O(T^p)
        NovikovScalar x;
        x.precision_ = precision;
        return x;
    }

    const Terms& terms() const { return terms_; }
    const std::optional<Rational>& precision() const { return precision_; }
    bool exact() const { return !precision_.has_value(); }

    bool is_zero() const { return terms_.empty(); }  // zero at this precision
    bool is_strictly_zero() const { return terms_.empty() && exact(); }

    // Least stored exponent; falls back to the precision for a term-free
    // scalar (then the value is indistinguishable from 0 at this precision).
    std::optional<Rational> valuation() const {
        if (!terms_.empty()) return terms_.begin()->first;
        return precision_;  // nullopt = +infinity (exact zero)
    }

    Rational coefficient(const Rational& exponent) const {
        auto it = terms_.find(exponent);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational leading_coefficient() const {
        return terms_.empty() ? Rational(0) : terms_.begin()->second;
    }

    NovikovScalar operator-() const {
        NovikovScalar r = *this;
        for (auto& [e, c] : r.terms_) c = -c;
        return r;
    }

    NovikovScalar& operator+=(const NovikovScalar& o) {
        precision_ = min_precision(precision_, o.precision_);
        for (const auto& [e, c] : o.terms_) {
            auto it = terms_.find(e);
            if (it == terms_.end())
                terms_[e] = c;
            else if ((it->second += c) == 0)
                terms_.erase(it);
        }
        reduce();
        return *this;
    }
    NovikovScalar& operator-=(const NovikovScalar& o) { return *this += -o; }

    friend NovikovScalar operator+(NovikovScalar a, const NovikovScalar& b) { return a += b; }
    friend NovikovScalar operator-(NovikovScalar a, const NovikovScalar& b) { return a -= b; }

    friend NovikovScalar operator*(const NovikovScalar& a, const NovikovScalar& b) {
        NovikovScalar r;
        // prec(ab) = min(val(a)+prec(b), val(b)+prec(a))
        r.precision_ = mul_precision(a, b);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Rational e = ea + eb;
                auto it = r.terms_.find(e);
                if (it == r.terms_.end())
                    r.terms_[e] = ca * cb;
                else if ((it->second += ca * cb) == 0)
                    r.terms_.erase(it);
            }
        r.reduce();
        return r;
    }
    NovikovScalar& operator*=(const NovikovScalar& o) { return *this = *this * o; }

    friend NovikovScalar operator*(const Rational& c, const NovikovScalar& x) {
        return NovikovScalar(c) * x;
    }

    // Multiplicative inverse. The leading term must be visible. For an inexact
    // input the result carries the worst-case precision p - 2v; an exact
    // multi-term input needs an explicit `target` (absolute) precision, since
    // its inverse is an infinite series.
    NovikovScalar invert(std::optional<Rational> target = std::nullopt) const {
        if (terms_.empty())
            throw InversionAtZeroPrecision("leading term not determined at this precision");
        Rational v = terms_.begin()->first;
        Rational lead = terms_.begin()->second;
        std::optional<Rational> result_prec;  // absolute precision of the inverse
        if (precision_) result_prec = *precision_ - 2 * v;
        if (target && (!result_prec || *target < *result_prec)) result_prec = target;
        if (!result_prec) {
            if (terms_.size() == 1) {
                NovikovScalar r;
                r.terms_[-v] = Rational(1) / lead;
                return r;
            }
            throw InversionAtZeroPrecision(
                "inverse of an exact multi-term scalar needs a target precision");
        }
        // x = lead*T^v * (1 + z), val(z) > 0; invert the unit by geometric series.
        NovikovScalar z;
        for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it)
            z.terms_[it->first - v] = it->second / lead;
        // (1+z)^{-1} = 1 - z + z^2 - ..., truncated at relative order prec + v.
        NovikovScalar unit_inv = one();
        Rational rel = *result_prec + v;
        if (!z.terms_.empty()) {
            NovikovScalar mz = -z;
            NovikovScalar power = one();
            while (true) {
                power = power * mz;
                power.truncate(rel);
                if (power.terms_.empty()) break;
                unit_inv += power;
            }
        }
        NovikovScalar r;
        for (const auto& [e, c] : unit_inv.terms_) r.terms_[e - v] = c / lead;
        r.precision_ = result_prec;
        r.reduce();
        return r;
    }

    // Drop all terms with exponent >= p. The precision marker is tightened
    // only when information is actually lost: either terms were dropped here,
    // or the scalar already carried a marker. A truncation that removes
    // nothing from an exact scalar leaves it exact.
    void truncate(const Rational& p) {
        bool dropped = false;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->first >= p) {
                it = terms_.erase(it);
                dropped = true;
            } else {
                ++it;
            }
        }
        if (dropped || precision_) precision_ = min_precision(precision_, p);
    }
    NovikovScalar truncated(const Rational& p) const {
        NovikovScalar r = *this;
        r.truncate(p);
        return r;
    }

    bool operator==(const NovikovScalar& o) const {
        return terms_ == o.terms_ && precision_ == o.precision_;
    }

    std::string str() const {
        if (terms_.empty() && exact()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << (c > 0 ? " + " : " - ");
            Rational a = (!first && c < 0) ? Rational(-c) : c;
            first = false;
            if (e == 0) {
                os << to_string(a);
            } else {
                if (a != 1 && a != -1)
                    os << to_string(a) << "*";
                else if (a == -1)
                    os << "-";
                os << "T^(" << to_string(e) << ")";
            }
        }
        if (precision_) os << (terms_.empty() ? "O(T^" : " + O(T^") << to_string(*precision_) << ")";
        return os.str();
    }

private:
    static std::optional<Rational> min_precision(const std::optional<Rational>& a,
                                                 const std::optional<Rational>& b) {
        if (!a) return b;
        if (!b) return a;
        return std::min(*a, *b);
    }
    static std::optional<Rational> mul_precision(const NovikovScalar& a, const NovikovScalar& b) {
        std::optional<Rational> p;
        if (b.precision_ && !a.terms_.empty())
            p = a.terms_.begin()->first + *b.precision_;
        else if (b.precision_ && a.precision_)  // a ~ 0: val(a) = prec(a)
            p = *a.precision_ + *b.precision_;
        std::optional<Rational> q;
        if (a.precision_ && !b.terms_.empty())
            q = b.terms_.begin()->first + *a.precision_;
        else if (a.precision_ && b.precision_)
            q = *b.precision_ + *a.precision_;
        return min_precision(p, q);
    }

    void reduce() {
        if (!precision_) return;
        for (auto it = terms_.begin(); it != terms_.end();)
            it = (it->first >= *precision_) ? terms_.erase(it) : std::next(it);
    }

    Terms terms_;
    std::optional<Rational> precision_;  // nullopt = +infinity
};

}  // namespace nchodge
