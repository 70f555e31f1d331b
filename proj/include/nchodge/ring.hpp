#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nchodge/grading.hpp"
#include "nchodge/novikov.hpp"

namespace nchodge {

struct UnknownSymbol : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite caps realizing the adic completions at a fixed order. Every
// operation output is reduced to policy before return.
struct TruncationPolicy {
    std::optional<Rational> tPrecision;  // Novikov exponent cutoff (nullopt = exact)
    int bulkDegreeMax = 1 << 20;         // total bulk-variable order retained
    int uMax = 0;                        // powers of u retained: 0..uMax
    int lengthMax = 8;                   // Hochschild word length cap
};

struct BulkVariable {
    std::string name;
    int degree = 0;
};

// Monomial in the bulk variables, stored in divided-power normal form when
// the ring has divided powers enabled: exponent k stands for r^[k] = r^k/k!.
// Canonical ordering is lexicographic in variable name.
struct Monomial {
    std::map<std::string, int> exponents;

    bool empty() const { return exponents.empty(); }
    int total_order() const {
        int t = 0;
        for (const auto& [n, k] : exponents) t += k;
        return t;
    }
    auto operator<=>(const Monomial&) const = default;
};

// Element of the bulk ring: monomials with Novikov-scalar coefficients.
struct RingElement {
    std::map<Monomial, NovikovScalar> monomials;

    static RingElement scalar(NovikovScalar s) {
        RingElement e;
        if (!s.is_strictly_zero()) e.monomials[Monomial{}] = std::move(s);
        return e;
    }
    static RingElement one() { return scalar(NovikovScalar::one()); }

    bool is_zero() const {
        for (const auto& [m, c] : monomials)
            if (!c.is_zero()) return false;
        return true;
    }
    bool is_strictly_zero() const { return monomials.empty(); }

    // The pure Novikov part (coefficient of the empty monomial).
    NovikovScalar novikov_part() const {
        auto it = monomials.find(Monomial{});
        return it == monomials.end() ? NovikovScalar() : it->second;
    }
    bool is_novikov() const {
        return monomials.empty() ||
               (monomials.size() == 1 && monomials.begin()->first.empty());
    }

    void prune() {
        for (auto it = monomials.begin(); it != monomials.end();)
            it = it->second.is_strictly_zero() ? monomials.erase(it) : std::next(it);
    }

    RingElement operator-() const {
        RingElement r = *this;
        for (auto& [m, c] : r.monomials) c = -c;
        return r;
    }
    RingElement& operator+=(const RingElement& o) {
        for (const auto& [m, c] : o.monomials) {
            auto it = monomials.find(m);
            if (it == monomials.end())
                monomials[m] = c;
            else
                it->second += c;
        }
        prune();
        return *this;
    }
    RingElement& operator-=(const RingElement& o) { return *this += -o; }
    friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
    friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }

    friend RingElement operator*(const NovikovScalar& s, const RingElement& x) {
        RingElement r;
        for (const auto& [m, c] : x.monomials) {
            NovikovScalar p = s * c;
            if (!p.is_strictly_zero()) r.monomials[m] = p;
        }
        return r;
    }
    friend RingElement operator*(const Rational& q, const RingElement& x) {
        return NovikovScalar(q) * x;
    }

    bool operator==(const RingElement& o) const { return monomials == o.monomials; }

    std::string str() const {
        if (monomials.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : monomials) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.str() << ")";
            for (const auto& [n, k] : m.exponents) os << "*" << n << "^[" << k << "]";
        }
        return os.str();
    }
};

// Declaration of a graded filtered coefficient ring: Novikov scalars extended
// by bulk polynomial variables, optionally with divided powers and a
// square-zero degree-1 differential given on generators.
struct BulkRingDescriptor {
    Grading grading;
    std::vector<BulkVariable> variables;
    bool dividedPowers = false;
    std::map<std::string, RingElement> differential;  // on generators; empty = none
    TruncationPolicy truncation;

    const BulkVariable* find(const std::string& name) const {
        for (const auto& v : variables)
            if (v.name == name) return &v;
        return nullptr;
    }
    int variable_degree(const std::string& name) const {
        const BulkVariable* v = find(name);
        if (!v) throw UnknownSymbol("unknown bulk variable: " + name);
        return v->degree;
    }

    // Grading-group degree of a monomial (T contributes 0).
    int monomial_degree(const Monomial& m) const {
        int d = 0;
        for (const auto& [n, k] : m.exponents) d += k * variable_degree(n);
        return grading.normalize(d);
    }

    // Degree of a homogeneous element, nullopt if inhomogeneous or zero.
    std::optional<int> degree(const RingElement& x) const {
        std::optional<int> d;
        for (const auto& [m, c] : x.monomials) {
            if (c.is_zero() && c.is_strictly_zero()) continue;
            int dm = monomial_degree(m);
            if (!d)
                d = dm;
            else if (!grading.degrees_equal(*d, dm))
                return std::nullopt;
        }
        return d;
    }

    void reduce(RingElement& x) const {
        for (auto it = x.monomials.begin(); it != x.monomials.end();) {
            if (it->first.total_order() > truncation.bulkDegreeMax) {
                it = x.monomials.erase(it);
                continue;
            }
            if (truncation.tPrecision) it->second.truncate(*truncation.tPrecision);
            ++it;
        }
        x.prune();
    }
    RingElement reduced(RingElement x) const {
        reduce(x);
        return x;
    }

    // Graded-commutative monomial product. Returns the sign and the combined
    // monomial, with the divided-power binomial factor folded into `coeff`;
    // zero (nullopt) when an odd variable would repeat.
    std::optional<std::pair<Monomial, Rational>> monomial_product(const Monomial& a,
                                                                  const Monomial& b) const {
        Rational coeff(1);
        // Koszul sign of interleaving: odd variable x in a crossing odd y in b
        // with y < x.
        int sign_flips = 0;
        for (const auto& [xn, xk] : a.exponents) {
            if (!Grading::is_odd(variable_degree(xn)) || xk % 2 == 0) continue;
            for (const auto& [yn, yk] : b.exponents) {
                if (yn >= xn) break;
                if (Grading::is_odd(variable_degree(yn)) && yk % 2 == 1) ++sign_flips;
            }
        }
        Monomial m = a;
        for (const auto& [n, k] : b.exponents) {
            int& e = m.exponents[n];
            bool odd = Grading::is_odd(variable_degree(n));
            if (odd && e + k > 1) return std::nullopt;  // x^2 = 0 for odd x
            if (dividedPowers) coeff *= binomial(e + k, e);
            e += k;
        }
        if (sign_flips % 2 == 1) coeff = -coeff;
        return std::make_pair(std::move(m), std::move(coeff));
    }

    RingElement mul(const RingElement& a, const RingElement& b) const {
        RingElement r;
        for (const auto& [ma, ca] : a.monomials)
            for (const auto& [mb, cb] : b.monomials) {
                auto prod = monomial_product(ma, mb);
                if (!prod) continue;
                NovikovScalar c = prod->second * (ca * cb);
                auto it = r.monomials.find(prod->first);
                if (it == r.monomials.end())
                    r.monomials[prod->first] = c;
                else
                    it->second += c;
            }
        reduce(r);
        return r;
    }

    RingElement pow(const RingElement& a, int k) const {
        RingElement r = RingElement::one();
        for (int i = 0; i < k; ++i) r = mul(r, a);
        return r;
    }

    // Divided-power product of two monomials as a ring element.
    RingElement dividedPowerProduct(const Monomial& a, const Monomial& b) const {
        auto prod = monomial_product(a, b);
        RingElement r;
        if (prod) r.monomials[prod->first] = NovikovScalar(prod->second);
        reduce(r);
        return r;
    }

    bool has_differential() const { return !differential.empty(); }

    RingElement generator_differential(const std::string& name) const {
        auto it = differential.find(name);
        return it == differential.end() ? RingElement() : it->second;
    }

    // Extends the generator differential by the graded Leibniz rule; for
    // divided powers d(r^[k]) = d(r) * r^[k-1].
    RingElement apply_differential(const RingElement& x) const {
        RingElement out;
        for (const auto& [m, c] : x.monomials) {
            int parity_before = 0;  // parity of variables to the left of the factor hit by d
            for (const auto& [n, k] : m.exponents) {
                RingElement dv = generator_differential(n);
                int vd = variable_degree(n);
                if (!dv.is_strictly_zero()) {
                    Monomial rest = m;
                    if (k == 1)
                        rest.exponents.erase(n);
                    else
                        rest.exponents[n] = k - 1;
                    Rational factor = dividedPowers ? Rational(1) : Rational(k);
                    if (parity_before % 2 == 1) factor = -factor;
                    RingElement rest_el;
                    rest_el.monomials[rest] = factor * c;
                    out += mul(dv, rest_el);
                }
                parity_before += k * (Grading::is_odd(vd) ? 1 : 0);
            }
        }
        reduce(out);
        return out;
    }
};

// Base-change morphism between bulk rings, together with the induced map on
// Omega basis labels (used when pulling back connections).
struct RingMorphismWithDerivation {
    const BulkRingDescriptor* domain = nullptr;
    const BulkRingDescriptor* target = nullptr;
    std::map<std::string, RingElement> generatorImages;  // domain variable -> target element
    // Df on Omega basis labels: domain label -> target-label-indexed coefficients.
    std::map<std::string, std::map<std::string, RingElement>> omegaMap;

    const RingElement& image(const std::string& name) const {
        auto it = generatorImages.find(name);
        if (it == generatorImages.end()) throw UnknownSymbol("no image for symbol: " + name);
        return it->second;
    }

    RingElement apply(const RingElement& x) const {
        RingElement out;
        for (const auto& [m, c] : x.monomials) {
            RingElement term = RingElement::scalar(c);
            for (const auto& [n, k] : m.exponents) {
                RingElement p = target->pow(image(n), k);
                if (domain->dividedPowers) {
                    Rational kfac(1);
                    for (int i = 2; i <= k; ++i) kfac *= i;
                    p = (Rational(1) / kfac) * p;
                }
                term = target->mul(term, p);
            }
            out += term;
        }
        target->reduce(out);
        return out;
    }
};

inline RingMorphismWithDerivation identity_morphism(const BulkRingDescriptor& ring) {
    RingMorphismWithDerivation f;
    f.domain = &ring;
    f.target = &ring;
    for (const auto& v : ring.variables) {
        RingElement e;
        e.monomials[Monomial{{{v.name, 1}}}] = NovikovScalar::one();
        f.generatorImages[v.name] = e;
    }
    return f;
}

}  // namespace nchodge
