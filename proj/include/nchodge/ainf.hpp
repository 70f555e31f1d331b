#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nchodge/ring.hpp"

namespace nchodge {

struct NonconvergentSum : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite combination of hom-space generators with ring coefficients.
using Element = std::map<int, RingElement>;

inline void element_add(Element& a, const Element& b) {
    for (const auto& [g, c] : b) {
        auto it = a.find(g);
        if (it == a.end())
            a[g] = c;
        else {
            it->second += c;
            if (it->second.is_strictly_zero()) a.erase(it);
        }
    }
}
inline Element element_scaled(const Element& a, const RingElement& c, const BulkRingDescriptor& ring) {
    Element r;
    for (const auto& [g, x] : a) {
        RingElement p = ring.mul(c, x);
        if (!p.is_strictly_zero()) r[g] = p;
    }
    return r;
}
inline Element element_negated(Element a) {
    for (auto& [g, c] : a) c = -c;
    return a;
}
inline bool element_is_zero(const Element& a) {
    for (const auto& [g, c] : a)
        if (!c.is_zero()) return false;
    return true;
}

struct Generator {
    std::string name;
    int source = 0;   // object indices
    int target = 0;
    int degree = 0;   // intrinsic grading-group degree
};

// Structure constants are stored in the suspended convention: with reduced
// degrees ||a|| = |a| - 1, each mu^s is an odd operator of reduced degree +1,
// inputs read left to right (source of a_{k+1} = target of a_k), and the
// curved A-infinity relations are
//
//   sum_{i+j+k=s} (-1)^{||a_1||+...+||a_i||}
//       mu(a_1,..,a_i, mu(a_{i+1},..,a_{i+j}), a_{i+j+1},..,a_s) = 0.
//
// Dictionary to a classical differential graded algebra: mu^1(a) = da,
// mu^2(a,b) = (-1)^{|a|} a*b. A strict unit e then satisfies
// mu^2(e,a) = a, mu^2(a,e) = (-1)^{|a|} a, mu^{s != 2}(..,e,..) = 0.
struct AInfStructure {
    std::vector<std::string> objects;
    std::vector<Generator> gens;
    BulkRingDescriptor ring;
    int sMax = 2;  // structure maps stored for arities 0..sMax
    std::map<std::vector<int>, Element> mu_;  // arity >= 1
    std::map<int, Element> mu0_;              // curvature, per object
    std::optional<std::vector<int>> strictUnits;  // per-object generator id

    int degree(int g) const { return gens[g].degree; }
    int reduced(int g) const { return degree(g) - 1; }
    int source(int g) const { return gens[g].source; }
    int target(int g) const { return gens[g].target; }

    int add_object(const std::string& name) {
        objects.push_back(name);
        return static_cast<int>(objects.size()) - 1;
    }
    int add_generator(std::string name, int src, int tgt, int deg) {
        gens.push_back({std::move(name), src, tgt, deg});
        return static_cast<int>(gens.size()) - 1;
    }
    int find_generator(const std::string& name) const {
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (gens[i].name == name) return static_cast<int>(i);
        throw UnknownSymbol("unknown generator: " + name);
    }

    void set_mu(const std::vector<int>& inputs, int output, RingElement coeff) {
        if (coeff.is_strictly_zero()) return;
        auto& e = mu_[inputs];
        auto it = e.find(output);
        if (it == e.end())
            e[output] = std::move(coeff);
        else {
            it->second += coeff;
            if (it->second.is_strictly_zero()) e.erase(it);
        }
        if (static_cast<int>(inputs.size()) > sMax) sMax = static_cast<int>(inputs.size());
    }
    void set_mu0(int object, int output, RingElement coeff) {
        if (coeff.is_strictly_zero()) return;
        mu0_[object][output] = std::move(coeff);
    }

    bool composable(std::span<const int> tuple) const {
        for (std::size_t k = 0; k + 1 < tuple.size(); ++k)
            if (target(tuple[k]) != source(tuple[k + 1])) return false;
        return true;
    }

    Element mu(const std::vector<int>& inputs) const {
        auto it = mu_.find(inputs);
        return it == mu_.end() ? Element{} : it->second;
    }
    Element mu0(int object) const {
        auto it = mu0_.find(object);
        return it == mu0_.end() ? Element{} : it->second;
    }
    bool curved() const {
        for (const auto& [o, e] : mu0_)
            if (!element_is_zero(e)) return true;
        return false;
    }

    // mu applied with one slot filled by a combination instead of a generator.
    Element mu_with_element(const std::vector<int>& prefix, const Element& x,
                            const std::vector<int>& suffix) const {
        Element out;
        std::vector<int> tuple = prefix;
        tuple.push_back(0);
        tuple.insert(tuple.end(), suffix.begin(), suffix.end());
        for (const auto& [g, c] : x) {
            tuple[prefix.size()] = g;
            Element m = mu(tuple);
            if (m.empty()) continue;
            element_add(out, element_scaled(m, c, ring));
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Relation checking

struct RelationViolation {
    std::vector<int> tuple;  // external inputs (empty = arity-0 relation, then object set)
    int object = -1;
    Element residual;
};

struct RelationReport {
    std::vector<RelationViolation> violations;
    int checkedArityMax = 0;
    std::string uncheckedTail;  // human note about arities beyond the cap
    std::vector<std::string> degreeErrors;
    bool pass() const { return violations.empty() && degreeErrors.empty(); }
};

namespace detail {

// Enumerate all composable generator tuples of the given arity.
inline void for_each_composable(const AInfStructure& C, int arity,
                                const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> tuple(arity);
    std::function<void(int)> rec = [&](int k) {
        if (k == arity) {
            fn(tuple);
            return;
        }
        for (int g = 0; g < static_cast<int>(C.gens.size()); ++g) {
            if (k > 0 && C.source(g) != C.target(tuple[k - 1])) continue;
            tuple[k] = g;
            rec(k + 1);
        }
    };
    rec(0);
}

// The curved A-infinity residual on a fixed external tuple.
inline Element ainf_residual(const AInfStructure& C, const std::vector<int>& tuple) {
    const int s = static_cast<int>(tuple.size());
    Element out;
    int eps = 0;  // sum of reduced degrees of tuple[0..i-1]
    for (int i = 0; i <= s; ++i) {
        // inner arity j block tuple[i..i+j-1]; j = 0 inserts the curvature.
        for (int j = 0; i + j <= s; ++j) {
            Element inner;
            if (j == 0) {
                int obj = i > 0 ? C.target(tuple[i - 1])
                                : (s > 0 ? C.source(tuple[0]) : -1);
                if (obj < 0) continue;
                inner = C.mu0(obj);
            } else {
                std::vector<int> block(tuple.begin() + i, tuple.begin() + i + j);
                inner = C.mu(block);
            }
            if (inner.empty()) continue;
            std::vector<int> prefix(tuple.begin(), tuple.begin() + i);
            std::vector<int> suffix(tuple.begin() + i + j, tuple.end());
            Element term = C.mu_with_element(prefix, inner, suffix);
            if (term.empty()) continue;
            if (eps % 2 != 0) term = element_negated(std::move(term));
            element_add(out, term);
        }
        if (i < s) eps += C.reduced(tuple[i]);
    }
    for (auto& [g, c] : out) C.ring.reduce(c);
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_strictly_zero() ? out.erase(it) : std::next(it);
    return out;
}

}  // namespace detail

// Verifies the A-infinity degree bookkeeping and the curved relations on all
// composable tuples of arity <= sMax + 1.
inline RelationReport checkAInfRelations(const AInfStructure& C) {
    RelationReport rep;
    const Grading& gr = C.ring.grading;

    auto check_degree = [&](const std::vector<int>& inputs, const Element& out, int object) {
        int in_red = 1;  // operator degree +1 on reduced degrees
        for (int g : inputs) in_red += C.reduced(g);
        for (const auto& [g, c] : out) {
            if (c.is_zero() && c.is_strictly_zero()) continue;
            std::optional<int> cd = C.ring.degree(c);
            if (!cd) {
                std::ostringstream os;
                os << "inhomogeneous coefficient in mu^" << inputs.size();
                rep.degreeErrors.push_back(os.str());
                continue;
            }
            if (!gr.degrees_equal(C.reduced(g), in_red + *cd)) {
                std::ostringstream os;
                os << "degree mismatch: mu^" << inputs.size() << " -> " << C.gens[g].name;
                if (object >= 0) os << " (curvature of " << C.objects[object] << ")";
                rep.degreeErrors.push_back(os.str());
            }
        }
    };
    for (const auto& [o, e] : C.mu0_) check_degree({}, e, o);
    for (const auto& [in, e] : C.mu_) check_degree(in, e, -1);

    // Arity-0 relations: mu^1(mu^0) = 0 per object.
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        Element m0 = C.mu0(o);
        if (m0.empty()) continue;
        Element r = C.mu_with_element({}, m0, {});
        for (auto& [g, c] : r) C.ring.reduce(c);
        if (!element_is_zero(r)) rep.violations.push_back({{}, o, r});
    }
    // The relation at external arity s can involve an inner block of arity
    // j <= sMax composed into an outer map of arity s - j + 1 <= sMax, so
    // s <= 2*sMax - 1 exhausts everything the stored maps can produce.
    rep.checkedArityMax = std::max(C.sMax + 1, 2 * C.sMax - 1);
    for (int s = 1; s <= rep.checkedArityMax; ++s) {
        detail::for_each_composable(C, s, [&](const std::vector<int>& tuple) {
            Element r = detail::ainf_residual(C, tuple);
            if (!element_is_zero(r)) rep.violations.push_back({tuple, -1, r});
        });
    }
    {
        std::ostringstream os;
        os << "arities > " << rep.checkedArityMax << " not checked (structure maps stored up to "
           << C.sMax << ")";
        rep.uncheckedTail = os.str();
    }
    return rep;
}

// Strict-unit report: mu^2(e,a) = a, mu^2(a,e) = (-1)^{|a|} a, all other
// arities annihilate e.
struct UnitReport {
    std::vector<std::string> failures;
    bool applicable = false;
    bool pass() const { return failures.empty(); }
};

inline UnitReport checkStrictUnits(const AInfStructure& C) {
    UnitReport rep;
    if (!C.strictUnits) return rep;
    rep.applicable = true;
    const auto& units = *C.strictUnits;
    auto expect = [&](const std::vector<int>& in, const Element& want, const char* what) {
        Element got = C.mu(in);
        Element diff = got;
        element_add(diff, element_negated(want));
        for (auto& [g, c] : diff) C.ring.reduce(c);
        if (!element_is_zero(diff)) {
            std::ostringstream os;
            os << what << " fails at (";
            for (int g : in) os << C.gens[g].name << " ";
            os << ")";
            rep.failures.push_back(os.str());
        }
    };
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        int e = units[o];
        if (C.degree(e) != 0 || C.source(e) != o || C.target(e) != o) {
            rep.failures.push_back("declared unit of " + C.objects[o] +
                                   " is not a degree-0 endomorphism");
            continue;
        }
        for (int a = 0; a < static_cast<int>(C.gens.size()); ++a) {
            if (C.source(a) == o) {
                Element want;
                want[a] = RingElement::one();
                expect({e, a}, want, "mu^2(e,a) = a");
            }
            if (C.target(a) == o) {
                Element want;
                want[a] = (Grading::is_odd(C.degree(a)) ? Rational(-1) : Rational(1)) *
                          RingElement::one();
                expect({a, e}, want, "mu^2(a,e) = (-1)^{|a|} a");
            }
        }
        // e annihilated by all other stored arities.
        for (const auto& [in, out] : C.mu_) {
            if (in.size() == 2) continue;
            for (int g : in)
                if (g == e && !element_is_zero(out))
                    rep.failures.push_back("unit enters nonzero mu^" +
                                           std::to_string(in.size()));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Unitalization: adjoin a strict unit e+ per object (structure maps extended
// by the unit rules above, everything else unchanged).
inline AInfStructure unitalize(const AInfStructure& C) {
    AInfStructure P = C;
    std::vector<int> units;
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o)
        units.push_back(P.add_generator("e+@" + C.objects[o], o, o, 0));
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        int e = units[o];
        for (int a = 0; a < static_cast<int>(P.gens.size()); ++a) {
            if (P.source(a) == o) P.set_mu({e, a}, a, RingElement::one());
            if (P.target(a) == o && a != e)
                P.set_mu({a, e}, a,
                         (Grading::is_odd(P.degree(a)) ? Rational(-1) : Rational(1)) *
                             RingElement::one());
        }
    }
    P.strictUnits = units;
    if (P.sMax < 2) P.sMax = 2;
    return P;
}

// ---------------------------------------------------------------------------
// Bounding cochains

struct IdealDescriptor {
    // "zero": the residual must vanish; "bulk": it must lie in the ideal
    // generated by the bulk variables.
    enum Kind { Zero, Bulk } kind = Zero;

    bool contains(const RingElement& x) const {
        if (kind == Zero) return x.is_zero();
        for (const auto& [m, c] : x.monomials)
            if (m.empty() && !c.is_zero()) return false;
        return true;
    }
};

struct BoundingCochainAssignment {
    std::map<int, Element> perObject;  // object -> odd endomorphism element
    IdealDescriptor modIdeal;
};

// Positive filtration level: positive T-valuation or positive bulk order.
inline bool filtration_positive(const RingElement& x) {
    for (const auto& [m, c] : x.monomials) {
        if (m.total_order() > 0) continue;
        auto v = c.valuation();
        if (!v || *v <= 0) {
            if (!c.is_zero()) return false;
        }
    }
    return true;
}

inline void validate_bounding_cochain(const AInfStructure& C,
                                      const BoundingCochainAssignment& b) {
    for (const auto& [o, el] : b.perObject) {
        for (const auto& [g, c] : el) {
            if (C.source(g) != o || C.target(g) != o)
                throw std::invalid_argument("bounding cochain entry is not an endomorphism");
            if (!Grading::is_odd(C.degree(g)))
                throw std::invalid_argument("bounding cochain must have odd total degree");
            if (!filtration_positive(c))
                throw NonconvergentSum("bounding cochain has non-positive filtration level");
        }
    }
}

struct MaurerCartanReport {
    std::map<int, Element> residuals;  // per object, nonzero residual mod ideal
    bool pass() const { return residuals.empty(); }
};

namespace detail {

// sum over all insertion patterns of copies of b around the fixed inputs:
// mu^{s+k}(b..b, a_1, b..b, ..., a_s, b..b). Reduced degree of b is even, so
// no Koszul signs appear.
inline Element deformed_mu(const AInfStructure& C, const BoundingCochainAssignment& bc,
                           const std::vector<int>& inputs) {
    Element out;
    const int s = static_cast<int>(inputs.size());
    // choose insertion counts k_0..k_s with s + sum k_i <= sMax
    std::vector<int> counts(s + 1, 0);
    std::function<void(int, int)> rec = [&](int gap, int used) {
        if (gap == s + 1) {
            int total = s + used;
            if (total == 0) return;
            // expand multilinearly over the b entries in each gap
            std::vector<int> tuple;
            RingElement coeff = RingElement::one();
            std::function<void(int, int)> fill = [&](int g, int inner) {
                if (g == s + 1) {
                    Element m = C.mu(tuple);
                    if (!m.empty()) element_add(out, element_scaled(m, coeff, C.ring));
                    return;
                }
                // object of gap g
                int obj = (g < s) ? (g == 0 ? C.source(inputs[0]) : C.target(inputs[g - 1]))
                                  : (s > 0 ? C.target(inputs[s - 1]) : -1);
                if (s == 0) obj = inner;  // handled by caller for arity 0
                auto fill_copies = [&](auto&& self, int copies) -> void {
                    if (copies == 0) {
                        if (g < s) tuple.push_back(inputs[g]);
                        fill(g + 1, inner);
                        if (g < s) tuple.pop_back();
                        return;
                    }
                    auto it = bc.perObject.find(obj);
                    if (it == bc.perObject.end()) return;
                    RingElement saved = coeff;
                    for (const auto& [bg, bcoeff] : it->second) {
                        if (C.source(bg) != obj) continue;
                        tuple.push_back(bg);
                        coeff = C.ring.mul(saved, bcoeff);
                        if (!coeff.is_strictly_zero()) self(self, copies - 1);
                        tuple.pop_back();
                    }
                    coeff = saved;
                };
                fill_copies(fill_copies, counts[g]);
            };
            fill(0, -1);
            return;
        }
        for (int k = 0; used + s + k <= C.sMax; ++k) {
            counts[gap] = k;
            rec(gap + 1, used + k);
        }
        counts[gap] = 0;
    };
    rec(0, 0);
    for (auto& [g, c] : out) C.ring.reduce(c);
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_strictly_zero() ? out.erase(it) : std::next(it);
    return out;
}

// Curvature of (object, b): sum_{k>=0} mu^k(b,...,b).
inline Element deformed_mu0(const AInfStructure& C, const BoundingCochainAssignment& bc,
                            int object) {
    Element out = C.mu0(object);
    auto it = bc.perObject.find(object);
    const Element empty;
    const Element& b = it == bc.perObject.end() ? empty : it->second;
    for (int k = 1; k <= C.sMax; ++k) {
        // all k-tuples of entries of b
        std::vector<int> tuple;
        RingElement coeff = RingElement::one();
        std::function<void(int)> rec = [&](int depth) {
            if (depth == k) {
                Element m = C.mu(tuple);
                if (!m.empty()) element_add(out, element_scaled(m, coeff, C.ring));
                return;
            }
            RingElement saved = coeff;
            for (const auto& [bg, bcoeff] : b) {
                tuple.push_back(bg);
                coeff = C.ring.mul(saved, bcoeff);
                if (!coeff.is_strictly_zero()) rec(depth + 1);
                tuple.pop_back();
            }
            coeff = saved;
        };
        rec(0);
    }
    for (auto& [g, c] : out) C.ring.reduce(c);
    for (auto jt = out.begin(); jt != out.end();)
        jt = jt->second.is_strictly_zero() ? out.erase(jt) : std::next(jt);
    return out;
}

}  // namespace detail

inline MaurerCartanReport checkMaurerCartan(const AInfStructure& C,
                                            const BoundingCochainAssignment& b) {
    validate_bounding_cochain(C, b);
    MaurerCartanReport rep;
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        Element r = detail::deformed_mu0(C, b, o);
        bool ok = true;
        for (const auto& [g, c] : r)
            if (!b.modIdeal.contains(c)) ok = false;
        if (!ok) rep.residuals[o] = r;
    }
    return rep;
}

inline AInfStructure deformByBoundingCochains(const AInfStructure& C,
                                              const BoundingCochainAssignment& b) {
    validate_bounding_cochain(C, b);
    AInfStructure D = C;
    D.mu_.clear();
    D.mu0_.clear();
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        Element m0 = detail::deformed_mu0(C, b, o);
        for (auto& [g, c] : m0) D.set_mu0(o, g, c);
    }
    for (int s = 1; s <= C.sMax; ++s) {
        detail::for_each_composable(C, s, [&](const std::vector<int>& tuple) {
            Element m = detail::deformed_mu(C, b, tuple);
            for (auto& [g, c] : m) D.set_mu(tuple, g, c);
        });
    }
    return D;
}

// ---------------------------------------------------------------------------
// Base change along a ring morphism: same objects and bases, coefficients
// mapped through f.
inline AInfStructure baseChange(const AInfStructure& C, const RingMorphismWithDerivation& f) {
    AInfStructure D = C;
    D.ring = *f.target;
    D.mu_.clear();
    D.mu0_.clear();
    for (const auto& [o, e] : C.mu0_)
        for (const auto& [g, c] : e) D.set_mu0(o, g, D.ring.reduced(f.apply(c)));
    for (const auto& [in, e] : C.mu_)
        for (const auto& [g, c] : e) D.set_mu(in, g, D.ring.reduced(f.apply(c)));
    return D;
}

}  // namespace nchodge
