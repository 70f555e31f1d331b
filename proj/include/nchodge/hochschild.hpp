#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nchodge/ainf.hpp"

namespace nchodge {

// ---------------------------------------------------------------------------
// Hochschild words. A vee word is c_0[c_1|...|c_s]; a wedge word carries an
// implicit leading e+ (so its full cyclic word is e+[c_0|...|c_s]). Words with
// an interior e+, and the length-zero wedge word e+[], are degenerate and are
// quotiented eagerly: they normalize to 0.
//
// Internally every operator works on the "full" entry list, where the virtual
// unit of object o is encoded as the negative id -(o+1). The unit has degree
// 0, hence reduced degree -1 (odd).

enum class Sector { vee, wedge };

struct Word {
    Sector sector = Sector::vee;
    std::vector<int> entries;
    auto operator<=>(const Word&) const = default;
};

using ChainVector = std::map<Word, RingElement>;

inline int eplus_id(int object) { return -(object + 1); }
inline bool is_eplus(int id) { return id < 0; }
inline int eplus_object(int id) { return -id - 1; }

// Unital view of a structure: generator queries and mu extended to the
// virtual units by the strict unit rules.
struct HView {
    const AInfStructure& C;

    int degree(int g) const { return is_eplus(g) ? 0 : C.degree(g); }
    int reduced(int g) const { return degree(g) - 1; }
    int source(int g) const { return is_eplus(g) ? eplus_object(g) : C.source(g); }
    int target(int g) const { return is_eplus(g) ? eplus_object(g) : C.target(g); }

    Element mu(const std::vector<int>& in) const {
        bool hasE = false;
        for (int g : in)
            if (is_eplus(g)) hasE = true;
        if (!hasE) return C.mu(in);
        if (in.size() != 2) return {};
        Element out;
        if (is_eplus(in[0])) {
            out[in[1]] = RingElement::one();  // mu2(e,a) = a (also a = e)
        } else {
            out[in[0]] = (Grading::is_odd(degree(in[0])) ? Rational(-1) : Rational(1)) *
                         RingElement::one();  // mu2(a,e) = (-1)^{|a|} a
        }
        return out;
    }
    Element mu0(int object) const { return C.mu0(object); }
};

// full entry list <-> sector form
inline std::vector<int> word_full(const HView& V, const Word& w) {
    if (w.sector == Sector::vee) return w.entries;
    std::vector<int> full;
    full.reserve(w.entries.size() + 1);
    full.push_back(eplus_id(V.source(w.entries.front())));
    full.insert(full.end(), w.entries.begin(), w.entries.end());
    return full;
}

// Normalize a full entry list into a word; nullopt = degenerate (interior or
// repeated e+, or the bare length-zero e+).
inline std::optional<Word> normalize_full(const std::vector<int>& full) {
    int nE = 0;
    for (int g : full)
        if (is_eplus(g)) ++nE;
    if (nE == 0) return Word{Sector::vee, full};
    if (nE > 1 || !is_eplus(full.front())) return std::nullopt;
    if (full.size() == 1) return std::nullopt;  // e+[] is degenerate
    return Word{Sector::wedge, {full.begin() + 1, full.end()}};
}

inline bool word_composable(const HView& V, const Word& w) {
    const auto& e = w.entries;
    if (e.empty()) return w.sector == Sector::vee && false;  // empty vee word invalid
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
        if (V.target(e[i]) != V.source(e[i + 1])) return false;
    if (w.sector == Sector::vee) return V.target(e.back()) == V.source(e.front());
    return V.target(e.back()) == V.source(e.front());  // e+ sits at that object
}

// Reduced (internal) degree of a word; reported homological degree is
// n = -reduced - 1 (so a single degree-0 entry sits in degree 0).
inline int word_reduced_degree(const HView& V, const Word& w) {
    int d = w.sector == Sector::wedge ? -1 : 0;
    for (int g : w.entries) d += V.reduced(g);
    return d;
}
inline int word_homological_degree(const HView& V, const Word& w) {
    return -word_reduced_degree(V, w) - 1;
}

inline void chain_add_word(ChainVector& x, const Word& w, const RingElement& c) {
    if (c.is_strictly_zero()) return;
    auto it = x.find(w);
    if (it == x.end())
        x[w] = c;
    else {
        it->second += c;
        if (it->second.is_strictly_zero()) x.erase(it);
    }
}
inline void chain_add(ChainVector& x, const ChainVector& y) {
    for (const auto& [w, c] : y) chain_add_word(x, w, c);
}
inline ChainVector chain_scaled(const ChainVector& x, const RingElement& c,
                                const BulkRingDescriptor& ring) {
    ChainVector r;
    for (const auto& [w, v] : x) {
        RingElement p = ring.mul(c, v);
        if (!p.is_strictly_zero()) r[w] = p;
    }
    return r;
}
inline ChainVector chain_negated(ChainVector x) {
    for (auto& [w, c] : x) c = -c;
    return x;
}
inline bool chain_is_zero(const ChainVector& x) {
    for (const auto& [w, c] : x)
        if (!c.is_zero()) return false;
    return true;
}
inline void chain_reduce(ChainVector& x, const BulkRingDescriptor& ring) {
    for (auto it = x.begin(); it != x.end();) {
        ring.reduce(it->second);
        it = it->second.is_strictly_zero() ? x.erase(it) : std::next(it);
    }
}

struct TruncationFlag {
    bool droppedWords = false;  // words beyond lengthMax were discarded
};

// ---------------------------------------------------------------------------
// The Hochschild differential b on the non-unital complex, computed on the
// full entry list. Two families of terms:
//   type 1: mu contracts a (possibly empty -> curvature) block not containing
//           the based entry w_0; the operator crosses (w_0..w_{i-1}), giving
//           the Koszul sign (-1)^{||w_0||+...+||w_{i-1}||}.
//   type 2: the block wraps around and contains w_0; the word is first
//           rotated so the block is in front (Koszul rotation sign on reduced
//           degrees), then mu is applied at the front with no extra sign.
inline ChainVector hochschildB(const AInfStructure& C, const ChainVector& x,
                               TruncationFlag* flag = nullptr) {
    HView V{C};
    ChainVector out;
    const int lengthMax = C.ring.truncation.lengthMax;
    auto emit = [&](const std::vector<int>& full, const RingElement& coeff) {
        auto w = normalize_full(full);
        if (!w) return;
        if (static_cast<int>(w->entries.size()) > lengthMax + 1) {
            if (flag) flag->droppedWords = true;
            return;
        }
        chain_add_word(out, *w, coeff);
    };

    for (const auto& [w, coeff] : x) {
        std::vector<int> full = word_full(V, w);
        const int n = static_cast<int>(full.size());  // entries w_0..w_{n-1}
        std::vector<int> red(n);
        for (int i = 0; i < n; ++i) red[i] = V.reduced(full[i]) & 1 ? 1 : 0;

        // type 1: block full[i..j], 1 <= i, j <= n-1, j >= i-1 (empty = mu0)
        for (int i = 1; i <= n; ++i) {
            int eps = 0;
            for (int l = 0; l < i; ++l) eps += red[l];
            for (int j = i - 1; j <= n - 1; ++j) {
                Element inner;
                if (j == i - 1) {
                    inner = V.mu0(V.target(full[i - 1]));
                } else {
                    std::vector<int> block(full.begin() + i, full.begin() + j + 1);
                    inner = V.mu(block);
                }
                if (inner.empty()) continue;
                for (const auto& [g, c] : inner) {
                    std::vector<int> nf(full.begin(), full.begin() + i);
                    nf.push_back(g);
                    nf.insert(nf.end(), full.begin() + j + 1, full.end());
                    RingElement term = C.ring.mul(coeff, c);
                    if (eps % 2 != 0) term = -term;
                    emit(nf, C.ring.reduced(term));
                }
            }
        }
        // type 2: block (full[i..n-1], full[0..j]) containing w_0;
        // i in 1..n (i = n: empty tail, plain prefix block), j in 0..i-1.
        for (int i = 1; i <= n; ++i) {
            int back = 0;
            for (int l = i; l < n; ++l) back += red[l];
            int front = 0;
            for (int l = 0; l < i; ++l) front += red[l];
            int rotSign = (front % 2) * (back % 2);
            for (int j = 0; j <= i - 1; ++j) {
                std::vector<int> block(full.begin() + i, full.end());
                block.insert(block.end(), full.begin(), full.begin() + j + 1);
                Element inner = V.mu(block);
                if (inner.empty()) continue;
                for (const auto& [g, c] : inner) {
                    std::vector<int> nf;
                    nf.push_back(g);
                    nf.insert(nf.end(), full.begin() + j + 1, full.begin() + i);
                    RingElement term = C.ring.mul(coeff, c);
                    if (rotSign) term = -term;
                    emit(nf, C.ring.reduced(term));
                }
            }
        }
    }
    chain_reduce(out, C.ring);
    return out;
}

// Connes B: sum of all rotations with the leading virtual unit adjoined;
// vanishes on the wedge sector.
inline ChainVector connesB(const AInfStructure& C, const ChainVector& x,
                           TruncationFlag* flag = nullptr) {
    HView V{C};
    ChainVector out;
    const int lengthMax = C.ring.truncation.lengthMax;
    for (const auto& [w, coeff] : x) {
        if (w.sector == Sector::wedge) continue;
        const auto& e = w.entries;
        const int n = static_cast<int>(e.size());
        if (n > lengthMax) {
            if (flag) flag->droppedWords = true;
            continue;
        }
        std::vector<int> red(n);
        for (int i = 0; i < n; ++i) red[i] = V.reduced(e[i]) & 1 ? 1 : 0;
        for (int r = 0; r < n; ++r) {
            int front = 0, back = 0;
            for (int l = 0; l < r; ++l) front += red[l];
            for (int l = r; l < n; ++l) back += red[l];
            Word nw;
            nw.sector = Sector::wedge;
            nw.entries.insert(nw.entries.end(), e.begin() + r, e.end());
            nw.entries.insert(nw.entries.end(), e.begin(), e.begin() + r);
            RingElement term = coeff;
            if ((front % 2) && (back % 2)) term = -term;
            chain_add_word(out, nw, term);
        }
    }
    chain_reduce(out, C.ring);
    return out;
}

// ---------------------------------------------------------------------------
// Hochschild cochains: sparse multilinear maps, stored like structure maps.
// `shift` is the operator's reduced-degree shift (mu itself has shift 1);
// its parity drives every Koszul sign.
struct Cochain {
    int shift = 1;
    std::map<std::vector<int>, Element> entries;   // arity >= 1
    std::map<int, Element> entries0;               // per-object arity-0 values
    bool odd() const { return Grading::is_odd(shift); }

    Element value(const std::vector<int>& in) const {
        auto it = entries.find(in);
        return it == entries.end() ? Element{} : it->second;
    }
    Element value0(int object) const {
        auto it = entries0.find(object);
        return it == entries0.end() ? Element{} : it->second;
    }
    bool is_zero() const {
        for (const auto& [k, e] : entries)
            if (!element_is_zero(e)) return false;
        for (const auto& [o, e] : entries0)
            if (!element_is_zero(e)) return false;
        return true;
    }
    int maxArity() const {
        int a = 0;
        for (const auto& [k, e] : entries) a = std::max(a, static_cast<int>(k.size()));
        return a;
    }
};

// Cochains vanish on the virtual units (normalized cochains).
inline Element cochain_eval(const Cochain& f, const std::vector<int>& in) {
    for (int g : in)
        if (is_eplus(g)) return {};
    return f.value(in);
}

// Gerstenhaber-style composition sum: sum_i (-1)^{|g| * eps_i}
// f(a_1..a_i, g(block), ...) over all blocks (arity-0 insertions included).
namespace detail {

struct OpView {
    std::function<Element(const std::vector<int>&)> val;    // arity >= 1
    std::function<Element(int)> val0;                       // per object
    bool odd = true;
};

inline OpView op_of_mu(const HView& V) {
    return {[&V](const std::vector<int>& in) { return V.mu(in); },
            [&V](int o) { return V.mu0(o); }, true};
}
inline OpView op_of_cochain(const Cochain& f) {
    return {[&f](const std::vector<int>& in) { return cochain_eval(f, in); },
            [&f](int o) { return f.value0(o); }, f.odd()};
}

// (f o g)(tuple): inner g over every block of the tuple.
inline Element compose_on(const HView& V, const OpView& f, const OpView& g,
                          const std::vector<int>& tuple) {
    const int s = static_cast<int>(tuple.size());
    Element out;
    int eps = 0;
    for (int i = 0; i <= s; ++i) {
        for (int j = 0; i + j <= s; ++j) {
            Element inner;
            if (j == 0) {
                int obj = i > 0 ? V.target(tuple[i - 1]) : (s > 0 ? V.source(tuple[0]) : -1);
                if (obj < 0) continue;
                inner = g.val0(obj);
            } else {
                std::vector<int> block(tuple.begin() + i, tuple.begin() + i + j);
                inner = g.val(block);
            }
            if (inner.empty()) continue;
            for (const auto& [h, c] : inner) {
                std::vector<int> outer(tuple.begin(), tuple.begin() + i);
                outer.push_back(h);
                outer.insert(outer.end(), tuple.begin() + i + j, tuple.end());
                Element v = f.val(outer);
                if (v.empty()) continue;
                Element term = element_scaled(v, c, V.C.ring);
                if (g.odd && (eps % 2)) term = element_negated(std::move(term));
                element_add(out, term);
            }
        }
        if (i < s) eps += (V.reduced(tuple[i]) & 1);
    }
    return out;
}

}  // namespace detail

// Hochschild cochain differential: delta(f) = mu o f - (-1)^{|f|} f o mu,
// evaluated entrywise on all composable tuples of arity <= sMax + maxArity.
inline Cochain cochainDifferential(const AInfStructure& C, const Cochain& f) {
    HView V{C};
    Cochain df;
    df.shift = f.shift + 1;
    auto fop = detail::op_of_cochain(f);
    auto muop = detail::op_of_mu(V);
    const int amax = std::min(C.ring.truncation.lengthMax, f.maxArity() + C.sMax);
    // arity-0 part: mu o f on the empty tuple = mu "applied to" f's curvature,
    // i.e. mu^1(f0) plus f evaluated on mu0 (empty-tuple composition).
    for (int o = 0; o < static_cast<int>(C.objects.size()); ++o) {
        Element a;
        Element f0 = f.value0(o);
        if (!f0.empty()) element_add(a, C.mu_with_element({}, f0, {}));
        Element m0 = C.mu0(o);
        if (!m0.empty()) {
            Element b;
            for (const auto& [g, c] : m0) {
                Element v = cochain_eval(f, {g});
                if (!v.empty()) element_add(b, element_scaled(v, c, C.ring));
            }
            if (f.odd()) b = element_negated(std::move(b));
            element_add(a, element_negated(std::move(b)));
        }
        for (auto it = a.begin(); it != a.end();)
            it = it->second.is_strictly_zero() ? a.erase(it) : std::next(it);
        if (!a.empty()) df.entries0[o] = a;
    }
    for (int s = 1; s <= amax; ++s) {
        detail::for_each_composable(C, s, [&](const std::vector<int>& tuple) {
            Element a = detail::compose_on(V, muop, fop, tuple);
            Element b = detail::compose_on(V, fop, muop, tuple);
            // delta f = mu o f - (-1)^{|f|} f o mu
            if (!f.odd()) b = element_negated(std::move(b));
            element_add(a, std::move(b));
            for (auto& [g, c] : a) C.ring.reduce(c);
            for (auto it = a.begin(); it != a.end();)
                it = it->second.is_strictly_zero() ? a.erase(it) : std::next(it);
            if (!a.empty()) df.entries[tuple] = a;
        });
    }
    return df;
}

// ---------------------------------------------------------------------------
// Cap product. The contraction keeps the based entry w_0 in front:
//   f cap (w_0[w_1|..|w_s]) = sum mu(w_0, w_1..w_i, f(w_{i+1}..w_j),
//                                     w_{j+1}..w_l)[w_{l+1}|..|w_s]
// over 0 <= i <= j <= l <= s (f-block possibly empty = arity-0 value). The
// operator crosses the based entry with its intrinsic parity (w_0 is not
// suspended in the contraction picture), the rest reduced:
// sign = (-1)^{|f| * (|w_0| + ||w_1|| + ... + ||w_i||)}. With this the unit
// cochain acts as the identity, and [b, f cap -] = -(delta f) cap -.
inline ChainVector capProduct(const AInfStructure& C, const Cochain& f,
                              const ChainVector& x, TruncationFlag* flag = nullptr) {
    HView V{C};
    ChainVector out;
    const int lengthMax = C.ring.truncation.lengthMax;
    auto emit = [&](const std::vector<int>& full, const RingElement& coeff) {
        auto w = normalize_full(full);
        if (!w) return;
        if (static_cast<int>(w->entries.size()) > lengthMax + 1) {
            if (flag) flag->droppedWords = true;
            return;
        }
        chain_add_word(out, *w, coeff);
    };
    for (const auto& [w, coeff] : x) {
        std::vector<int> full = word_full(V, w);
        const int n = static_cast<int>(full.size());
        std::vector<int> red(n);
        for (int i = 0; i < n; ++i) red[i] = V.reduced(full[i]) & 1 ? 1 : 0;
        for (int i = 0; i <= n - 1; ++i) {
            int eps = 1;  // based entry crossed with intrinsic parity
            for (int l = 0; l <= i; ++l) eps += red[l];
            for (int j = i; j <= n - 1; ++j) {
                Element fval;
                if (j == i) {
                    fval = f.value0(V.target(full[i]));
                } else {
                    bool clean = true;
                    std::vector<int> block(full.begin() + i + 1, full.begin() + j + 1);
                    for (int g : block)
                        if (is_eplus(g)) clean = false;
                    fval = clean ? f.value(block) : Element{};
                }
                if (fval.empty()) continue;
                for (int l = j; l <= n - 1; ++l) {
                    for (const auto& [g, c] : fval) {
                        std::vector<int> mutuple(full.begin(), full.begin() + i + 1);
                        mutuple.push_back(g);
                        mutuple.insert(mutuple.end(), full.begin() + j + 1,
                                       full.begin() + l + 1);
                        Element mval = V.mu(mutuple);
                        if (mval.empty()) continue;
                        RingElement cc = C.ring.mul(coeff, c);
                        if (f.odd() && (eps % 2)) cc = -cc;
                        for (const auto& [h, mc] : mval) {
                            std::vector<int> nf;
                            nf.push_back(h);
                            nf.insert(nf.end(), full.begin() + l + 1, full.end());
                            emit(nf, C.ring.reduced(C.ring.mul(cc, mc)));
                        }
                    }
                }
            }
        }
    }
    chain_reduce(out, C.ring);
    return out;
}

// ---------------------------------------------------------------------------
// First-order deformation class: the t-linear part of a one-bulk-variable
// family, as a cochain over the t = 0 structure.
struct DeformationClassResult {
    Cochain cocycle;
    bool closed = false;
    std::string note;
};

inline AInfStructure restrictToCentralFiber(const AInfStructure& family,
                                            const std::string& tname) {
    AInfStructure C0 = family;
    C0.mu_.clear();
    C0.mu0_.clear();
    auto drop_t = [&](const RingElement& x) {
        RingElement r;
        for (const auto& [m, c] : x.monomials)
            if (m.exponents.find(tname) == m.exponents.end()) r.monomials[m] = c;
        return r;
    };
    for (const auto& [o, e] : family.mu0_)
        for (const auto& [g, c] : e) C0.set_mu0(o, g, drop_t(c));
    for (const auto& [in, e] : family.mu_)
        for (const auto& [g, c] : e) C0.set_mu(in, g, drop_t(c));
    return C0;
}

inline DeformationClassResult deformationClass(const AInfStructure& family,
                                               const std::string& tname) {
    // coefficient of t^1, with the t stripped
    auto tpart = [&](const RingElement& x) {
        RingElement r;
        for (const auto& [m, c] : x.monomials) {
            auto it = m.exponents.find(tname);
            if (it == m.exponents.end() || it->second != 1) continue;
            Monomial stripped = m;
            stripped.exponents.erase(tname);
            r.monomials[stripped] = c;
        }
        return r;
    };
    DeformationClassResult res;
    int td = family.ring.variable_degree(tname);
    res.cocycle.shift = 1 - td;
    for (const auto& [o, e] : family.mu0_)
        for (const auto& [g, c] : e) {
            RingElement p = tpart(c);
            if (!p.is_strictly_zero()) res.cocycle.entries0[o][g] = p;
        }
    for (const auto& [in, e] : family.mu_)
        for (const auto& [g, c] : e) {
            RingElement p = tpart(c);
            if (!p.is_strictly_zero()) res.cocycle.entries[in][g] = p;
        }
    AInfStructure C0 = restrictToCentralFiber(family, tname);
    Cochain d = cochainDifferential(C0, res.cocycle);
    res.closed = d.is_zero();
    res.note = res.closed ? "t-linear part is a cocycle over the central fiber"
                          : "t-linear part FAILS the cocycle condition";
    return res;
}

// ---------------------------------------------------------------------------
// Pushforward along the bounding-cochain functor F: chains of the deformed
// structure map to chains of C by summing all insertions of b into the cyclic
// gaps of the word. The reduced degree of b is even, so no signs appear.
inline ChainVector pushforwardAlongF(const AInfStructure& C,
                                     const BoundingCochainAssignment& bc,
                                     const ChainVector& x,
                                     TruncationFlag* flag = nullptr) {
    validate_bounding_cochain(C, bc);
    HView V{C};
    ChainVector out;
    const int lengthMax = C.ring.truncation.lengthMax;
    for (const auto& [w, coeff] : x) {
        std::vector<int> full = word_full(V, w);
        const int n = static_cast<int>(full.size());
        // insert any number of b's after each entry (cyclic gaps); recursion
        // over gap index with running coefficient, stopping on truncation-zero
        std::vector<int> cur;
        std::function<void(int, RingElement)> rec = [&](int gap, RingElement c) {
            if (static_cast<int>(cur.size()) > lengthMax + 1) {
                if (flag) flag->droppedWords = true;
                return;
            }
            if (gap == n) {
                auto nw = normalize_full(cur);
                if (nw) chain_add_word(out, *nw, c);
                return;
            }
            cur.push_back(full[gap]);
            // zero or more insertions after entry `gap`
            std::function<void(RingElement)> ins = [&](RingElement cc) {
                rec(gap + 1, cc);
                int obj = V.target(full[gap]);
                auto it = bc.perObject.find(obj);
                if (it == bc.perObject.end()) return;
                for (const auto& [bg, bcf] : it->second) {
                    RingElement nc = C.ring.reduced(C.ring.mul(cc, bcf));
                    if (nc.is_strictly_zero()) continue;
                    if (static_cast<int>(cur.size()) > lengthMax + 1) {
                        if (flag) flag->droppedWords = true;
                        continue;
                    }
                    cur.push_back(bg);
                    ins(nc);
                    cur.pop_back();
                }
            };
            ins(c);
            cur.pop_back();
        };
        rec(0, coeff);
    }
    chain_reduce(out, C.ring);
    return out;
}

}  // namespace nchodge
