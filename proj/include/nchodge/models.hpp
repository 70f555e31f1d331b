#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nchodge/cyclic.hpp"

namespace nchodge {

struct ParameterOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Built-in example algebras with known (or brute-force derivable) homological
// data: these are test oracles, not geometry. Structure-map dictionary: the
// ring product and mu^2 are related by a*b = (-1)^{|a|} mu^2(a, b).
enum class ModelKind {
    Field,
    DualNumbers,
    ExteriorAlgebra,
    CliffordDeformation,
    MatrixAlgebra,
    RandomDGA,
};

struct ModelSpec {
    ModelKind kind = ModelKind::Field;
    int n = 1;                       // generator / size count
    std::vector<Rational> tWeights;  // CliffordDeformation: x_i^2 = w_i T e
    unsigned seed = 0;               // RandomDGA
    std::vector<int> dims;           // RandomDGA: [middles, extra socle]
    TruncationPolicy truncation;
};

struct BuiltModel {
    AInfStructure C;
    std::optional<BoundingCochainAssignment> boundingCochain;
    std::map<Word, RingElement> trace;  // top-coefficient functional (may be empty)
    std::string name;
};

namespace detail {

inline RingElement unit_coeff() { return RingElement::one(); }

// Set the strict-unit structure maps for a single object whose unit is `e`:
// mu2(e, a) = a, mu2(a, e) = (-1)^{|a|} a, for every generator a (including e).
inline void set_unit_rules(AInfStructure& C, int object, int e) {
    for (int g = 0; g < static_cast<int>(C.gens.size()); ++g) {
        if (C.source(g) != object || C.target(g) != object) continue;
        if (g == e) continue;
        C.set_mu({e, g}, g, RingElement::one());
        C.set_mu({g, e}, g,
                 Grading::is_odd(C.degree(g)) ? Rational(-1) * RingElement::one()
                                              : RingElement::one());
    }
    C.set_mu({e, e}, e, RingElement::one());
}

// Exterior-algebra skeleton on subset-indexed generators; returns the
// generator id of each subset (bitmask -> id). mu2(xi_S, xi_T) =
// (-1)^{|S|} eps(S, T) xi_{S u T} per the suspension dictionary.
inline std::map<int, int> exterior_skeleton(AInfStructure& C, int object, int n) {
    std::map<int, int> ids;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::string name = mask == 0 ? "e" : "";
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) name += "x" + std::to_string(i + 1);
        int deg = __builtin_popcount(static_cast<unsigned>(mask));
        ids[mask] = C.add_generator(name, object, object, deg);
    }
    auto shuffle_sign = [&](int S, int T) {
        // sign of sorting the concatenation (S-members, T-members)
        int sign = 1;
        for (int i = 0; i < n; ++i) {
            if (!(T & (1 << i))) continue;
            int above = 0;
            for (int j = i + 1; j < n; ++j)
                if (S & (1 << j)) ++above;
            if (above % 2) sign = -sign;
        }
        return sign;
    };
    for (int S = 0; S < (1 << n); ++S)
        for (int T = 0; T < (1 << n); ++T) {
            if (S == 0 || T == 0) continue;  // unit rules set separately
            if (S & T) continue;
            Rational c(shuffle_sign(S, T));
            if (__builtin_popcount(static_cast<unsigned>(S)) % 2) c = -c;
            C.set_mu({ids[S], ids[T]}, ids[S | T], c * RingElement::one());
        }
    return ids;
}

}  // namespace detail

inline BuiltModel buildModel(const ModelSpec& spec) {
    if (spec.n < 1 || spec.n > 4) throw ParameterOutOfRange("model size n must be in 1..4");
    BuiltModel M;
    AInfStructure& C = M.C;
    C.ring.truncation = spec.truncation;
    switch (spec.kind) {
        case ModelKind::Field: {
            M.name = "field";
            int X = C.add_object("X");
            int e = C.add_generator("e", X, X, 0);
            detail::set_unit_rules(C, X, e);
            C.strictUnits = std::vector<int>{e};
            break;
        }
        case ModelKind::DualNumbers: {
            M.name = "dual-numbers";
            int X = C.add_object("X");
            int e = C.add_generator("e", X, X, 0);
            C.add_generator("eps", X, X, 0);
            detail::set_unit_rules(C, X, e);
            C.strictUnits = std::vector<int>{e};
            break;
        }
        case ModelKind::ExteriorAlgebra: {
            if (spec.n > 3) throw ParameterOutOfRange("ExteriorAlgebra supports n <= 3");
            M.name = "exterior-" + std::to_string(spec.n);
            int X = C.add_object("X");
            auto ids = detail::exterior_skeleton(C, X, spec.n);
            detail::set_unit_rules(C, X, ids[0]);
            C.strictUnits = std::vector<int>{ids[0]};
            // top-coefficient trace on single-entry vee words
            Word top{Sector::vee, {ids[(1 << spec.n) - 1]}};
            M.trace[top] = RingElement::one();
            break;
        }
        case ModelKind::CliffordDeformation: {
            if (spec.n < 2) throw ParameterOutOfRange("CliffordDeformation needs n >= 2");
            std::vector<Rational> w = spec.tWeights;
            if (w.empty()) {
                w.assign(spec.n, Rational(1));
                w[1] = Rational(-1);
            }
            if (static_cast<int>(w.size()) != spec.n)
                throw ParameterOutOfRange("CliffordDeformation: one T-weight per generator");
            M.name = "clifford-" + std::to_string(spec.n);
            C.ring.grading.kind = GradingKind::Mod2Graded;
            int X = C.add_object("X");
            auto ids = detail::exterior_skeleton(C, X, spec.n);
            detail::set_unit_rules(C, X, ids[0]);
            C.strictUnits = std::vector<int>{ids[0]};
            // Clifford relations x_i x_i = w_i T, x_i x_j = -x_j x_i: the
            // skeleton already holds the disjoint-support (exterior) products;
            // add the overlapping-support products by insertion-sort
            // normalization.
            for (int S = 1; S < (1 << spec.n); ++S)
                for (int T = 1; T < (1 << spec.n); ++T) {
                    if (!(S & T)) continue;
                    std::vector<int> word;
                    for (int i = 0; i < spec.n; ++i)
                        if (S & (1 << i)) word.push_back(i);
                    int sign = 1, tpow = 0;
                    Rational wprod(1);
                    for (int t = 0; t < spec.n; ++t) {
                        if (!(T & (1 << t))) continue;
                        int pos = static_cast<int>(word.size());
                        while (pos > 0 && word[pos - 1] > t) {
                            --pos;
                            sign = -sign;
                        }
                        if (pos > 0 && word[pos - 1] == t) {
                            word.erase(word.begin() + pos - 1);
                            wprod *= w[t];
                            ++tpow;
                        } else {
                            word.insert(word.begin() + pos, t);
                        }
                    }
                    int R = 0;
                    for (int i : word) R |= 1 << i;
                    Rational c = Rational(sign) * wprod;
                    if (__builtin_popcount(static_cast<unsigned>(S)) % 2) c = -c;
                    if (!(c == 0))
                        C.set_mu({ids[S], ids[T]}, ids[R],
                                 c * (NovikovScalar::T(Rational(tpow)) *
                                      RingElement::one()));
                }
            // bounding cochain b = T^{1/2} sum_i x_i; the Maurer-Cartan
            // residual mu2(b, b) = -(sum_i w_i) T^2 e vanishes exactly iff the
            // weights balance (default weights do).
            Rational wsum(0);
            for (const Rational& v : w) wsum += v;
            if (wsum == 0) {
                BoundingCochainAssignment bc;
                Element b;
                for (int i = 0; i < spec.n; ++i)
                    b[ids[1 << i]] = NovikovScalar::T(Rational(1, 2)) * RingElement::one();
                bc.perObject[X] = std::move(b);
                bc.modIdeal.kind = IdealDescriptor::Zero;
                M.boundingCochain = std::move(bc);
            }
            break;
        }
        case ModelKind::MatrixAlgebra: {
            // M_n as the n-object category with 1-dimensional hom spaces and
            // all compositions equal to 1 (Morita-trivial stand-in).
            M.name = "matrix-" + std::to_string(spec.n);
            std::vector<int> objs;
            for (int i = 0; i < spec.n; ++i)
                objs.push_back(C.add_object("P" + std::to_string(i + 1)));
            std::map<std::pair<int, int>, int> f;
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j)
                    f[{i, j}] = C.add_generator(
                        "f" + std::to_string(i + 1) + std::to_string(j + 1), objs[i],
                        objs[j], 0);
            for (int i = 0; i < spec.n; ++i)
                for (int j = 0; j < spec.n; ++j)
                    for (int k = 0; k < spec.n; ++k)
                        C.set_mu({f[{i, j}], f[{j, k}]}, f[{i, k}], RingElement::one());
            std::vector<int> units;
            for (int i = 0; i < spec.n; ++i) units.push_back(f[{i, i}]);
            C.strictUnits = std::move(units);
            break;
        }
        case ModelKind::RandomDGA: {
            // unit e, odd "middles" m_i, even socle elements z_k that
            // annihilate everything: every choice of coefficients yields an
            // associative differential graded algebra (generate-then-verify).
            int middles = spec.dims.empty() ? 2 : spec.dims[0];
            int socle = spec.dims.size() < 2 ? 1 : spec.dims[1];
            if (middles < 1 || middles > 6 || socle < 1 || socle > 6)
                throw ParameterOutOfRange("RandomDGA dims must be in 1..6");
            M.name = "random-dga-" + std::to_string(spec.seed);
            C.ring.grading.kind = GradingKind::Mod2Graded;
            int X = C.add_object("X");
            int e = C.add_generator("e", X, X, 0);
            std::vector<int> m, z;
            for (int i = 0; i < middles; ++i)
                m.push_back(C.add_generator("m" + std::to_string(i + 1), X, X, 1));
            for (int k = 0; k < socle; ++k)
                z.push_back(C.add_generator("z" + std::to_string(k + 1), X, X, 0));
            std::mt19937 rng(spec.seed);
            auto coin = [&](int lo, int hi) {
                return std::uniform_int_distribution<int>(lo, hi)(rng);
            };
            auto coeff = [&]() -> RingElement {
                Rational c(coin(-2, 2));
                if (c == 0) return RingElement{};
                Rational tw(coin(0, 2), 2);  // T-weight in {0, 1/2, 1}
                return c * (NovikovScalar::T(tw) * RingElement::one());
            };
            // products m_i * m_j = sum_k c_{ijk} z_k (suspension sign: |m|=1)
            for (int i = 0; i < middles; ++i)
                for (int j = 0; j < middles; ++j)
                    for (int k = 0; k < socle; ++k) {
                        RingElement c = coeff();
                        if (!c.is_strictly_zero())
                            C.set_mu({m[i], m[j]}, z[k], Rational(-1) * c);
                    }
            // differential mu^1(m_i) = sum_k d_{ik} z_k
            for (int i = 0; i < middles; ++i)
                for (int k = 0; k < socle; ++k) {
                    RingElement c = coeff();
                    if (!c.is_strictly_zero()) C.set_mu({m[i]}, z[k], c);
                }
            detail::set_unit_rules(C, X, e);
            C.strictUnits = std::vector<int>{e};
            break;
        }
    }
    if (C.sMax < 2) C.sMax = 2;
    return M;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: dense, naive recomputation of homological quantities.
// No sparsity, no pivot strategy, no bucketing tricks; used in tests to
// certify the optimized paths.
enum class OracleQuantity { hhRanks, hcRanks, mukaiGram };

struct OracleTable {
    std::map<int, int> ranks;                        // hhRanks / hcRanks
    std::vector<std::vector<RingElement>> gram;      // mukaiGram
    std::vector<ChainVector> representatives;        // cycles used for the Gram
};

namespace detail {

// Dense fraction-free Gauss-Jordan (cross-multiplication, leftmost-column
// pivoting): independent of the sparse valuation-pivoted path in linalg.
// Returns the pivot row of each column (-1 for free columns) and leaves m in
// reduced form up to pivot scaling.
inline std::vector<int> dense_reduce(std::vector<std::vector<NovikovScalar>>& m) {
    const int rows = static_cast<int>(m.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(m[0].size());
    std::vector<int> pivotOf(cols, -1);
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int p = -1;
        for (int r = rank; r < rows; ++r)
            if (!m[r][c].is_strictly_zero()) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(m[rank], m[p]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank || m[r][c].is_strictly_zero()) continue;
            NovikovScalar piv = m[rank][c], e = m[r][c];
            for (int c2 = 0; c2 < cols; ++c2)
                m[r][c2] = piv * m[r][c2] - e * m[rank][c2];
        }
        pivotOf[c] = rank;
        ++rank;
    }
    return pivotOf;
}

inline int dense_rank(std::vector<std::vector<NovikovScalar>> m) {
    auto pivotOf = dense_reduce(m);
    int rank = 0;
    for (int p : pivotOf)
        if (p >= 0) ++rank;
    return rank;
}

// dense kernel basis of m; vectors are scaled (no division) kernel vectors
inline std::vector<std::vector<NovikovScalar>> dense_kernel(
    std::vector<std::vector<NovikovScalar>> m) {
    auto pivotOf = dense_reduce(m);
    const int cols = static_cast<int>(pivotOf.size());
    NovikovScalar prodAll = NovikovScalar::one();
    for (int c = 0; c < cols; ++c)
        if (pivotOf[c] >= 0) prodAll = prodAll * m[pivotOf[c]][c];
    std::vector<std::vector<NovikovScalar>> ker;
    for (int c = 0; c < cols; ++c) {
        if (pivotOf[c] >= 0) continue;
        std::vector<NovikovScalar> v(cols, NovikovScalar::zero());
        v[c] = prodAll;
        for (int c2 = 0; c2 < cols; ++c2) {
            if (pivotOf[c2] < 0) continue;
            int r = pivotOf[c2];
            if (m[r][c].is_strictly_zero()) continue;
            NovikovScalar others = NovikovScalar::one();
            for (int c3 = 0; c3 < cols; ++c3)
                if (pivotOf[c3] >= 0 && c3 != c2) others = others * m[pivotOf[c3]][c3];
            v[c2] = -(m[r][c] * others);
        }
        ker.push_back(std::move(v));
    }
    return ker;
}

}  // namespace detail

inline OracleTable bruteForceOracle(const AInfStructure& C, OracleQuantity quantity,
                                    int degLo, int degHi) {
    OracleTable out;
    HView V{C};
    const Grading& gr = C.ring.grading;
    // naive word enumeration (every composable word, both sectors)
    ComplexBasis B = enumerateWords(C, ComplexKind::nonunital);
    const int uMax = C.ring.truncation.uMax;
    long total = static_cast<long>(B.words.size()) * (quantity == OracleQuantity::hcRanks
                                                          ? uMax + 1
                                                          : 1);
    if (total > 5000) throw TooLarge("oracle cap exceeded: " + std::to_string(total));

    if (quantity == OracleQuantity::hhRanks || quantity == OracleQuantity::mukaiGram) {
        // dense b per degree
        std::map<int, std::vector<int>> byDeg;
        for (int i = 0; i < static_cast<int>(B.words.size()); ++i)
            byDeg[gr.normalize(word_homological_degree(V, B.words[i]))].push_back(i);
        auto dmat = [&](int n) {
            int nn = gr.normalize(n);
            int mm = gr.normalize(n - 1);
            const auto& cols = byDeg.count(nn) ? byDeg.at(nn) : std::vector<int>{};
            const auto& rows = byDeg.count(mm) ? byDeg.at(mm) : std::vector<int>{};
            // at least one (zero) row so the kernel sees the column count
            std::vector<std::vector<NovikovScalar>> m(
                std::max<std::size_t>(rows.size(), 1),
                std::vector<NovikovScalar>(cols.size(), NovikovScalar::zero()));
            for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
                ChainVector x;
                x[B.words[cols[c]]] = RingElement::one();
                ChainVector bx = hochschildB(C, x);
                for (const auto& [w, cf] : bx) {
                    auto it = B.index.find(w);
                    if (it == B.index.end()) continue;
                    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
                        if (rows[r] == it->second) {
                            bool ok = true;
                            m[r][c] = require_scalar(cf, &ok);
                        }
                }
            }
            return m;
        };
        if (quantity == OracleQuantity::hhRanks) {
            for (int n = degLo; n <= degHi; ++n) {
                auto zs = detail::dense_kernel(dmat(n));
                auto up = dmat(n + 1);
                int dim = byDeg.count(gr.normalize(n))
                              ? static_cast<int>(byDeg.at(gr.normalize(n)).size())
                              : 0;
                // rank of [boundaries] and of [boundaries | cycles]
                std::vector<std::vector<NovikovScalar>> colsDense;
                if (!up.empty() && static_cast<int>(up.size()) == dim) {
                    const int upCols = up.empty() ? 0 : static_cast<int>(up[0].size());
                    for (int c = 0; c < upCols; ++c) {
                        std::vector<NovikovScalar> v(dim, NovikovScalar::zero());
                        for (int r = 0; r < dim; ++r) v[r] = up[r][c];
                        colsDense.push_back(std::move(v));
                    }
                }
                auto rank_cols = [&](const std::vector<std::vector<NovikovScalar>>& cs) {
                    std::vector<std::vector<NovikovScalar>> m(
                        dim, std::vector<NovikovScalar>(cs.size(), NovikovScalar::zero()));
                    for (int c = 0; c < static_cast<int>(cs.size()); ++c)
                        for (int r = 0; r < dim; ++r) m[r][c] = cs[c][r];
                    return detail::dense_rank(std::move(m));
                };
                int bRank = rank_cols(colsDense);
                for (const auto& zv : zs) colsDense.push_back(zv);
                out.ranks[n] = rank_cols(colsDense) - bRank;
            }
        } else {
            // mukaiGram in the requested degree window: pick cycle classes by
            // rank growth and evaluate the pairing densely.
            for (int n = degLo; n <= degHi; ++n) {
                int nn = gr.normalize(n);
                if (!byDeg.count(nn)) continue;
                const auto& idx = byDeg.at(nn);
                auto zs = detail::dense_kernel(dmat(nn));
                auto up = dmat(nn + 1);
                int dim = static_cast<int>(idx.size());
                std::vector<std::vector<NovikovScalar>> chosen;
                if (!up.empty() && static_cast<int>(up.size()) == dim) {
                    const int upCols = up.empty() ? 0 : static_cast<int>(up[0].size());
                    for (int c = 0; c < upCols; ++c) {
                        std::vector<NovikovScalar> v(dim, NovikovScalar::zero());
                        for (int r = 0; r < dim; ++r) v[r] = up[r][c];
                        chosen.push_back(std::move(v));
                    }
                }
                auto rank_cols = [&](const std::vector<std::vector<NovikovScalar>>& cs) {
                    std::vector<std::vector<NovikovScalar>> m(
                        dim, std::vector<NovikovScalar>(cs.size(), NovikovScalar::zero()));
                    for (int c = 0; c < static_cast<int>(cs.size()); ++c)
                        for (int r = 0; r < dim; ++r) m[r][c] = cs[c][r];
                    return detail::dense_rank(std::move(m));
                };
                int base = rank_cols(chosen);
                for (const auto& zv : zs) {
                    chosen.push_back(zv);
                    if (rank_cols(chosen) == base + 1) {
                        ++base;
                        ChainVector rep;
                        for (int i = 0; i < dim; ++i)
                            if (!zv[i].is_strictly_zero())
                                rep[B.words[idx[i]]] = zv[i] * RingElement::one();
                        out.representatives.push_back(std::move(rep));
                    } else {
                        chosen.pop_back();
                    }
                }
            }
            const int r = static_cast<int>(out.representatives.size());
            out.gram.assign(r, std::vector<RingElement>(r));
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    out.gram[i][j] =
                        mukaiPairing(C, out.representatives[i], out.representatives[j]);
        }
        return out;
    }

    // hcRanks: dense homology K-dimensions of the (b + uB) total complex
    std::map<int, std::vector<std::pair<int, int>>> byDeg;  // deg -> (word, k)
    for (int i = 0; i < static_cast<int>(B.words.size()); ++i) {
        int n = word_homological_degree(V, B.words[i]);
        for (int k = 0; k <= uMax; ++k)
            byDeg[gr.normalize(n - 2 * k)].push_back({i, k});
    }
    auto dmat = [&](int n) {
        int nn = gr.normalize(n);
        int mm = gr.normalize(n - 1);
        const auto& cols =
            byDeg.count(nn) ? byDeg.at(nn) : std::vector<std::pair<int, int>>{};
        const auto& rows =
            byDeg.count(mm) ? byDeg.at(mm) : std::vector<std::pair<int, int>>{};
        std::vector<std::vector<NovikovScalar>> m(
            std::max<std::size_t>(rows.size(), 1),
            std::vector<NovikovScalar>(cols.size(), NovikovScalar::zero()));
        for (int c = 0; c < static_cast<int>(cols.size()); ++c) {
            NegativeCyclicChain x;
            x[cols[c].second][B.words[cols[c].first]] = RingElement::one();
            NegativeCyclicChain dx = bPlusUB(C, x);
            for (const auto& [k, v] : dx)
                for (const auto& [w, cf] : v) {
                    auto it = B.index.find(w);
                    if (it == B.index.end()) continue;
                    for (int r = 0; r < static_cast<int>(rows.size()); ++r)
                        if (rows[r] == std::make_pair(it->second, k)) {
                            bool ok = true;
                            m[r][c] = require_scalar(cf, &ok);
                        }
                }
        }
        return m;
    };
    for (int n = degLo; n <= degHi; ++n) {
        int dim = byDeg.count(gr.normalize(n))
                      ? static_cast<int>(byDeg.at(gr.normalize(n)).size())
                      : 0;
        int rkDown = detail::dense_rank(dmat(n));
        int rkUp = detail::dense_rank(dmat(n + 1));
        out.ranks[n] = dim - rkDown - rkUp;
    }
    return out;
}

}  // namespace nchodge
