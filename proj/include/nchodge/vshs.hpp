#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nchodge/connections.hpp"

namespace nchodge {

struct RankMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotASection : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegreeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Polynomials in the formal variable u over the bulk ring, truncated at uMax.
// u carries homological degree -2.
using UPoly = std::map<int, RingElement>;

inline bool upoly_is_zero(const UPoly& p) {
    for (const auto& [k, c] : p)
        if (!c.is_zero()) return false;
    return true;
}

inline void upoly_add(UPoly& x, const UPoly& y) {
    for (const auto& [k, c] : y) {
        x[k] += c;
        if (x[k].is_strictly_zero()) x.erase(k);
    }
}

inline UPoly upoly_negated(const UPoly& x) {
    UPoly r;
    for (const auto& [k, c] : x) r[k] = -c;
    return r;
}

// multiply by a u-free ring element
inline UPoly upoly_scale(const BulkRingDescriptor& ring, const RingElement& c,
                         const UPoly& x) {
    UPoly r;
    for (const auto& [k, v] : x) {
        RingElement w = ring.mul(c, v);
        if (!w.is_strictly_zero()) r[k] = std::move(w);
    }
    return r;
}

inline UPoly upoly_mul(const BulkRingDescriptor& ring, const UPoly& a, const UPoly& b) {
    const int uMax = ring.truncation.uMax;
    UPoly r;
    for (const auto& [j, u] : a)
        for (const auto& [k, v] : b) {
            if (j + k > uMax) continue;
            RingElement w = ring.mul(u, v);
            if (w.is_strictly_zero()) continue;
            r[j + k] += w;
            if (r[j + k].is_strictly_zero()) r.erase(j + k);
        }
    return r;
}

// u -> -u (the sesquilinear conjugation)
inline UPoly upoly_conj(const UPoly& x) {
    UPoly r;
    for (const auto& [k, c] : x) r[k] = (k % 2 != 0) ? -c : c;
    return r;
}

// multiply by u, dropping powers above uMax
inline UPoly upoly_shift(const UPoly& x, int uMax) {
    UPoly r;
    for (const auto& [k, c] : x)
        if (k + 1 <= uMax) r[k + 1] = c;
    return r;
}

inline RingElement upoly_coeff(const UPoly& x, int k) {
    auto it = x.find(k);
    return it == x.end() ? RingElement{} : it->second;
}

// ---------------------------------------------------------------------------
// A candidate polarized variation of semi-infinite Hodge structure, presented
// on a free based module over the truncated u-ring. The connection is the
// "u nabla" operator: per derivation label, u nabla e_j = sum_i A[l][i][j] e_i,
// extended to scalar multiples by the u-weighted Leibniz rule
//   u nabla (f s) = u D(f) s + f (u nabla s).
struct VSHSData {
    const BulkRingDescriptor* ring = nullptr;
    Derivation D;
    std::vector<int> degrees;  // homological degree of each basis vector
    std::map<std::string, std::vector<std::vector<UPoly>>> connection;
    std::vector<std::vector<UPoly>> pairing;
    int dimensionParity = 0;  // n in the morphism sign (-1)^{n(n+1)/2}

    int rank() const { return static_cast<int>(degrees.size()); }
};

// A u-linear map between the underlying modules, as a matrix in the bases.
struct CandidateMorphism {
    std::vector<std::vector<UPoly>> map;
    int expectedSign = 1;
    bool requireIsomorphism = false;
};

namespace detail {

inline std::string window_note(const BulkRingDescriptor& ring) {
    const TruncationPolicy& t = ring.truncation;
    std::ostringstream os;
    os << "checked at (tPrecision="
       << (t.tPrecision ? to_string(*t.tPrecision) : std::string("exact"))
       << ", uMax=" << t.uMax << ", lengthMax=" << t.lengthMax << ")";
    return os.str();
}

// derivative of a u-polynomial along one label of D, coefficientwise
inline UPoly upoly_derive(const BulkRingDescriptor& ring, const Derivation& D,
                          const std::string& label, const UPoly& x) {
    UPoly r;
    for (const auto& [k, c] : x) {
        OmegaElement d = derivationApply(ring, D, c);
        auto it = d.find(label);
        if (it != d.end() && !it->second.is_strictly_zero()) r[k] = it->second;
    }
    return r;
}

inline std::vector<std::string> connection_labels(const VSHSData& V) {
    std::vector<std::string> labels;
    for (const auto& [l, m] : V.connection) labels.push_back(l);
    return labels;
}

}  // namespace detail

// apply the connection along one label to a section (vector of u-polynomials)
inline std::vector<UPoly> applyConnection(const VSHSData& V, const std::string& label,
                                          const std::vector<UPoly>& s) {
    const int r = V.rank();
    if (static_cast<int>(s.size()) != r) throw RankMismatch("section/rank mismatch");
    std::vector<UPoly> out(r);
    const auto it = V.connection.find(label);
    for (int j = 0; j < r; ++j) {
        // u D(s_j) e_j
        UPoly d = detail::upoly_derive(*V.ring, V.D, label, s[j]);
        upoly_add(out[j], upoly_shift(d, V.ring->truncation.uMax));
        // s_j * A[.][j]
        if (it != V.connection.end())
            for (int i = 0; i < r; ++i)
                upoly_add(out[i], upoly_mul(*V.ring, it->second[i][j], s[j]));
    }
    return out;
}

// the pairing, extended u-sesquilinearly (second slot u -> -u)
inline UPoly evaluatePairing(const VSHSData& V, const std::vector<UPoly>& s,
                             const std::vector<UPoly>& t) {
    const int r = V.rank();
    UPoly out;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            UPoly term = upoly_mul(*V.ring, s[i], upoly_conj(t[j]));
            upoly_add(out, upoly_mul(*V.ring, term, V.pairing[i][j]));
        }
    return out;
}

// ---------------------------------------------------------------------------
struct VSHSReport {
    bool leibniz = true;
    bool covariance = true;
    bool graded = true;
    bool nondegenerateAtU0 = true;
    std::vector<std::string> failures;
    std::string window;

    bool pass() const { return failures.empty(); }
};

inline VSHSReport checkVSHS(const VSHSData& V) {
    VSHSReport rep;
    rep.window = detail::window_note(*V.ring);
    const int r = V.rank();
    const int uMax = V.ring->truncation.uMax;
    auto fail = [&](bool& flag, const std::string& msg) {
        flag = false;
        rep.failures.push_back(msg);
    };

    // shape
    for (const auto& [l, A] : V.connection)
        if (static_cast<int>(A.size()) != r ||
            (r > 0 && static_cast<int>(A[0].size()) != r))
            throw RankMismatch("connection matrix shape for label " + l);
    if (static_cast<int>(V.pairing.size()) != r)
        throw RankMismatch("pairing matrix shape");

    // (i) u-weighted Leibniz on scalar multiples of basis sections, for a
    // panel of test scalars: T and each bulk generator.
    std::vector<RingElement> testScalars;
    testScalars.push_back(NovikovScalar::T(1) * RingElement::one());
    for (const auto& v : V.ring->variables) {
        RingElement g;
        Monomial m;
        m.exponents[v.name] = 1;
        g.monomials[m] = NovikovScalar::one();
        testScalars.push_back(g);
    }
    for (const std::string& l : detail::connection_labels(V))
        for (int j = 0; j < r && rep.leibniz; ++j)
            for (const RingElement& f : testScalars) {
                std::vector<UPoly> fs(r), ej(r);
                fs[j][0] = f;
                ej[j][0] = RingElement::one();
                std::vector<UPoly> lhs = applyConnection(V, l, fs);
                std::vector<UPoly> rhs = applyConnection(V, l, ej);
                for (int i = 0; i < r; ++i) rhs[i] = upoly_scale(*V.ring, f, rhs[i]);
                OmegaElement df = derivationApply(*V.ring, V.D, f);
                auto it = df.find(l);
                if (it != df.end()) {
                    UPoly t;
                    if (1 <= uMax) t[1] = it->second;
                    upoly_add(rhs[j], t);
                }
                for (int i = 0; i < r; ++i) {
                    upoly_add(lhs[i], upoly_negated(rhs[i]));
                    if (!upoly_is_zero(lhs[i])) {
                        fail(rep.leibniz, "Leibniz fails along " + l + " at basis " +
                                              std::to_string(j));
                        break;
                    }
                }
                if (!rep.leibniz) break;
            }

    // (ii) pairing covariance: u D<e_i,e_j> = <u nabla e_i, e_j> + <e_i, u nabla e_j>
    for (const std::string& l : detail::connection_labels(V)) {
        const auto& A = V.connection.at(l);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                UPoly lhs = upoly_shift(
                    detail::upoly_derive(*V.ring, V.D, l, V.pairing[i][j]), uMax);
                UPoly rhs;
                for (int k = 0; k < r; ++k) {
                    upoly_add(rhs, upoly_mul(*V.ring, A[k][i], V.pairing[k][j]));
                    upoly_add(rhs, upoly_mul(*V.ring, upoly_conj(A[k][j]),
                                             V.pairing[i][k]));
                }
                upoly_add(lhs, upoly_negated(rhs));
                if (!upoly_is_zero(lhs))
                    fail(rep.covariance, "covariance fails along " + l + " at (" +
                                             std::to_string(i) + "," +
                                             std::to_string(j) + ")");
            }
    }

    // (iii) gradedness of the pairing: every nonzero term of <e_i,e_j> at u^k
    // sits in one common degree class deg e_i + deg e_j - 2k + deg(coeff).
    {
        const Grading& gr = V.ring->grading;
        std::optional<int> cls;
        for (int i = 0; i < r && rep.graded; ++i)
            for (int j = 0; j < r && rep.graded; ++j)
                for (const auto& [k, c] : V.pairing[i][j]) {
                    if (c.is_strictly_zero()) continue;
                    std::optional<int> d = V.ring->degree(c);
                    if (!d) {
                        fail(rep.graded, "inhomogeneous pairing entry at (" +
                                             std::to_string(i) + "," +
                                             std::to_string(j) + ")");
                        break;
                    }
                    int cl = gr.normalize(V.degrees[i] + V.degrees[j] - 2 * k + *d);
                    if (!cls) cls = cl;
                    if (!gr.degrees_equal(*cls, cl)) {
                        fail(rep.graded, "pairing not graded at (" + std::to_string(i) +
                                             "," + std::to_string(j) + ")");
                        break;
                    }
                }
    }

    // nondegeneracy at u = 0
    {
        SparseMatrix g(r, r);
        bool scalarOk = true;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                g.set(i, j, require_scalar(upoly_coeff(V.pairing[i][j], 0), &scalarOk));
        if (!scalarOk)
            fail(rep.nondegenerateAtU0, "pairing at u=0 has non-scalar entries");
        else if (rank(g) != r)
            fail(rep.nondegenerateAtU0, "pairing degenerate at u=0");
    }
    return rep;
}

// ---------------------------------------------------------------------------
struct MorphismReport {
    bool connection = true;
    bool pairing = true;
    std::optional<bool> isomorphism;
    std::vector<std::string> failures;
    std::string window;

    bool pass() const { return failures.empty(); }
};

namespace detail {

// determinant by cofactor expansion (small matrices only)
inline NovikovScalar dense_det(const std::vector<std::vector<NovikovScalar>>& m) {
    const int n = static_cast<int>(m.size());
    if (n == 0) return NovikovScalar::one();
    if (n == 1) return m[0][0];
    NovikovScalar d = NovikovScalar::zero();
    for (int c = 0; c < n; ++c) {
        if (m[0][c].is_strictly_zero()) continue;
        std::vector<std::vector<NovikovScalar>> minor;
        for (int r = 1; r < n; ++r) {
            std::vector<NovikovScalar> row;
            for (int c2 = 0; c2 < n; ++c2)
                if (c2 != c) row.push_back(m[r][c2]);
            minor.push_back(std::move(row));
        }
        NovikovScalar t = m[0][c] * dense_det(minor);
        d += (c % 2 != 0) ? -t : t;
    }
    return d;
}

}  // namespace detail

inline MorphismReport checkMorphism(const CandidateMorphism& phi, const VSHSData& source,
                                    const VSHSData& target) {
    const int r = source.rank();
    if (target.rank() != r || static_cast<int>(phi.map.size()) != r ||
        (r > 0 && static_cast<int>(phi.map[0].size()) != r))
        throw RankMismatch("morphism requires equal source/target ranks");
    MorphismReport rep;
    rep.window = detail::window_note(*source.ring);
    const BulkRingDescriptor& ring = *source.ring;
    const int uMax = ring.truncation.uMax;
    auto fail = [&](bool& flag, const std::string& msg) {
        flag = false;
        rep.failures.push_back(msg);
    };

    // connection intertwining:
    //   u D(Phi) + A_target * Phi = Phi * A_source   (labelwise)
    for (const std::string& l : detail::connection_labels(source)) {
        const auto& As = source.connection.at(l);
        auto itT = target.connection.find(l);
        if (itT == target.connection.end())
            throw RankMismatch("target lacks connection label " + l);
        const auto& At = itT->second;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                UPoly lhs = upoly_shift(
                    detail::upoly_derive(ring, source.D, l, phi.map[i][j]), uMax);
                for (int k = 0; k < r; ++k) {
                    upoly_add(lhs, upoly_mul(ring, At[i][k], phi.map[k][j]));
                    upoly_add(lhs, upoly_negated(
                                       upoly_mul(ring, phi.map[i][k], As[k][j])));
                }
                if (!upoly_is_zero(lhs))
                    fail(rep.connection, "connection intertwining fails along " + l +
                                             " at (" + std::to_string(i) + "," +
                                             std::to_string(j) + ")");
            }
    }

    // pairing intertwining: <Phi s, Phi t>_target = expectedSign * <s, t>_source
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            UPoly lhs;
            for (int k = 0; k < r; ++k)
                for (int l2 = 0; l2 < r; ++l2) {
                    UPoly term =
                        upoly_mul(ring, phi.map[k][i], upoly_conj(phi.map[l2][j]));
                    upoly_add(lhs, upoly_mul(ring, term, target.pairing[k][l2]));
                }
            UPoly rhs = source.pairing[i][j];
            if (phi.expectedSign < 0) rhs = upoly_negated(rhs);
            upoly_add(lhs, upoly_negated(rhs));
            if (!upoly_is_zero(lhs))
                fail(rep.pairing, "pairing intertwining fails at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
        }

    if (phi.requireIsomorphism) {
        if (r > 8) {
            rep.isomorphism = false;
            rep.failures.push_back("isomorphism check limited to rank <= 8");
        } else {
            bool scalarOk = true;
            std::vector<std::vector<NovikovScalar>> m(
                r, std::vector<NovikovScalar>(r, NovikovScalar::zero()));
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j)
                    m[i][j] = require_scalar(upoly_coeff(phi.map[i][j], 0), &scalarOk);
            bool iso = false;
            if (scalarOk) {
                NovikovScalar d = detail::dense_det(m);
                iso = !d.is_strictly_zero() && d.valuation() && *d.valuation() == 0;
            }
            rep.isomorphism = iso;
            if (!iso) rep.failures.push_back("mod-u matrix is not a unit");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
struct OppositeReport {
    bool complementary = true;
    bool isotropic = true;
    bool graded = true;
    std::vector<std::string> failures;
    std::string window;

    bool pass() const { return failures.empty(); }
};

// sigma: rank x rank matrix whose columns are the images sigma(e_j).
inline OppositeReport checkOppositeSubspace(const VSHSData& V,
                                            const std::vector<std::vector<UPoly>>& sigma) {
    const int r = V.rank();
    if (static_cast<int>(sigma.size()) != r ||
        (r > 0 && static_cast<int>(sigma[0].size()) != r))
        throw RankMismatch("splitting matrix shape");
    // section of the mod-u projection: sigma = id mod u
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            RingElement c = upoly_coeff(sigma[i][j], 0);
            if (i == j) c -= RingElement::one();
            if (!c.is_zero()) throw NotASection("sigma is not the identity mod u");
        }
    OppositeReport rep;
    rep.window = detail::window_note(*V.ring);
    auto fail = [&](bool& flag, const std::string& msg) {
        flag = false;
        rep.failures.push_back(msg);
    };
    // complementarity in the u-window is automatic for a section of a free
    // module; recorded for the report.
    // isotropy: <sigma e_i, sigma e_j> has no strictly positive powers of u
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            std::vector<UPoly> si(r), sj(r);
            for (int k = 0; k < r; ++k) {
                si[k] = sigma[k][i];
                sj[k] = sigma[k][j];
            }
            UPoly g = evaluatePairing(V, si, sj);
            for (const auto& [k, c] : g)
                if (k > 0 && !c.is_zero()) {
                    fail(rep.isotropic, "isotropy fails at (" + std::to_string(i) + "," +
                                            std::to_string(j) + "): u^" +
                                            std::to_string(k) + " term survives");
                    break;
                }
        }
    // gradedness: a nonzero u^k entry sigma[i][j] must connect degrees
    // deg e_i = deg e_j + 2k + deg(coeff)
    const Grading& gr = V.ring->grading;
    for (int i = 0; i < r && rep.graded; ++i)
        for (int j = 0; j < r && rep.graded; ++j)
            for (const auto& [k, c] : sigma[i][j]) {
                if (c.is_strictly_zero()) continue;
                std::optional<int> d = V.ring->degree(c);
                if (!d || !gr.degrees_equal(V.degrees[i],
                                            V.degrees[j] + 2 * k + *d)) {
                    fail(rep.graded, "splitting not graded at (" + std::to_string(i) +
                                         "," + std::to_string(j) + "), u^" +
                                         std::to_string(k));
                    break;
                }
            }
    return rep;
}

// ---------------------------------------------------------------------------
struct MiniversalReport {
    bool bijective = false;
    bool dilatonEligible = false;  // s0 homogeneous of degree 0
    std::vector<std::string> failures;
    std::string window;

    bool pass() const { return failures.empty(); }
};

inline MiniversalReport checkMiniversal(const VSHSData& V, const std::vector<UPoly>& s0,
                                        const std::vector<std::string>& tangentLabels) {
    const int r = V.rank();
    if (static_cast<int>(s0.size()) != r) throw RankMismatch("section/rank mismatch");
    MiniversalReport rep;
    rep.window = detail::window_note(*V.ring);

    // Kodaira-Spencer shaped matrix: column per tangent label, entries the
    // mod-u coefficients of (u nabla)_v s0.
    SparseMatrix m(r, static_cast<int>(tangentLabels.size()));
    bool scalarOk = true;
    for (int c = 0; c < static_cast<int>(tangentLabels.size()); ++c) {
        std::vector<UPoly> img = applyConnection(V, tangentLabels[c], s0);
        for (int i = 0; i < r; ++i)
            m.set(i, c, require_scalar(upoly_coeff(img[i], 0), &scalarOk));
    }
    if (!scalarOk) {
        rep.failures.push_back("(u nabla) s0 mod u has non-scalar entries");
    } else if (static_cast<int>(tangentLabels.size()) != r) {
        rep.failures.push_back("tangent dimension differs from module rank");
    } else if (rank(m) != r) {
        rep.failures.push_back("Kodaira-Spencer map is not bijective");
    } else {
        rep.bijective = true;
    }

    // dilaton-shift eligibility: s0 homogeneous of degree 0
    rep.dilatonEligible = true;
    const Grading& gr = V.ring->grading;
    for (int i = 0; i < r; ++i)
        for (const auto& [k, c] : s0[i]) {
            if (c.is_strictly_zero()) continue;
            std::optional<int> d = V.ring->degree(c);
            if (!d || !gr.degrees_equal(V.degrees[i] - 2 * k + *d, 0))
                rep.dilatonEligible = false;
        }
    if (!rep.dilatonEligible)
        rep.failures.push_back("s0 is not homogeneous of degree 0");
    return rep;
}

// ---------------------------------------------------------------------------
// Assemble a quantum-cohomology-shaped connection from star-product tables:
//   u nabla_v (alpha) = u D_v(alpha) - gamma_v * alpha.
struct QuantumLikeInput {
    const BulkRingDescriptor* ring = nullptr;
    Derivation D;
    std::vector<int> degrees;
    // starTables[label][i][j]: coefficient of e_i in gamma_label * e_j
    std::map<std::string, std::vector<std::vector<RingElement>>> starTables;
    // degree carried by gamma_label (0 when unspecified)
    std::map<std::string, int> labelDegrees;
    std::vector<std::vector<UPoly>> pairing;
    int dimensionParity = 0;
};

inline VSHSData buildQuantumLikeConnection(const QuantumLikeInput& in) {
    VSHSData V;
    V.ring = in.ring;
    V.D = in.D;
    V.degrees = in.degrees;
    V.pairing = in.pairing;
    V.dimensionParity = in.dimensionParity;
    const int r = V.rank();
    const Grading& gr = in.ring->grading;
    for (const auto& [l, tab] : in.starTables) {
        if (static_cast<int>(tab.size()) != r ||
            (r > 0 && static_cast<int>(tab[0].size()) != r))
            throw RankMismatch("star table shape for label " + l);
        int ldeg = in.labelDegrees.count(l) ? in.labelDegrees.at(l) : 0;
        auto& A = V.connection[l];
        A.assign(r, std::vector<UPoly>(r));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                if (tab[i][j].is_strictly_zero()) continue;
                std::optional<int> d = in.ring->degree(tab[i][j]);
                if (!d || !gr.degrees_equal(V.degrees[i],
                                            V.degrees[j] + *d + ldeg))
                    throw DegreeMismatch("star table entry (" + std::to_string(i) +
                                         "," + std::to_string(j) + ") of label " + l);
                A[i][j][0] = -tab[i][j];
            }
    }
    return V;
}

// ---------------------------------------------------------------------------
// End-to-end pipeline: assemble a VSHSData on the degree-`deg` part of the
// negative cyclic homology of a structure, with the Getzler-Gauss-Manin
// connection and the higher residue pairing in a basis of lifted cycle
// representatives.
struct VSHSPipelineResult {
    VSHSData V;
    std::vector<NegativeCyclicChain> representatives;
    bool ok = true;
    std::vector<std::string> notes;
};

namespace detail {

struct FlatSpace {
    std::vector<std::pair<Word, int>> basis;  // (word, u-power)
    std::map<std::pair<Word, int>, int> index;
};

inline FlatSpace flat_space(const ComplexBasis& B, int uMax) {
    FlatSpace F;
    for (const Word& w : B.words)
        for (int k = 0; k <= uMax; ++k) {
            F.index[{w, k}] = static_cast<int>(F.basis.size());
            F.basis.push_back({w, k});
        }
    return F;
}

inline bool flatten_chain(const FlatSpace& F, const NegativeCyclicChain& x,
                          std::vector<NovikovScalar>& out, bool* scalarOk) {
    out.assign(F.basis.size(), NovikovScalar::zero());
    for (const auto& [k, v] : x)
        for (const auto& [w, c] : v) {
            auto it = F.index.find({w, k});
            if (it == F.index.end()) {
                if (!c.is_zero()) return false;  // support outside the window
                continue;
            }
            out[it->second] = require_scalar(c, scalarOk);
        }
    return true;
}

}  // namespace detail

inline VSHSPipelineResult vshsFromStructure(const AInfStructure& C,
                                            const TildeConnection& tilde, int deg,
                                            int dimensionParity) {
    VSHSPipelineResult R;
    const Grading& gr = C.ring.grading;
    const int uMax = C.ring.truncation.uMax;
    HView V{C};
    ComplexBasis B = enumerateWords(C, ComplexKind::nonunital);
    bool scalarOk = true;

    // word indices per normalized degree, and the Hochschild boundary columns
    std::map<int, std::vector<int>> byDeg;
    for (int i = 0; i < static_cast<int>(B.words.size()); ++i)
        byDeg[gr.normalize(word_homological_degree(V, B.words[i]))].push_back(i);
    auto b_of = [&](int wi) {
        ChainVector x;
        x[B.words[wi]] = RingElement::one();
        return hochschildB(C, x);
    };
    auto column_of = [&](const ChainVector& x) {
        std::vector<NovikovScalar> col(B.words.size(), NovikovScalar::zero());
        for (const auto& [w, c] : x) {
            auto it = B.index.find(w);
            if (it != B.index.end()) col[it->second] = require_scalar(c, &scalarOk);
        }
        return col;
    };

    // degree-`deg` Hochschild cycle representatives by rank growth past the
    // boundary space
    const int n = gr.normalize(deg);
    std::vector<std::vector<NovikovScalar>> chosen;  // boundary + cycle columns
    std::vector<ChainVector> reps;
    {
        const auto& idx = byDeg.count(n) ? byDeg.at(n) : std::vector<int>{};
        SparseMatrix d(static_cast<int>(B.words.size()), static_cast<int>(idx.size()));
        for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
            auto col = column_of(b_of(idx[c]));
            for (int r = 0; r < static_cast<int>(col.size()); ++r)
                if (!col[r].is_strictly_zero()) d.set(r, c, col[r]);
        }
        auto cycles = nullspaceBasis(d);
        if (byDeg.count(gr.normalize(n + 1)))
            for (int wi : byDeg.at(gr.normalize(n + 1)))
                chosen.push_back(column_of(b_of(wi)));
        auto rank_of = [&](const std::vector<std::vector<NovikovScalar>>& cs) {
            SparseMatrix m(static_cast<int>(B.words.size()),
                           static_cast<int>(cs.size()));
            for (int c = 0; c < static_cast<int>(cs.size()); ++c)
                for (int r = 0; r < static_cast<int>(cs[c].size()); ++r)
                    if (!cs[c][r].is_strictly_zero()) m.set(r, c, cs[c][r]);
            return rank(m);
        };
        int base = rank_of(chosen);
        for (const auto& z : cycles) {
            std::vector<NovikovScalar> zfull(B.words.size(), NovikovScalar::zero());
            for (int c = 0; c < static_cast<int>(z.size()); ++c) zfull[idx[c]] = z[c];
            chosen.push_back(zfull);
            if (rank_of(chosen) == base + 1) {
                ++base;
                ChainVector rep;
                for (int c = 0; c < static_cast<int>(z.size()); ++c)
                    if (!z[c].is_strictly_zero())
                        rep[B.words[idx[c]]] = z[c] * RingElement::one();
                reps.push_back(std::move(rep));
            } else {
                chosen.pop_back();
            }
        }
    }
    if (reps.empty()) {
        R.ok = false;
        R.notes.push_back("no homology in the requested degree");
        return R;
    }

    // lift each representative to a (b + uB)-cycle: b z_{k+1} = -B z_k
    std::optional<Rational> prec = C.ring.truncation.tPrecision;
    for (const ChainVector& z0 : reps) {
        NegativeCyclicChain zhat;
        zhat[0] = z0;
        ChainVector zk = z0;
        for (int k = 0; k + 1 <= uMax; ++k) {
            ChainVector rhs = chain_negated(connesB(C, zk));
            if (chain_is_zero(rhs)) {
                zk = ChainVector{};
                continue;
            }
            int m = gr.normalize(word_homological_degree(
                V, rhs.begin()->first) + 1);
            const auto& idx = byDeg.count(m) ? byDeg.at(m) : std::vector<int>{};
            SparseMatrix a(static_cast<int>(B.words.size()),
                           static_cast<int>(idx.size()));
            for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
                auto col = column_of(b_of(idx[c]));
                for (int r = 0; r < static_cast<int>(col.size()); ++r)
                    if (!col[r].is_strictly_zero()) a.set(r, c, col[r]);
            }
            auto sol = solveScaled(a, column_of(rhs));
            if (!sol) {
                R.ok = false;
                R.notes.push_back("u-lifting obstruction at layer " +
                                  std::to_string(k + 1));
                break;
            }
            NovikovScalar inv = sol->denom.invert(prec);
            ChainVector znext;
            for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
                NovikovScalar v = sol->x[c] * inv;
                if (!v.is_strictly_zero())
                    znext[B.words[idx[c]]] = v * RingElement::one();
            }
            zhat[k + 1] = znext;
            zk = std::move(znext);
        }
        R.representatives.push_back(std::move(zhat));
    }
    if (!R.ok) return R;

    const int r = static_cast<int>(R.representatives.size());
    VSHSData& D = R.V;
    D.ring = &C.ring;
    D.D = tilde.D;
    D.degrees.assign(r, n);
    D.dimensionParity = dimensionParity;

    // pairing
    D.pairing.assign(r, std::vector<UPoly>(r));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            PairingValue p = higherResiduePairing(C, R.representatives[i],
                                                  R.representatives[j]);
            for (const auto& [k, v] : p) D.pairing[i][j][k] = v;
        }

    // connection: solve  ggm(z_j) = sum_{i,s} c_{i,s} u^s z_i  mod im(b + uB)
    detail::FlatSpace F = detail::flat_space(B, uMax);
    std::vector<std::vector<NovikovScalar>> cols;  // rep shifts first, then boundaries
    const int nShift = uMax + 1;
    for (int i = 0; i < r; ++i)
        for (int s = 0; s <= uMax; ++s) {
            NegativeCyclicChain sh;
            for (const auto& [k, v] : R.representatives[i])
                if (k + s <= uMax) sh[k + s] = v;
            std::vector<NovikovScalar> col;
            detail::flatten_chain(F, sh, col, &scalarOk);
            cols.push_back(std::move(col));
        }
    const int nRepCols = static_cast<int>(cols.size());
    for (const auto& [wk, idx] : F.index) {
        NegativeCyclicChain x;
        x[wk.second][wk.first] = RingElement::one();
        NegativeCyclicChain dx = bPlusUB(C, x);
        if (dx.empty()) continue;
        std::vector<NovikovScalar> col;
        detail::flatten_chain(F, dx, col, &scalarOk);
        cols.push_back(std::move(col));
    }
    SparseMatrix A(static_cast<int>(F.basis.size()), static_cast<int>(cols.size()));
    for (int c = 0; c < static_cast<int>(cols.size()); ++c)
        for (int row = 0; row < static_cast<int>(cols[c].size()); ++row)
            if (!cols[c][row].is_strictly_zero()) A.set(row, c, cols[c][row]);

    for (int j = 0; j < r; ++j) {
        OmegaCyclicChain g = ggmConnection(C, tilde, R.representatives[j]);
        for (const auto& [label, chain] : g) {
            auto& M = D.connection[label];
            if (M.empty()) M.assign(r, std::vector<UPoly>(r));
            std::vector<NovikovScalar> rhs;
            if (!detail::flatten_chain(F, chain, rhs, &scalarOk)) {
                R.ok = false;
                R.notes.push_back("connection image leaves the enumerated window");
                return R;
            }
            auto sol = solveScaled(A, rhs);
            if (!sol) {
                R.ok = false;
                R.notes.push_back("connection does not descend in label " + label);
                return R;
            }
            NovikovScalar inv = sol->denom.invert(prec);
            for (int i = 0; i < r; ++i)
                for (int s = 0; s <= uMax; ++s) {
                    NovikovScalar v = sol->x[i * nShift + s] * inv;
                    if (!v.is_strictly_zero())
                        M[i][j][s] = v * RingElement::one();
                }
        }
        (void)nRepCols;
    }
    // make sure every label has a matrix even if ggm vanished identically
    if (D.connection.empty() && tilde.D.dlogTLabel)
        D.connection[*tilde.D.dlogTLabel].assign(r, std::vector<UPoly>(r));
    if (!scalarOk) {
        R.ok = false;
        R.notes.push_back("non-scalar chain coefficients in the pipeline");
    }
    return R;
}

}  // namespace nchodge
