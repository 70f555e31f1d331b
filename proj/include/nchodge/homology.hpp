#pragma once

#include <map>
#include <string>
#include <vector>

#include "nchodge/hochschild.hpp"
#include "nchodge/linalg.hpp"

namespace nchodge {

enum class ComplexKind { hochschild, nonunital };

// Basis of length-truncated words, bucketed by homological degree
// n = -(reduced internal degree) - 1 (normalized for mod-2 gradings).
struct ComplexBasis {
    std::vector<Word> words;
    std::map<Word, int> index;
    std::map<int, std::vector<int>> byDegree;
    bool pureNovikov = true;  // all differential coefficients scalar-valued
};

inline ComplexBasis enumerateWords(const AInfStructure& C, ComplexKind kind) {
    HView V{C};
    ComplexBasis B;
    const int maxEntries = C.ring.truncation.lengthMax + 1;
    const int nGens = static_cast<int>(C.gens.size());
    std::vector<int> cur;
    auto push = [&](Sector sec) {
        Word w{sec, cur};
        if (!word_composable(V, w)) return;
        int n = C.ring.grading.normalize(word_homological_degree(V, w));
        B.index[w] = static_cast<int>(B.words.size());
        B.byDegree[n].push_back(static_cast<int>(B.words.size()));
        B.words.push_back(std::move(w));
    };
    std::function<void()> rec = [&]() {
        if (!cur.empty()) {
            // vee word: cyclic composability checked in push
            push(Sector::vee);
            if (kind == ComplexKind::nonunital) push(Sector::wedge);
        }
        if (static_cast<int>(cur.size()) >= maxEntries) return;
        for (int g = 0; g < nGens; ++g) {
            if (!cur.empty() && V.source(g) != V.target(cur.back())) continue;
            cur.push_back(g);
            rec();
            cur.pop_back();
        }
    };
    rec();
    return B;
}

// Differential matrices d_n : C_n -> C_{n-1} as sparse Novikov matrices.
// Requires scalar-valued structure constants (ranks are computed over the
// Novikov field; bulk-variable coefficients are out of scope here).
struct AssembledComplex {
    ComplexBasis basis;
    std::map<int, SparseMatrix> d;  // keyed by source degree n
    bool truncationDropped = false;
};

inline NovikovScalar require_scalar(const RingElement& x, bool* ok) {
    NovikovScalar s = NovikovScalar::zero();
    for (const auto& [m, c] : x.monomials) {
        if (!m.empty()) {
            *ok = false;
            continue;
        }
        s += c;
    }
    return s;
}

inline AssembledComplex assembleComplex(const AInfStructure& C, ComplexKind kind) {
    HView V{C};
    AssembledComplex A;
    A.basis = enumerateWords(C, kind);
    const Grading& gr = C.ring.grading;
    for (const auto& [n, ws] : A.basis.byDegree) {
        int m = gr.normalize(n - 1);
        auto it = A.basis.byDegree.find(m);
        int rows = it == A.basis.byDegree.end() ? 0 : static_cast<int>(it->second.size());
        SparseMatrix mat(rows, static_cast<int>(ws.size()));
        std::map<int, int> rowOf;  // global word index -> row
        if (it != A.basis.byDegree.end())
            for (int r = 0; r < rows; ++r) rowOf[it->second[r]] = r;
        for (int col = 0; col < static_cast<int>(ws.size()); ++col) {
            ChainVector x;
            x[A.basis.words[ws[col]]] = RingElement::one();
            TruncationFlag fl;
            ChainVector bx = hochschildB(C, x, &fl);
            if (fl.droppedWords) A.truncationDropped = true;
            for (const auto& [w, c] : bx) {
                if (kind == ComplexKind::hochschild && w.sector == Sector::wedge) {
                    // vee-only complex: b preserves the vee span, anything else
                    // signals an input outside the complex
                    continue;
                }
                auto wi = A.basis.index.find(w);
                if (wi == A.basis.index.end()) {
                    A.truncationDropped = true;
                    continue;
                }
                bool ok = true;
                NovikovScalar s = require_scalar(c, &ok);
                if (!ok) A.basis.pureNovikov = false;
                auto ri = rowOf.find(wi->second);
                if (ri != rowOf.end()) mat.add(ri->second, col, s);
            }
        }
        A.d[n] = std::move(mat);
    }
    return A;
}

struct RankTable {
    std::map<int, int> ranks;           // homological degree -> rank
    std::map<int, int> dims;            // chain-level dimensions
    bool stable = false;                // ranks unchanged at lengthMax - 2
    bool truncationDropped = false;
    bool pureNovikov = true;
};

inline std::map<int, int> homologyRanksAtLength(const AInfStructure& C, ComplexKind kind,
                                                int degLo, int degHi, RankTable* meta) {
    AssembledComplex A = assembleComplex(C, kind);
    if (meta) {
        meta->truncationDropped = meta->truncationDropped || A.truncationDropped;
        meta->pureNovikov = meta->pureNovikov && A.basis.pureNovikov;
    }
    const Grading& gr = C.ring.grading;
    std::map<int, int> rk;  // rank of d_n
    auto rank_of = [&](int n) {
        auto it = A.d.find(n);
        return it == A.d.end() ? 0 : rank(it->second);
    };
    std::map<int, int> out;
    for (int n = degLo; n <= degHi; ++n) {
        int nn = gr.normalize(n);
        auto it = A.basis.byDegree.find(nn);
        int dim = it == A.basis.byDegree.end() ? 0 : static_cast<int>(it->second.size());
        if (meta) meta->dims[n] = dim;
        int up = gr.kind == GradingKind::Mod2Graded ? gr.normalize(nn + 1) : nn + 1;
        out[n] = dim - rank_of(nn) - rank_of(up);
    }
    return out;
}

inline RankTable homologyRanks(const AInfStructure& C, ComplexKind kind, int degLo,
                               int degHi) {
    RankTable t;
    t.ranks = homologyRanksAtLength(C, kind, degLo, degHi, &t);
    if (C.ring.truncation.lengthMax >= 2) {
        AInfStructure shorter = C;
        shorter.ring.truncation.lengthMax = C.ring.truncation.lengthMax - 2;
        auto prev = homologyRanksAtLength(shorter, kind, degLo, degHi, nullptr);
        t.stable = true;
        for (int n = degLo; n <= degHi; ++n)
            if (prev[n] != t.ranks[n]) t.stable = false;
    }
    return t;
}

struct NonunitalComparisonReport {
    bool applicable = false;
    bool agree = false;
    RankTable plain;     // CC_*
    RankTable nonunital; // CC^{nu}_*
    std::string note;
};

inline NonunitalComparisonReport nonunitalComparison(const AInfStructure& C, int degLo,
                                                     int degHi) {
    NonunitalComparisonReport rep;
    if (!C.strictUnits) {
        rep.note = "not applicable: no declared strict units";
        return rep;
    }
    rep.applicable = true;
    rep.plain = homologyRanks(C, ComplexKind::hochschild, degLo, degHi);
    rep.nonunital = homologyRanks(C, ComplexKind::nonunital, degLo, degHi);
    rep.agree = rep.plain.ranks == rep.nonunital.ranks;
    rep.note = rep.agree ? "rank tables agree on the window"
                         : "rank tables differ on the window";
    return rep;
}

}  // namespace nchodge
