#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nchodge/novikov.hpp"

namespace nchodge {

struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sparse matrix over the Novikov scalars, row-major.
struct SparseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::map<int, NovikovScalar>> row;

    explicit SparseMatrix(int r = 0, int c = 0) : rows(r), cols(c), row(r) {}

    void set(int i, int j, NovikovScalar v) {
        if (v.is_strictly_zero())
            row[i].erase(j);
        else
            row[i][j] = std::move(v);
    }
    void add(int i, int j, const NovikovScalar& v) {
        auto it = row[i].find(j);
        if (it == row[i].end()) {
            if (!v.is_strictly_zero()) row[i][j] = v;
        } else {
            it->second += v;
            if (it->second.is_strictly_zero()) row[i].erase(it);
        }
    }
    NovikovScalar get(int i, int j) const {
        auto it = row[i].find(j);
        return it == row[i].end() ? NovikovScalar::zero() : it->second;
    }
};

// Fraction-free Gaussian elimination (cross-multiplication), pivoting on the
// entry of lowest T-valuation. No divisions: exact over the polynomial part
// of the Novikov ring, and well defined for truncated scalars.
//
// An entry that has no visible terms but carries a finite precision marker is
// "zero at precision": it cannot serve as a pivot, and if its column's rank
// decision would rest on it we refuse with PrecisionExhausted.
struct Elimination {
    int rank = 0;
    std::vector<int> pivotCols;            // pivot column of echelon row k
    std::vector<std::map<int, NovikovScalar>> echelon;  // rank rows, echelon order
    std::vector<NovikovScalar> pivots;     // pivot values
};

inline Elimination eliminate(SparseMatrix m) {
    Elimination res;
    std::vector<bool> used(m.rows, false);
    std::vector<int> pivotRow;
    for (;;) {
        // find pivot: min valuation among entries of unused rows
        int pr = -1, pc = -1;
        std::optional<Rational> best;
        bool sawImprecise = false;
        for (int i = 0; i < m.rows; ++i) {
            if (used[i]) continue;
            for (const auto& [j, v] : m.row[i]) {
                if (v.terms().empty()) {
                    if (v.precision()) sawImprecise = true;
                    continue;
                }
                Rational val = *v.valuation();
                if (!best || val < *best ||
                    (val == *best && m.row[i].size() < m.row[pr].size())) {
                    best = val;
                    pr = i;
                    pc = j;
                }
            }
        }
        if (pr < 0) {
            if (sawImprecise)
                throw PrecisionExhausted(
                    "cannot certify remaining entries zero at finite precision");
            break;
        }
        used[pr] = true;
        NovikovScalar p = m.row[pr].at(pc);
        // Gauss-Jordan: clear the pivot column from every other row
        // (including earlier pivot rows) so back substitution never sees a
        // foreign pivot column.
        for (int i = 0; i < m.rows; ++i) {
            if (i == pr) continue;
            auto it = m.row[i].find(pc);
            if (it == m.row[i].end()) continue;
            NovikovScalar e = it->second;
            // row_i <- p*row_i - e*row_pr
            std::map<int, NovikovScalar> nr;
            for (const auto& [j, v] : m.row[i]) {
                NovikovScalar w = p * v;
                if (!w.is_strictly_zero()) nr[j] = w;
            }
            for (const auto& [j, v] : m.row[pr]) {
                NovikovScalar w = e * v;
                auto jt = nr.find(j);
                if (jt == nr.end()) {
                    if (!w.is_strictly_zero()) nr[j] = -w;
                } else {
                    jt->second -= w;
                    if (jt->second.is_strictly_zero()) nr.erase(jt);
                }
            }
            nr.erase(pc);
            m.row[i] = std::move(nr);
        }
        pivotRow.push_back(pr);
        res.pivotCols.push_back(pc);
        ++res.rank;
    }
    for (int k = 0; k < res.rank; ++k) {
        res.echelon.push_back(m.row[pivotRow[k]]);
        res.pivots.push_back(m.row[pivotRow[k]].at(res.pivotCols[k]));
    }
    return res;
}

inline int rank(const SparseMatrix& m) { return eliminate(m).rank; }

// Nullspace basis; vectors are scaled to avoid division (each is a nonzero
// multiple of the field-theoretic basis vector).
inline std::vector<std::vector<NovikovScalar>> nullspaceBasis(const SparseMatrix& m) {
    Elimination e = eliminate(m);
    // order echelon rows by pivot column for back substitution
    std::vector<int> order(e.rank);
    for (int k = 0; k < e.rank; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return e.pivotCols[a] < e.pivotCols[b]; });
    std::vector<bool> isPivot(m.cols, false);
    for (int c : e.pivotCols) isPivot[c] = true;

    std::vector<std::vector<NovikovScalar>> basis;
    for (int f = 0; f < m.cols; ++f) {
        if (isPivot[f]) continue;
        std::vector<NovikovScalar> x(m.cols, NovikovScalar::zero());
        x[f] = NovikovScalar::one();
        for (int k = e.rank - 1; k >= 0; --k) {
            int r = order[k];
            int pc = e.pivotCols[r];
            NovikovScalar s = NovikovScalar::zero();
            for (const auto& [j, v] : e.echelon[r])
                if (j != pc && !x[j].is_strictly_zero()) s += v * x[j];
            if (s.is_strictly_zero()) continue;
            // p*x_pc = -s, so rescale x by p and set x_pc = -s
            for (auto& xi : x)
                if (!xi.is_strictly_zero()) xi = e.pivots[r] * xi;
            x[pc] = -s;
        }
        basis.push_back(std::move(x));
    }
    return basis;
}

// Solve A x = b. Returns x together with a common denominator d (solution of
// the field equation is x/d). nullopt when inconsistent.
struct ScaledSolution {
    std::vector<NovikovScalar> x;
    NovikovScalar denom;
};

inline std::optional<ScaledSolution> solveScaled(const SparseMatrix& a,
                                                 const std::vector<NovikovScalar>& b) {
    SparseMatrix aug(a.rows, a.cols + 1);
    aug.row = a.row;
    for (int i = 0; i < a.rows; ++i)
        if (!b[i].is_strictly_zero()) aug.row[i][a.cols] = b[i];
    Elimination e = eliminate(aug);
    for (int k = 0; k < e.rank; ++k)
        if (e.pivotCols[k] == a.cols) return std::nullopt;  // pivot in the b column

    std::vector<int> order(e.rank);
    for (int k = 0; k < e.rank; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return e.pivotCols[x] < e.pivotCols[y]; });

    std::vector<NovikovScalar> x(a.cols, NovikovScalar::zero());
    NovikovScalar denom = NovikovScalar::one();
    // treat the b column as value -denom during substitution
    for (int k = e.rank - 1; k >= 0; --k) {
        int r = order[k];
        int pc = e.pivotCols[r];
        NovikovScalar s = NovikovScalar::zero();
        for (const auto& [j, v] : e.echelon[r]) {
            if (j == pc) continue;
            if (j == a.cols)
                s -= v * denom;
            else if (!x[j].is_strictly_zero())
                s += v * x[j];
        }
        if (s.is_strictly_zero()) continue;
        for (auto& xi : x)
            if (!xi.is_strictly_zero()) xi = e.pivots[r] * xi;
        denom = e.pivots[r] * denom;
        x[pc] = -s;
    }
    return ScaledSolution{std::move(x), std::move(denom)};
}

inline bool inImage(const SparseMatrix& columnsAsMatrix, const std::vector<NovikovScalar>& v) {
    return solveScaled(columnsAsMatrix, v).has_value();
}

}  // namespace nchodge
