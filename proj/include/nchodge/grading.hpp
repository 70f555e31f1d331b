#pragma once

#include <cstdlib>
#include <vector>

namespace nchodge {

enum class GradingKind { IntegerGraded, Mod2Graded };

// Degree arithmetic happens in Z or Z/2. Degrees are stored as ints in
// either case; Mod2 only ever consults the parity.
struct Grading {
    GradingKind kind = GradingKind::IntegerGraded;

    int normalize(int d) const {
        return kind == GradingKind::Mod2Graded ? ((d % 2) + 2) % 2 : d;
    }
    bool degrees_equal(int a, int b) const {
        return kind == GradingKind::Mod2Graded ? (a - b) % 2 == 0 : a == b;
    }
    static bool is_odd(int d) { return (d % 2 + 2) % 2 == 1; }
};

// Sign of reordering homogeneous symbols: each transposition of adjacent
// symbols of odd x odd parity contributes -1.
//
// permutation[i] = index into `degrees` of the symbol occupying slot i
// after the reorder.
inline int koszul_sign(const std::vector<int>& degrees, const std::vector<int>& permutation) {
    // Count inversions among odd-degree symbols.
    int sign = 1;
    const std::size_t n = permutation.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!Grading::is_odd(degrees[permutation[i]])) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (permutation[j] < permutation[i] && Grading::is_odd(degrees[permutation[j]]))
                sign = -sign;
        }
    }
    return sign;
}

// Sign of the cyclic rotation taking (x_0,...,x_s) to
// (x_cut,...,x_s,x_0,...,x_{cut-1}), parities given as degrees.
inline int rotation_sign(const std::vector<int>& degrees, std::size_t cut) {
    int front_odd = 0, back_odd = 0;
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (!Grading::is_odd(degrees[i])) continue;
        (i < cut ? front_odd : back_odd)++;
    }
    return (front_odd * back_odd) % 2 == 0 ? 1 : -1;
}

}  // namespace nchodge
