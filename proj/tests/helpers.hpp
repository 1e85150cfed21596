#pragma once

#include <random>

#include "modloc/hilbert.hpp"

namespace testing_helpers {

inline modloc::cvec random_vector(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n;
    modloc::cvec v(d);
    for (int i = 0; i < d; ++i) v(i) = {n(rng), n(rng)};
    return v;
}

inline modloc::cmat random_matrix(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> n;
    modloc::cmat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = {n(rng), n(rng)};
    return a;
}

// generic real span of k random vectors; standard with probability one when k = d
inline modloc::RealSubspace random_subspace(std::mt19937_64& rng, int d, int k) {
    std::normal_distribution<double> n;
    modloc::rmat b(2 * d, k);
    for (int i = 0; i < 2 * d; ++i)
        for (int j = 0; j < k; ++j) b(i, j) = n(rng);
    return modloc::real_span(d, b);
}

}  // namespace testing_helpers
