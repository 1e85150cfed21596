#include <gtest/gtest.h>

#include "helpers.hpp"
#include "modloc/hilbert.hpp"

using namespace modloc;
using testing_helpers::random_matrix;
using testing_helpers::random_subspace;
using testing_helpers::random_vector;

namespace {

cvec unit(int d, int i) {
    cvec e = cvec::Zero(d);
    e(i) = 1.0;
    return e;
}

// kernel of x -> (Im<x, k_i>)_i, computed from the full SVD of the constraint rows
RealSubspace complement_by_kernel(const RealSubspace& k) {
    const int n = 2 * k.dim;
    if (k.real_dim() == 0) return full_subspace(k.dim);
    rmat rows(k.real_dim(), n);
    for (int i = 0; i < k.real_dim(); ++i) {
        const cvec ki = k.vector(i);
        for (int c = 0; c < n; ++c) {
            rvec e = rvec::Zero(n);
            e(c) = 1.0;
            rows(i, c) = inner(complexify(e), ki).imag();
        }
    }
    Eigen::JacobiSVD<rmat> svd(rows, Eigen::ComputeFullV);
    const int r = numerical_rank(rows);
    return RealSubspace(k.dim, svd.matrixV().rightCols(n - r));
}

}  // namespace

TEST(Inner, UnitVectorAndConvention) {
    EXPECT_EQ(inner(unit(3, 0), unit(3, 0)), cplx(1.0, 0.0));
    EXPECT_EQ(inner(unit(3, 0), cplx(0, 1) * unit(3, 0)), cplx(0.0, 1.0));
}

TEST(Inner, HermitianSymmetry) {
    std::mt19937_64 rng(11);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const cvec x = random_vector(rng, 5), y = random_vector(rng, 5);
        worst = std::max(worst, std::abs(std::conj(inner(x, y)) - inner(y, x)));
        EXPECT_GE(inner(x, x).real(), 0.0);
    }
    EXPECT_LT(worst, 1e-14);
}

TEST(Inner, DimensionMismatchIsUsageError) {
    EXPECT_THROW(inner(cvec::Zero(2), cvec::Zero(3)), UsageError);
}

TEST(Inner, Polarization) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const cvec h = random_vector(rng, 4), k = random_vector(rng, 4);
        EXPECT_NEAR(inner(h, k).imag(), inner(cvec(cplx(0, 1) * h), k).real(), 1e-12);
    }
}

TEST(RealLinearMap, ClassCertificates) {
    std::mt19937_64 rng(5);
    const cmat a = random_matrix(rng, 4);
    EXPECT_LT(linear_map(a).class_defect(), 1e-12);
    EXPECT_LT(antilinear_map(a).class_defect(), 1e-12);
    const RealLinearMap s = antilinear_map(a);
    std::normal_distribution<double> n;
    for (int t = 0; t < 20; ++t) {
        const cplx lam(n(rng), n(rng));
        const cvec x = random_vector(rng, 4);
        EXPECT_LT((s.apply(cvec(lam * x)) - std::conj(lam) * s.apply(x)).norm(), 1e-12);
    }
}

TEST(AntilinearAdjoint, ConjugationIsSelfAdjoint) {
    const RealLinearMap c = conjugation(3);
    EXPECT_LT((antilinear_adjoint(c).matrix - c.matrix).norm(), 1e-15);
}

TEST(AntilinearAdjoint, Involution) {
    std::mt19937_64 rng(7);
    const RealLinearMap s = antilinear_map(random_matrix(rng, 4));
    EXPECT_LT((antilinear_adjoint(antilinear_adjoint(s)).matrix - s.matrix).norm(), 1e-12);
}

TEST(AntilinearAdjoint, DefiningIdentityOverBasisPairs) {
    std::mt19937_64 rng(8);
    const int d = 6;
    const RealLinearMap s = antilinear_map(random_matrix(rng, d));
    const RealLinearMap sa = antilinear_adjoint(s);
    double worst = 0;
    for (int a = 0; a < 2 * d; ++a)
        for (int b = 0; b < 2 * d; ++b) {
            // complex basis e_a and i e_a
            const cvec x = a < d ? unit(d, a) : cvec(cplx(0, 1) * unit(d, a - d));
            const cvec y = b < d ? unit(d, b) : cvec(cplx(0, 1) * unit(d, b - d));
            worst = std::max(worst, std::abs(inner(s.apply(x), y) - inner(sa.apply(y), x)));
        }
    EXPECT_LT(worst, 1e-12);
}

TEST(AntilinearAdjoint, RejectsLinear) {
    EXPECT_THROW(antilinear_adjoint(identity_map(2)), UsageError);
}

TEST(SymplecticComplement, RealCoordinates) {
    const RealSubspace k = real_coordinates(4);
    EXPECT_TRUE(equal(symplectic_complement(k), k));
}

TEST(SymplecticComplement, ZeroGivesEverything) {
    EXPECT_EQ(symplectic_complement(zero_subspace(3)).real_dim(), 6);
}

TEST(SymplecticComplement, PairingAndDimension) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const RealSubspace k = random_subspace(rng, 5, 1 + t % 9);
        const RealSubspace kp = symplectic_complement(k);
        EXPECT_EQ(k.real_dim() + kp.real_dim(), 10);
        for (int i = 0; i < kp.real_dim(); ++i)
            for (int j = 0; j < k.real_dim(); ++j)
                EXPECT_LT(std::abs(inner(kp.vector(i), k.vector(j)).imag()), 1e-12);
    }
}

TEST(SymplecticComplement, DoubleComplementMatchesKernelOracle) {
    std::mt19937_64 rng(17);
    double worst = 0, worst_oracle = 0;
    for (int t = 0; t < 50; ++t) {
        const RealSubspace k = random_subspace(rng, 5, 1 + t % 10);
        worst = std::max(worst, projection_distance(symplectic_complement(symplectic_complement(k)), k));
        const RealSubspace twice = complement_by_kernel(complement_by_kernel(k));
        worst_oracle = std::max(worst_oracle, projection_distance(twice, k));
        worst_oracle = std::max(worst_oracle,
                                projection_distance(symplectic_complement(k), complement_by_kernel(k)));
    }
    EXPECT_LT(worst, 1e-10);
    EXPECT_LT(worst_oracle, 1e-10);
}

TEST(SymplecticComplement, InclusionReversing) {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 20; ++t) {
        const RealSubspace big = random_subspace(rng, 4, 5);
        // a random subspace of big
        const rmat mix = rmat::Random(5, 3);
        const RealSubspace small = real_span(4, big.basis * mix);
        ASSERT_TRUE(includes(big, small));
        EXPECT_TRUE(includes(symplectic_complement(small), symplectic_complement(big)));
    }
}

TEST(SubspaceOps, IntersectionWithItself) {
    std::mt19937_64 rng(23);
    const RealSubspace k = random_subspace(rng, 4, 3);
    EXPECT_TRUE(equal(intersection(k, k), k));
}

TEST(SubspaceOps, DisjointCoordinateLines) {
    const RealSubspace a = span_of(3, {unit(3, 0)});
    const RealSubspace b = span_of(3, {unit(3, 1)});
    EXPECT_EQ(intersection(a, b).real_dim(), 0);
    EXPECT_EQ(sum(a, b).real_dim(), 2);
}

TEST(SubspaceOps, SumWithComplementRank) {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 20; ++t) {
        const RealSubspace k = random_subspace(rng, 4, 4);
        const RealSubspace kp = symplectic_complement(k);
        const int expected = 8 - intersection(k, kp).real_dim();
        rmat both(8, k.real_dim() + kp.real_dim());
        both << k.basis, kp.basis;
        EXPECT_EQ(sum(k, kp).real_dim(), expected);
        EXPECT_EQ(numerical_rank(both), expected);
    }
}

TEST(SubspaceOps, MismatchedSpaces) {
    EXPECT_THROW(sum(zero_subspace(2), zero_subspace(3)), UsageError);
}

TEST(SubspaceOps, GramIdentity) {
    std::mt19937_64 rng(31);
    const RealSubspace k = random_subspace(rng, 6, 7);
    EXPECT_LT(k.gram_defect(), 1e-12);
}

TEST(SubspaceOps, Orthonormalize) {
    rmat cols(4, 3);
    cols << 1, 2, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
    const rmat q = orthonormalize(cols);
    EXPECT_EQ(q.cols(), 2);  // second column is a multiple of the first
}
