#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "modloc/fock.hpp"
#include "modloc/standard.hpp"

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

cvec scaled(cvec v, double r) { return r * v / v.norm(); }

// a^{⊗n} on the full product basis by repeated Kronecker products
cmat kron_power(const cmat& a, int n) {
    cmat out = cmat::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
        cmat next(out.rows() * a.rows(), out.cols() * a.cols());
        for (int i = 0; i < out.rows(); ++i)
            for (int j = 0; j < out.cols(); ++j) next.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = out(i, j) * a;
        out = next;
    }
    return out;
}

// displacement matrix element <m|D(alpha)|n> for one mode
cplx displacement_element(int m, int n, cplx alpha) {
    const double x = std::norm(alpha);
    if (m >= n)
        return std::sqrt(std::tgamma(n + 1.0) / std::tgamma(m + 1.0)) * std::pow(alpha, m - n) * std::exp(-x / 2) *
               std::assoc_laguerre(n, m - n, x);
    return std::sqrt(std::tgamma(m + 1.0) / std::tgamma(n + 1.0)) * std::pow(-std::conj(alpha), n - m) *
           std::exp(-x / 2) * std::assoc_laguerre(m, n - m, x);
}

}  // namespace

TEST(FockSpace, Dimension) {
    for (int d = 1; d <= 4; ++d)
        for (int n = 0; n <= 8; ++n) EXPECT_EQ(make_fock_space(d, n)->dim(), fock_dimension(d, n));
    EXPECT_EQ(fock_dimension(3, 10), 286);
}

TEST(Sym, AlreadySymmetric) {
    std::mt19937_64 rng(1);
    const cvec x = random_vector(rng, 3);
    const Tensor t = Tensor::elementary({x, x});
    EXPECT_LT((sym_project({x, x}, 4).data - t.data).norm(), 1e-14);
}

TEST(Sym, TwoBasisVectors) {
    const Tensor s = sym_project({unit(2, 0), unit(2, 1)}, 2);
    cvec expect(4);
    expect << 0, 0.5, 0.5, 0;
    EXPECT_LT((s.data - expect).norm(), 1e-15);
}

TEST(Sym, ContractionAndIdempotence) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        Tensor x(3, 3);
        x.data = random_vector(rng, 27);
        const Tensor s = sym_project(x);
        EXPECT_LE(s.norm(), x.norm() + 1e-12);
        EXPECT_LT(s.asymmetry(), 1e-14);
        EXPECT_LT((sym_project(s).data - s.data).norm(), 1e-13);
    }
}

TEST(Sym, TruncationError) {
    EXPECT_THROW(sym_project({unit(2, 0), unit(2, 0), unit(2, 0)}, 2), TruncationError);
}

TEST(SymPowerExpand, SingleFactor) {
    std::mt19937_64 rng(3);
    const cvec x = random_vector(rng, 3);
    EXPECT_LT((sym_power_expand({x}, 3).data - x).norm(), 1e-15);
}

TEST(SymPowerExpand, DegreeTwoByHand) {
    std::mt19937_64 rng(4);
    const cvec x1 = random_vector(rng, 2), x2 = random_vector(rng, 2);
    const cvec hand = 0.5 * (Tensor::power(cvec(x1 + x2), 2).data - Tensor::power(x1, 2).data -
                             Tensor::power(x2, 2).data);
    EXPECT_LT((sym_power_expand({x1, x2}, 2).data - hand).norm(), 1e-14);
    EXPECT_LT((sym_project({x1, x2}, 2).data - hand).norm(), 1e-14);
}

TEST(SymPowerExpand, BruteForceEquivalence) {
    std::mt19937_64 rng(5);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const int n = 1 + t % 5, d = 1 + (t / 5) % 4;
        std::vector<cvec> xs;
        for (int i = 0; i < n; ++i) xs.push_back(random_vector(rng, d));
        const double scale = Tensor::elementary(xs).norm();
        worst = std::max(worst, (sym_power_expand(xs, 5).data - sym_project(xs, 5).data).norm() / scale);
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Occupation, RoundTripAndNorm) {
    std::mt19937_64 rng(6);
    const FockSpacePtr space = make_fock_space(3, 4);
    for (int n = 0; n <= 4; ++n) {
        Tensor x(3, n);
        x.data = random_vector(rng, static_cast<int>(x.data.size()));
        const Tensor s = sym_project(x);
        const cvec occ = to_occupation(s, *space);
        EXPECT_NEAR(occ.norm(), s.norm(), 1e-12);
        EXPECT_LT((from_occupation(occ, n, *space).data - s.data).norm(), 1e-12);
    }
}

TEST(Coherent, VacuumAndNorm) {
    const FockSpacePtr space = make_fock_space(2, 12);
    const FockVector om = coherent(cvec::Zero(2), space);
    EXPECT_EQ(om.coeffs(0), cplx(1.0));
    EXPECT_EQ(om.coeffs.tail(space->dim() - 1).norm(), 0.0);
    std::mt19937_64 rng(7);
    const cvec h = scaled(random_vector(rng, 2), 1.0);
    EXPECT_NEAR(inner(coherent(h, space), coherent(h, space)).real(), std::numbers::e, 1e-9);
}

TEST(Coherent, LevelsAreNormalizedTensorPowers) {
    std::mt19937_64 rng(8);
    const FockSpacePtr space = make_fock_space(3, 5);
    const cvec h = random_vector(rng, 3);
    const FockVector e = coherent(h, space);
    for (int n = 0; n <= 5; ++n) {
        const cvec expect = to_occupation(Tensor::power(h, n), *space) / std::sqrt(std::tgamma(n + 1.0));
        EXPECT_LT((e.level(n) - expect).norm(), 1e-12 * (1 + expect.norm()));
    }
}

TEST(Coherent, TaylorPartialSums) {
    std::mt19937_64 rng(9);
    for (int d = 1; d <= 3; ++d) {
        const FockSpacePtr space = make_fock_space(d, 10);
        for (int t = 0; t < 10; ++t) {
            const cvec h = random_vector(rng, d), k = random_vector(rng, d);
            const cplx z = inner(h, k);
            cplx partial = 0, term = 1;
            for (int n = 0; n <= 10; ++n) {
                partial += term;
                term *= z / double(n + 1);
            }
            const cplx got = inner(coherent(h, space), coherent(k, space));
            EXPECT_LT(std::abs(got - partial), 1e-12 * std::max(1.0, std::abs(partial)));
        }
    }
}

TEST(Coherent, FirstDerivative) {
    std::mt19937_64 rng(10);
    const FockSpacePtr space = make_fock_space(2, 6);
    const cvec h = random_vector(rng, 2);
    const double t = 1e-4;
    const cvec diff = (coherent(cvec(t * h), space).coeffs - vacuum(space).coeffs) / t;
    const cvec lvl1 = diff.segment(space->level_offset(1), space->level_size(1));
    EXPECT_LT((lvl1 - to_occupation(Tensor::power(h, 1), *space)).norm(), 10 * t * h.squaredNorm());
}

TEST(Coherent, NthDerivativeByCentralDifferences) {
    // the level-n block of e^{th} is t^n h^{⊗n}/sqrt(n!), so the n-th derivative at 0 is sqrt(n!) h^{⊗n}
    std::mt19937_64 rng(11);
    const FockSpacePtr space = make_fock_space(2, 8);
    const cvec h = scaled(random_vector(rng, 2), 1.0);
    for (int n = 1; n <= 4; ++n) {
        const cvec exact = std::sqrt(std::tgamma(n + 1.0)) * to_occupation(Tensor::power(h, n), *space);
        // the level-n block is a homogeneous degree-n polynomial in t, so the difference quotient is exact
        for (double step : {0.2, 0.1, 0.05}) {
            // n-th central difference: sum_k (-1)^k C(n,k) f(t + (n/2 - k) step) / step^n
            cvec acc = cvec::Zero(space->level_size(n));
            for (int k = 0; k <= n; ++k) {
                const double binom = std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0));
                const double tk = (n / 2.0 - k) * step;
                acc += ((k % 2) ? -1.0 : 1.0) * binom * coherent(cvec(tk * h), space).level(n);
            }
            acc /= std::pow(step, n);
            EXPECT_LT((acc - exact).norm(), 1e-15 * std::pow(2.0 / step, n) * (1 + exact.norm()));
        }
    }
}

TEST(Gamma, Identity) {
    const FockSpacePtr space = make_fock_space(3, 5);
    const FockOperator g = gamma(cmat(cmat::Identity(3, 3)), space);
    EXPECT_LT((g.matrix - cmat::Identity(space->dim(), space->dim())).norm(), 1e-14);
}

TEST(Gamma, CoherentVectors) {
    std::mt19937_64 rng(12);
    for (int d = 1; d <= 3; ++d) {
        const FockSpacePtr space = make_fock_space(d, 10);
        const cmat a = random_matrix(rng, d) / std::sqrt(2.0 * d);
        const cvec h = random_vector(rng, d);
        const FockVector lhs = gamma(a, space).apply(coherent(h, space));
        const FockVector rhs = coherent(cvec(a * h), space);
        for (int n = 0; n <= 10; ++n)
            EXPECT_LT((lhs.level(n) - rhs.level(n)).norm(), 1e-10 * std::max(1.0, rhs.level_norm(n)));
    }
}

TEST(Gamma, MatchesKroneckerOracle) {
    std::mt19937_64 rng(13);
    const FockSpacePtr space = make_fock_space(3, 4);
    const cmat a = random_matrix(rng, 3);
    const FockOperator g = gamma(a, space);
    for (int n = 0; n <= 4; ++n) {
        Tensor x(3, n);
        x.data = random_vector(rng, static_cast<int>(x.data.size()));
        const Tensor s = sym_project(x);
        Tensor as(3, n);
        as.data = kron_power(a, n) * s.data;
        const cvec occ_in = to_occupation(s, *space);
        const cmat block = g.matrix.block(space->level_offset(n), space->level_offset(n), space->level_size(n),
                                          space->level_size(n));
        EXPECT_LT((block * occ_in - to_occupation(as, *space)).norm(), 1e-10 * as.norm());
    }
}

TEST(Gamma, Multiplicative) {
    std::mt19937_64 rng(14);
    const FockSpacePtr space = make_fock_space(2, 6);
    const cmat a = random_matrix(rng, 2), b = random_matrix(rng, 2);
    const cmat lhs = gamma(a, space).matrix * gamma(b, space).matrix;
    const cmat rhs = gamma(cmat(a * b), space).matrix;
    EXPECT_LT((lhs - rhs).norm() / rhs.norm(), 1e-12);
}

TEST(Gamma, SelfadjointAndUnitary) {
    std::mt19937_64 rng(15);
    const FockSpacePtr space = make_fock_space(3, 5);
    const cmat r = random_matrix(rng, 3);
    const cmat a = 0.5 * (r + r.adjoint());
    const cmat g = gamma(a, space).matrix;
    EXPECT_LT((g - g.adjoint()).norm(), 1e-12 * g.norm());
    Eigen::HouseholderQR<cmat> qr(random_matrix(rng, 3));
    const cmat u = qr.householderQ();
    const cmat gu = gamma(u, space).matrix;
    EXPECT_LT((gu.adjoint() * gu - cmat::Identity(space->dim(), space->dim())).norm(), 1e-12);
}

TEST(Gamma, Antiunitary) {
    const FockSpacePtr space = make_fock_space(2, 6);
    const FockOperator c = gamma(conjugation(2), space);
    std::mt19937_64 rng(16);
    const cvec h = random_vector(rng, 2);
    EXPECT_LT((c.apply(coherent(h, space)).coeffs - coherent(cvec(h.conjugate()), space).coeffs).norm(), 1e-12);
    const FockVector x{space, random_vector(rng, space->dim())}, y{space, random_vector(rng, space->dim())};
    EXPECT_NEAR(std::abs(inner(c.apply(x), c.apply(y)) - std::conj(inner(x, y))), 0.0, 1e-12);
}

TEST(Creation, OverflowDiagnostic) {
    const FockSpacePtr space = make_fock_space(1, 3);
    FockVector top{space, cvec::Zero(space->dim())};
    top.coeffs(3) = 1.0;  // |3>
    cvec g(1);
    g << 1.0;
    EXPECT_NEAR(creation_overflow(g, top), 2.0, 1e-14);  // sqrt(4)
    EXPECT_EQ(creation(g, space).apply(top).coeffs.norm(), 0.0);
    EXPECT_EQ(creation_overflow(g, vacuum(space)), 0.0);
}

TEST(WeylCoherent, VacuumCoefficient) {
    const FockSpacePtr space = make_fock_space(2, 8);
    const cvec h = scaled(cvec::Ones(2), 1.0);
    const FockVector w = weyl_on_coherent(h, cvec::Zero(2), space);
    EXPECT_NEAR(std::abs(w.coeffs(0) - std::exp(-0.25)), 0.0, 1e-15);
}

TEST(WeylCoherent, ZeroIsIdentity) {
    std::mt19937_64 rng(17);
    const FockSpacePtr space = make_fock_space(2, 8);
    const cvec k = random_vector(rng, 2);
    const FockVector w = weyl_on_coherent(cvec::Zero(2), k, space);
    const FockVector e = coherent(cvec(cplx(0, 1 / std::sqrt(2.0)) * k), space);
    EXPECT_LT((w.coeffs - e.coeffs).norm(), 1e-14 * e.coeffs.norm());
}

TEST(WeylCoherent, InverseDisplacementAgainstMatrixOracle) {
    const FockSpacePtr space = make_fock_space(1, 14);
    cvec h(1);
    h << cplx(0.6, 0.8);
    const FockVector closed = weyl_on_coherent(h, cvec(-h), space);
    FockVector expect = vacuum(space);
    expect.coeffs *= std::exp(0.25 * h.squaredNorm());
    EXPECT_LT((closed.coeffs - expect.coeffs).norm(), 1e-14);
    const FockVector matrix = weyl_matrix(h, space).op.apply(coherent(cvec(cplx(0, -1 / std::sqrt(2.0)) * h), space));
    EXPECT_LT((matrix.coeffs - expect.coeffs).norm(), 1e-8);
}

TEST(WeylMatrix, ZeroIsIdentity) {
    const FockSpacePtr space = make_fock_space(2, 6);
    const WeylMatrix w = weyl_matrix(cvec::Zero(2), space);
    EXPECT_LT((w.op.matrix - cmat::Identity(space->dim(), space->dim())).norm(), 1e-14);
}

TEST(WeylMatrix, DisplacementLaguerreOracle) {
    // one mode: W(h) = D(alpha) with alpha = i h / sqrt(2)
    const FockSpacePtr space = make_fock_space(1, 16);
    cvec h(1);
    h << cplx(0.3, -0.7);
    const cplx alpha = cplx(0, 1 / std::sqrt(2.0)) * h(0);
    const WeylMatrix w = weyl_matrix(h, space);
    double worst = 0;
    for (int m = 0; m <= 8; ++m)
        for (int n = 0; n <= 8; ++n) worst = std::max(worst, std::abs(w.op.matrix(m, n) - displacement_element(m, n, alpha)));
    EXPECT_LT(worst, 1e-12);
}

TEST(WeylMatrix, UnitarityDefectShrinks) {
    cvec h(1);
    h << 1.0;
    double prev = 1e300;
    for (int n : {8, 12, 16}) {
        const FockSpacePtr space = make_fock_space(1, n);
        const WeylMatrix wm = weyl_matrix(h, space);
        const cmat& w = wm.op.matrix;
        const int low = space->level_offset(9);
        const cmat defect = (w * w.adjoint() - cmat::Identity(space->dim(), space->dim())).topLeftCorner(low, low);
        const double value = Eigen::JacobiSVD<cmat>(defect).singularValues()(0);
        EXPECT_LT(value, prev);
        prev = value;
        // what is lost on levels <= 8 is the squared escape out of the truncation
        if (n == 16) EXPECT_LT(value, 1.1 * wm.truncation_bound * wm.truncation_bound + 1e-14);
    }
}

TEST(WeylMatrix, CcrPhase) {
    const FockSpacePtr space = make_fock_space(1, 16);
    cvec h(1), k(1);
    h << 1.0;
    k << cplx(0, 1);
    ASSERT_NEAR(inner(h, k).imag(), 1.0, 1e-15);
    const FockVector om = vacuum(space);
    const cvec lhs = weyl_matrix(h, space).op.apply(weyl_matrix(k, space).op.apply(om)).coeffs;
    const cvec rhs = std::exp(cplx(0, -0.5)) * weyl_matrix(cvec(h + k), space).op.apply(om).coeffs;
    const int low = space->level_offset(9);
    EXPECT_LT((lhs - rhs).head(low).norm(), 1e-6);
    // the phase itself, read off the vacuum component
    const cplx ratio = lhs(0) / weyl_matrix(cvec(h + k), space).op.apply(om).coeffs(0);
    EXPECT_LT(std::abs(ratio - std::exp(cplx(0, -0.5))), 1e-6);
}

TEST(WeylMatrix, AgreesWithClosedFormMonotonically) {
    cvec h(1), k(1);
    h << cplx(0.4, 0.5);
    k << cplx(-0.3, 0.6);
    double prev = 1e300;
    for (int n : {8, 12, 16}) {
        const FockSpacePtr space = make_fock_space(1, n);
        const WeylMatrix w = weyl_matrix(h, space);
        const FockVector mat = w.op.apply(coherent(cvec(cplx(0, 1 / std::sqrt(2.0)) * k), space));
        const FockVector closed = weyl_on_coherent(h, k, space);
        const double defect = (mat.coeffs - closed.coeffs).norm();
        EXPECT_LT(defect, prev);
        prev = defect;
        EXPECT_GT(w.truncation_bound, 0.0);
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(SecondQuantized, RealLine) {
    const FockSpacePtr space = make_fock_space(1, 10);
    const FockOperator gs = gamma(tomita_operator(real_coordinates(1)), space);
    cvec k(1);
    k << 1.0;
    const FockVector lhs = gs.apply(coherent(cvec(cplx(0, 1) * k), space));
    const FockVector rhs = coherent(cvec(cplx(0, -1) * k), space);
    EXPECT_LT((lhs.coeffs - rhs.coeffs).norm(), 1e-15);
}

TEST(SecondQuantized, FiberModel) {
    const auto rep = second_quantized_modular_check(fiber_subspace(std::numbers::pi / 3), 10, 6, 99);
    EXPECT_LT(rep.tomita_coherent, 1e-7);
    EXPECT_LT(rep.conjugation_weyl, 1e-7);
    EXPECT_LT(rep.flow_weyl, 1e-7);
    EXPECT_LT(rep.commutation_phase, 1e-7);
    EXPECT_LT(rep.commutation_matrix, 1e-7);
}

TEST(SecondQuantized, SymplecticPairingVanishes) {
    std::mt19937_64 rng(18);
    const RealSubspace k = random_subspace(rng, 3, 3);
    const RealSubspace kp = symplectic_complement(k);
    std::normal_distribution<double> nd;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        rvec a(3), b(3);
        for (int i = 0; i < 3; ++i) a(i) = nd(rng), b(i) = nd(rng);
        worst = std::max(worst, std::abs(inner(complexify(k.basis * a), complexify(kp.basis * b)).imag()));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(SecondQuantized, NonStandardRejected) {
    cvec e1 = unit(2, 0);
    const RealSubspace k = span_of(2, {e1, cvec(cplx(0, 1) * e1)});
    EXPECT_THROW(second_quantized_modular_check(k, 4, 1, 1), DomainError);
}

TEST(SecondQuantized, VacuumInvariance) {
    std::mt19937_64 rng(19);
    Eigen::HouseholderQR<cmat> qr(random_matrix(rng, 3));
    const FockSpacePtr space = make_fock_space(3, 4);
    const FockVector out = gamma(cmat(qr.householderQ()), space).apply(vacuum(space));
    EXPECT_EQ((out.coeffs - vacuum(space).coeffs).norm(), 0.0);
}
