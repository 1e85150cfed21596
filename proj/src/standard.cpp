#include "modloc/standard.hpp"

#include <algorithm>
#include <cmath>

namespace modloc {

StandardnessCertificate is_standard(const RealSubspace& k) {
    StandardnessCertificate c;
    c.ambient = 2 * k.dim;
    const auto r = k.real_dim();
    if (r == 0) return c;
    rmat both(2 * k.dim, 2 * r);
    both << k.basis, times_i(k.basis);
    c.dim_sum = numerical_rank(both);
    // dim(K ∩ iK) = dim K + dim iK - dim(K + iK)
    c.dim_intersection = static_cast<int>(2 * r) - c.dim_sum;
    c.standard = c.dim_intersection == 0 && c.dim_sum == c.ambient;
    return c;
}

RealLinearMap tomita_operator(const RealSubspace& k) {
    const auto cert = is_standard(k);
    if (!cert.standard)
        throw StandardnessError("tomita_operator: subspace is not standard", cert);
    const int n = 2 * k.dim;
    rmat from(n, n), to(n, n);
    const rmat ik = times_i(k.basis);
    from << k.basis, ik;
    to << k.basis, -ik;
    // S * from = to
    const rmat st = from.transpose().partialPivLu().solve(to.transpose());
    RealLinearMap s;
    s.dim = k.dim;
    s.cls = MapClass::Antilinear;
    s.matrix = st.transpose();
    return s;
}

static RealLinearMap spectral(const cmat& v, const Eigen::VectorXcd& f) {
    return linear_map(v * f.asDiagonal() * v.adjoint());
}

RealLinearMap ModularData::delta_power(double alpha) const {
    Eigen::VectorXcd f(eigenvalues.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = std::pow(eigenvalues(i), alpha);
    return spectral(eigenvectors, f);
}

ModularData modular_data(const RealLinearMap& s) {
    if (s.cls != MapClass::Antilinear) throw UsageError("modular_data: s must be antilinear");
    ModularData md;
    md.s = s;
    const RealLinearMap sa = antilinear_adjoint(s);
    md.delta = sa.compose(s);
    cmat d = md.delta.complex_form();
    d = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(d);
    if (es.info() != Eigen::Success) throw NumericError("modular_data: eigendecomposition failed");
    md.eigenvalues = es.eigenvalues();
    const double top = md.eigenvalues(md.eigenvalues.size() - 1);
    if (!(top > 0.0) || md.eigenvalues(0) < 1e-20 * top)
        throw NumericError("modular_data: singular Tomita operator");
    for (Eigen::Index i = 0; i < md.eigenvalues.size(); ++i)
        md.eigenvalues(i) = std::max(md.eigenvalues(i), 1e-14);
    md.eigenvectors = es.eigenvectors();
    md.condition = md.eigenvalues.maxCoeff() / md.eigenvalues.minCoeff();
    md.j = s.compose(md.delta_power(-0.5));

    for (Eigen::Index i = 0; i < md.eigenvalues.size(); ++i) {
        const double lv = std::log(md.eigenvalues(i));
        if (!md.log_delta_spectrum.empty() &&
            std::abs(md.log_delta_spectrum.back().value - lv) < 1e-9 * std::max(1.0, std::abs(lv)))
            ++md.log_delta_spectrum.back().multiplicity;
        else
            md.log_delta_spectrum.push_back({lv, 1});
    }
    return md;
}

RealLinearMap modular_flow(const ModularData& md, double t) {
    Eigen::VectorXcd f(md.eigenvalues.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        f(i) = std::exp(cplx(0.0, t * std::log(md.eigenvalues(i))));
    return spectral(md.eigenvectors, f);
}

static cvec fix_phase(cvec v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(best)) * (1 + 1e-12)) best = i;
    if (std::abs(v(best)) > 0) v *= std::conj(v(best)) / std::abs(v(best));
    return v;
}

Fiberization fiberize(const RealSubspace& k) {
    const RealLinearMap s = tomita_operator(k);
    const ModularData md = modular_data(s);
    const int d = k.dim;
    Fiberization out;

    // eigenvalues come in pairs (lambda, 1/lambda); pair the i-th smallest with the
    // i-th largest so that an odd dimension leaves its middle value to the fixed part
    rmat fixed_cols(2 * d, 0);
    const Eigen::Index n = md.eigenvalues.size();
    Eigen::Index lo = 0;
    for (; lo < n - 1 - lo; ++lo) {
        const double lam = md.eigenvalues(lo);
        if (lam >= 1.0 - 1e-10) break;
        FiberBlock b;
        b.theta = 2.0 * std::atan(std::sqrt(lam));
        b.e1 = fix_phase(md.eigenvectors.col(lo));
        // j e1 lies in the 1/lambda eigenspace; j carries roundoff of order eps * condition, so
        // project onto the eigenvectors of that eigenspace, which the solver resolves to eps
        const cvec je = md.j.apply(b.e1);
        cvec e2 = cvec::Zero(d);
        for (Eigen::Index q = 0; q < n; ++q)
            if (std::abs(md.eigenvalues(q) * lam - 1.0) < 1e-8)
                e2 += md.eigenvectors.col(q) * md.eigenvectors.col(q).dot(je);
        b.e2 = e2.norm() > 0.5 ? cvec(e2 / e2.norm()) : je;
        const double c = std::cos(b.theta / 2), sn = std::sin(b.theta / 2);
        b.y_plus = c * b.e1 + sn * b.e2;
        b.y_minus = cplx(0, 1) * (c * b.e1 - sn * b.e2);
        out.blocks.push_back(std::move(b));
    }
    for (Eigen::Index i = lo; i < n - lo; ++i) {
        const cvec v = md.eigenvectors.col(i);
        const cvec iv = cplx(0, 1) * v;
        fixed_cols.conservativeResize(Eigen::NoChange, fixed_cols.cols() + 2);
        fixed_cols.col(fixed_cols.cols() - 2) = realify(cvec(v + md.j.apply(v)));
        fixed_cols.col(fixed_cols.cols() - 1) = realify(cvec(iv + md.j.apply(iv)));
    }
    std::stable_sort(out.blocks.begin(), out.blocks.end(),
                     [](const FiberBlock& a, const FiberBlock& b) { return a.theta < b.theta; });
    out.fixed_part = RealSubspace(d, orthonormalize(fixed_cols, 1e-8));
    return out;
}

RealSubspace fiber_subspace(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    cvec yp(2), ym(2);
    yp << c, s;
    ym << cplx(0, c), cplx(0, -s);
    return span_of(2, {yp, ym});
}

std::pair<RealLinearMap, RealLinearMap> reassemble(const Fiberization& f, int d) {
    cmat jm = cmat::Zero(d, d);
    cmat dm = cmat::Zero(d, d);
    for (const auto& b : f.blocks) {
        const double lam = std::pow(std::tan(b.theta / 2), 2);
        jm += b.e1 * b.e2.transpose() + b.e2 * b.e1.transpose();
        dm += lam * b.e1 * b.e1.adjoint() + (1.0 / lam) * b.e2 * b.e2.adjoint();
    }
    for (int i = 0; i < f.fixed_part.real_dim(); ++i) {
        const cvec v = f.fixed_part.vector(i);
        jm += v * v.transpose();
        dm += v * v.adjoint();
    }
    return {antilinear_map(jm), linear_map(dm)};
}

}  // namespace modloc
