#include "modloc/hilbert.hpp"

#include <algorithm>
#include <cmath>

namespace modloc {

ComplexVectorSpace::ComplexVectorSpace(int d) : dim(d) {
    if (d < 1) throw UsageError("complex dimension must be at least 1");
}

rvec realify(const cvec& x) {
    const auto d = x.size();
    rvec r(2 * d);
    r.head(d) = x.real();
    r.tail(d) = x.imag();
    return r;
}

rmat realify(const cmat& cols) {
    const auto d = cols.rows();
    rmat r(2 * d, cols.cols());
    r.topRows(d) = cols.real();
    r.bottomRows(d) = cols.imag();
    return r;
}

cvec complexify(const rvec& x) {
    const auto d = x.size() / 2;
    cvec c(d);
    for (Eigen::Index i = 0; i < d; ++i) c(i) = cplx(x(i), x(d + i));
    return c;
}

cmat complexify_cols(const rmat& cols) {
    const auto d = cols.rows() / 2;
    cmat c(d, cols.cols());
    c.real() = cols.topRows(d);
    c.imag() = cols.bottomRows(d);
    return c;
}

rmat times_i(const rmat& x) {
    const auto d = x.rows() / 2;
    rmat y(x.rows(), x.cols());
    y.topRows(d) = -x.bottomRows(d);
    y.bottomRows(d) = x.topRows(d);
    return y;
}

rmat complex_structure(int d) {
    rmat j = rmat::Zero(2 * d, 2 * d);
    j.topRightCorner(d, d) = -rmat::Identity(d, d);
    j.bottomLeftCorner(d, d) = rmat::Identity(d, d);
    return j;
}

cplx inner(const cvec& x, const cvec& y) {
    if (x.size() != y.size()) throw UsageError("inner: dimension mismatch");
    return x.dot(y);  // Eigen conjugates the first argument
}

cvec RealLinearMap::apply(const cvec& x) const {
    if (x.size() != dim) throw UsageError("map applied to vector of wrong dimension");
    return complexify(matrix * realify(x));
}

double RealLinearMap::class_defect() const {
    const rmat j = complex_structure(dim);
    if (cls == MapClass::Linear) return (matrix * j - j * matrix).norm();
    return (matrix * j + j * matrix).norm();
}

cmat RealLinearMap::complex_form() const {
    cmat a(dim, dim);
    a.real() = matrix.topLeftCorner(dim, dim);
    a.imag() = matrix.bottomLeftCorner(dim, dim);
    return a;
}

RealLinearMap RealLinearMap::compose(const RealLinearMap& other) const {
    if (other.dim != dim) throw UsageError("compose: dimension mismatch");
    RealLinearMap r;
    r.dim = dim;
    r.matrix = matrix * other.matrix;
    r.cls = (cls == other.cls) ? MapClass::Linear : MapClass::Antilinear;
    return r;
}

RealLinearMap linear_map(const cmat& a) {
    const int d = static_cast<int>(a.rows());
    if (a.cols() != d) throw UsageError("linear_map: matrix must be square");
    RealLinearMap m;
    m.dim = d;
    m.cls = MapClass::Linear;
    m.matrix.resize(2 * d, 2 * d);
    m.matrix << a.real(), -a.imag(), a.imag(), a.real();
    return m;
}

RealLinearMap antilinear_map(const cmat& a) {
    const int d = static_cast<int>(a.rows());
    if (a.cols() != d) throw UsageError("antilinear_map: matrix must be square");
    RealLinearMap m;
    m.dim = d;
    m.cls = MapClass::Antilinear;
    m.matrix.resize(2 * d, 2 * d);
    m.matrix << a.real(), a.imag(), a.imag(), -a.real();
    return m;
}

RealLinearMap conjugation(int d) { return antilinear_map(cmat::Identity(d, d)); }
RealLinearMap identity_map(int d) { return linear_map(cmat::Identity(d, d)); }

RealLinearMap antilinear_adjoint(const RealLinearMap& s) {
    if (s.cls != MapClass::Antilinear) throw UsageError("antilinear_adjoint: map is not antilinear");
    // <sx,y> = <s*y,x> reduces to the real transpose on the realification
    RealLinearMap r = s;
    r.matrix = s.matrix.transpose();
    return r;
}

RealSubspace::RealSubspace(int d, rmat b) : dim(d), basis(std::move(b)) {
    if (basis.rows() != 2 * d) throw UsageError("subspace basis has wrong ambient dimension");
    if (basis.cols() > 2 * d) throw UsageError("subspace basis larger than ambient space");
}

rvec RealSubspace::project(const rvec& x) const { return basis * (basis.transpose() * x); }

double RealSubspace::gram_defect() const {
    if (basis.cols() == 0) return 0.0;
    return (basis.transpose() * basis - rmat::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
}

rmat orthonormalize(const rmat& cols, double drop_tol) {
    rmat q(cols.rows(), cols.cols());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
        rvec v = cols.col(c);
        const double n0 = v.norm();
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < k; ++j) v -= q.col(j).dot(v) * q.col(j);
        const double n1 = v.norm();
        if (n1 < drop_tol * n0) continue;
        q.col(k++) = v / n1;
    }
    return q.leftCols(k);
}

RealSubspace span_of(int d, const std::vector<cvec>& vectors, double drop_tol) {
    rmat cols(2 * d, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != d) throw UsageError("span_of: vector of wrong dimension");
        cols.col(static_cast<Eigen::Index>(i)) = realify(vectors[i]);
    }
    return RealSubspace(d, orthonormalize(cols, drop_tol));
}

RealSubspace real_span(int d, const rmat& realified_cols, double drop_tol) {
    return RealSubspace(d, orthonormalize(realified_cols, drop_tol));
}

RealSubspace zero_subspace(int d) { return RealSubspace(d, rmat(2 * d, 0)); }
RealSubspace full_subspace(int d) { return RealSubspace(d, rmat::Identity(2 * d, 2 * d)); }

RealSubspace real_coordinates(int d) {
    rmat b = rmat::Zero(2 * d, d);
    b.topRows(d) = rmat::Identity(d, d);
    return RealSubspace(d, b);
}

RealSubspace times_i(const RealSubspace& k) { return RealSubspace(k.dim, times_i(k.basis)); }

RealSubspace symplectic_complement(const RealSubspace& k) {
    // Im<x,y> = Re<ix,y>, so K' = i (K^perp)
    const int n = 2 * k.dim;
    const auto r = k.real_dim();
    if (r == 0) return full_subspace(k.dim);
    Eigen::HouseholderQR<rmat> qr(k.basis);
    const rmat q = qr.householderQ() * rmat::Identity(n, n);
    return RealSubspace(k.dim, times_i(rmat(q.rightCols(n - r))));
}

static void same_space(const RealSubspace& a, const RealSubspace& b) {
    if (a.dim != b.dim) throw UsageError("subspaces live in different spaces");
}

static double op_norm(const rmat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<rmat> svd(m);
    return svd.singularValues()(0);
}

double inclusion_defect(const RealSubspace& k1, const RealSubspace& k2) {
    same_space(k1, k2);
    if (k1.real_dim() == 0) return 0.0;
    if (k2.real_dim() == 0) return 1.0;
    const rmat r = k1.basis - k2.basis * (k2.basis.transpose() * k1.basis);
    return op_norm(r);
}

double projection_distance(const RealSubspace& k1, const RealSubspace& k2) {
    same_space(k1, k2);
    if (k1.real_dim() != k2.real_dim()) return 1.0;
    return std::max(inclusion_defect(k1, k2), inclusion_defect(k2, k1));
}

bool includes(const RealSubspace& big, const RealSubspace& small, double tol) {
    return inclusion_defect(small, big) < tol;
}

bool equal(const RealSubspace& a, const RealSubspace& b, double tol) {
    return projection_distance(a, b) < tol;
}

RealSubspace sum(const RealSubspace& a, const RealSubspace& b) {
    same_space(a, b);
    rmat cols(2 * a.dim, a.real_dim() + b.real_dim());
    cols << a.basis, b.basis;
    return RealSubspace(a.dim, orthonormalize(cols));
}

RealSubspace intersection(const RealSubspace& a, const RealSubspace& b, double tol) {
    same_space(a, b);
    if (a.real_dim() == 0 || b.real_dim() == 0) return zero_subspace(a.dim);
    const rmat c = a.basis.transpose() * b.basis;
    Eigen::JacobiSVD<rmat> svd(c, Eigen::ComputeFullU);
    const rmat u = a.basis * svd.matrixU();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < u.cols(); ++i) {
        const rvec ui = u.col(i);
        const double dist = (ui - b.basis * (b.basis.transpose() * ui)).norm();
        if (dist < tol) keep.push_back(i);
    }
    rmat out(2 * a.dim, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = u.col(keep[i]);
    return RealSubspace(a.dim, orthonormalize(out));
}

rvec principal_angles(const RealSubspace& a, const RealSubspace& b) {
    same_space(a, b);
    const RealSubspace& s = a.real_dim() <= b.real_dim() ? a : b;
    const RealSubspace& l = a.real_dim() <= b.real_dim() ? b : a;
    const auto k = s.real_dim();
    rvec out(k);
    if (k == 0) return out;
    Eigen::JacobiSVD<rmat> cs(s.basis.transpose() * l.basis);
    const rmat resid = s.basis - l.basis * (l.basis.transpose() * s.basis);
    Eigen::JacobiSVD<rmat> sn(resid);
    const rvec cosv = cs.singularValues();  // descending
    const rvec sinv = sn.singularValues();  // descending
    for (Eigen::Index i = 0; i < k; ++i) {
        const double c = i < cosv.size() ? cosv(i) : 0.0;
        const double sv = sinv(k - 1 - i);
        out(i) = std::atan2(sv, c);
    }
    std::sort(out.data(), out.data() + k);
    return out;
}

RealSubspace apply(const RealLinearMap& m, const RealSubspace& k, double drop_tol) {
    if (m.dim != k.dim) throw UsageError("apply: dimension mismatch");
    return RealSubspace(k.dim, orthonormalize(m.matrix * k.basis, drop_tol));
}

int numerical_rank(const rmat& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<rmat> svd(m);
    const rvec s = svd.singularValues();
    if (s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

}  // namespace modloc
