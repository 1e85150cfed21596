#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modloc {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;
using cmat = Eigen::MatrixXcd;
using rmat = Eigen::MatrixXd;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ComplexVectorSpace {
    int dim = 1;
    explicit ComplexVectorSpace(int d);
};

// a+ib  <->  (a..., b...)
rvec realify(const cvec& x);
rmat realify(const cmat& cols);
cvec complexify(const rvec& x);
cmat complexify_cols(const rmat& cols);

// multiplication by i on realified columns, without forming Jc
rmat times_i(const rmat& x);
rmat complex_structure(int d);

cplx inner(const cvec& x, const cvec& y);

enum class MapClass { Linear, Antilinear };

struct RealLinearMap {
    int dim = 0;
    rmat matrix;  // 2d x 2d on the realification
    MapClass cls = MapClass::Linear;

    cvec apply(const cvec& x) const;
    // deviation of the claimed class, ||M Jc -+ Jc M||
    double class_defect() const;
    // x -> A x  (linear)   or   x -> A conj(x)  (antilinear)
    cmat complex_form() const;
    RealLinearMap compose(const RealLinearMap& other) const;
};

RealLinearMap linear_map(const cmat& a);
RealLinearMap antilinear_map(const cmat& a);
RealLinearMap conjugation(int d);
RealLinearMap identity_map(int d);

RealLinearMap antilinear_adjoint(const RealLinearMap& s);

// orthonormal real basis of a real subspace of C^d, stored realified
struct RealSubspace {
    int dim = 0;    // complex dimension of the ambient space
    rmat basis;     // 2d x k, orthonormal columns

    RealSubspace() = default;
    RealSubspace(int d, rmat b);
    int real_dim() const { return static_cast<int>(basis.cols()); }
    cvec vector(int i) const { return complexify(basis.col(i)); }
    rvec project(const rvec& x) const;
    double gram_defect() const;
};

// modified Gram-Schmidt with one re-orthogonalization pass; columns whose
// residual falls below drop_tol (relative to their own norm) are discarded
rmat orthonormalize(const rmat& cols, double drop_tol = 1e-10);

RealSubspace span_of(int d, const std::vector<cvec>& vectors, double drop_tol = 1e-10);
RealSubspace real_span(int d, const rmat& realified_cols, double drop_tol = 1e-10);
RealSubspace zero_subspace(int d);
RealSubspace full_subspace(int d);
RealSubspace real_coordinates(int d);

RealSubspace symplectic_complement(const RealSubspace& k);
RealSubspace times_i(const RealSubspace& k);

// ||(1 - P_K2) B_K1||, the largest distance of a unit vector of K1 to K2
double inclusion_defect(const RealSubspace& k1, const RealSubspace& k2);
// operator norm of P_K1 - P_K2
double projection_distance(const RealSubspace& k1, const RealSubspace& k2);
bool includes(const RealSubspace& big, const RealSubspace& small, double tol = 1e-9);
bool equal(const RealSubspace& a, const RealSubspace& b, double tol = 1e-9);

RealSubspace sum(const RealSubspace& a, const RealSubspace& b);
// principal vectors of a whose distance to b is below tol
RealSubspace intersection(const RealSubspace& a, const RealSubspace& b, double tol = 1e-9);

// principal angles, ascending, via singular values of B1^T B2
rvec principal_angles(const RealSubspace& a, const RealSubspace& b);

RealSubspace apply(const RealLinearMap& m, const RealSubspace& k, double drop_tol = 1e-10);

int numerical_rank(const rmat& m, double rel_tol = 1e-10);

}  // namespace modloc
