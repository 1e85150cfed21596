#pragma once

#include <map>
#include <memory>
#include <vector>

#include "modloc/hilbert.hpp"

namespace modloc {

struct TruncationError : UsageError {
    using UsageError::UsageError;
};

// tensor in the full product basis (C^d)^{⊗n}, index (i1..in) -> sum_k i_k d^{n-1-k}
struct Tensor {
    int d = 0;
    int n = 0;
    cvec data;

    Tensor(int d_, int n_);
    static Tensor elementary(const std::vector<cvec>& factors);
    static Tensor power(const cvec& x, int n);
    double norm() const { return data.norm(); }
    // largest deviation under any transposition of two slots
    double asymmetry() const;
};

Tensor sym_project(const Tensor& t);
Tensor sym_project(const std::vector<cvec>& factors, int cutoff);
Tensor sym_power_expand(const std::vector<cvec>& factors, int cutoff);

using MultiIndex = std::vector<int>;

class FockSpace {
public:
    FockSpace(int d, int cutoff);

    int one_particle_dim() const { return d_; }
    int cutoff() const { return cutoff_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    int level_offset(int n) const { return offsets_[n]; }
    int level_size(int n) const { return offsets_[n + 1] - offsets_[n]; }
    const MultiIndex& state(int i) const { return basis_[i]; }
    int level_of(int i) const;
    int index(const MultiIndex& occ) const;  // -1 when absent
    // index of state i with one more quantum in mode m, -1 above the cutoff
    int raised(int i, int m) const { return raise_[i][m]; }
    int lowered(int i, int m) const { return lower_[i][m]; }

private:
    int d_, cutoff_;
    std::vector<MultiIndex> basis_;
    std::vector<int> offsets_;
    std::map<MultiIndex, int> lookup_;
    std::vector<std::vector<int>> raise_, lower_;
};

using FockSpacePtr = std::shared_ptr<const FockSpace>;
FockSpacePtr make_fock_space(int d, int cutoff);
// number of states sum_{n<=N} C(n+d-1, d-1)
long long fock_dimension(int d, int cutoff);

struct FockVector {
    FockSpacePtr space;
    cvec coeffs;

    cvec level(int n) const;
    double level_norm(int n) const { return level(n).norm(); }
    // restriction to levels <= n (other levels zeroed)
    FockVector truncated(int n) const;
};

FockVector vacuum(const FockSpacePtr& space);
cplx inner(const FockVector& a, const FockVector& b);

// level-n block of a symmetric tensor, as occupation coefficients
cvec to_occupation(const Tensor& symmetric, const FockSpace& space);
Tensor from_occupation(const cvec& level_block, int n, const FockSpace& space);

enum class OperatorKind { LevelPreserving, LevelShifting, General };

struct FockOperator {
    FockSpacePtr space;
    cmat matrix;
    bool antilinear = false;  // x -> matrix * conj(x)
    OperatorKind kind = OperatorKind::General;

    FockVector apply(const FockVector& v) const;
    FockOperator adjoint() const;
    FockOperator compose(const FockOperator& other) const;
};

FockVector coherent(const cvec& h, const FockSpacePtr& space);
FockOperator gamma(const cmat& a, const FockSpacePtr& space);
FockOperator gamma(const RealLinearMap& a, const FockSpacePtr& space);

// a*(g) and a(g); creation at the top level drops the overflow
FockOperator creation(const cvec& g, const FockSpacePtr& space);
FockOperator annihilation(const cvec& g, const FockSpacePtr& space);
// norm of the part of a*(g) v that left the truncation
double creation_overflow(const cvec& g, const FockVector& v);

FockVector weyl_on_coherent(const cvec& h, const cvec& k, const FockSpacePtr& space);

struct WeylMatrix {
    FockOperator op;
    int working_cutoff = 0;
    // ||(1 - P_N) W P_{N/2}|| measured on the working truncation
    double truncation_bound = 0.0;
};

// exp(i phi(h)) computed on levels <= N + guard and compressed to levels <= N
WeylMatrix weyl_matrix(const cvec& h, const FockSpacePtr& space, int guard = -1);

cmat matrix_exponential(const cmat& a);

struct SecondQuantizedReport {
    double tomita_coherent = 0.0;       // |Γ(s) e^{ik} - e^{-ik}|
    double conjugation_weyl = 0.0;      // |Γ(j) W(k) Γ(j) - W(jk)*| on coherent frames
    double flow_weyl = 0.0;             // |Γ(δ^{it}) W(k) Γ(δ^{-it}) - W(δ^{it} k)|
    double commutation_phase = 0.0;     // |exp(-i Im<h,k'>) - 1|
    double commutation_matrix = 0.0;    // [W(h), W(k')] on low levels of the vacuum
    double symplectic_pairing = 0.0;    // max |Im<h,k'>|
    int samples = 0;
};

SecondQuantizedReport second_quantized_modular_check(const RealSubspace& k, int cutoff, int samples,
                                                     unsigned long long seed, double t = 0.3);

}  // namespace modloc
