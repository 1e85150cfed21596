#pragma once

#include <utility>
#include <vector>

#include "modloc/hilbert.hpp"

namespace modloc {

struct StandardnessCertificate {
    bool standard = false;
    int dim_sum = 0;           // dim_R (K + iK)
    int dim_intersection = 0;  // dim_R (K ∩ iK)
    int ambient = 0;           // 2d
};

StandardnessCertificate is_standard(const RealSubspace& k);

struct StandardnessError : DomainError {
    StandardnessCertificate certificate;
    StandardnessError(const std::string& what, StandardnessCertificate c)
        : DomainError(what), certificate(c) {}
};

RealLinearMap tomita_operator(const RealSubspace& k);

struct SpectralValue {
    double value;
    int multiplicity;
};

struct ModularData {
    RealLinearMap s;
    RealLinearMap j;
    RealLinearMap delta;
    std::vector<SpectralValue> log_delta_spectrum;
    double condition = 1.0;
    rvec eigenvalues;   // of delta, ascending, clamped
    cmat eigenvectors;  // complex orthonormal columns

    // delta^alpha for real alpha
    RealLinearMap delta_power(double alpha) const;
};

ModularData modular_data(const RealLinearMap& s);
RealLinearMap modular_flow(const ModularData& md, double t);

struct FiberBlock {
    double theta = 0.0;
    cvec e1, e2;  // e2 = j e1
    cvec y_plus, y_minus;
};

struct Fiberization {
    std::vector<FiberBlock> blocks;
    RealSubspace fixed_part;
};

Fiberization fiberize(const RealSubspace& k);

// K spanned by y_+ and y_- of a single fiber of angle theta in C^2
RealSubspace fiber_subspace(double theta);

// j and delta rebuilt from the blocks and the fixed part
std::pair<RealLinearMap, RealLinearMap> reassemble(const Fiberization& f, int d);

}  // namespace modloc
