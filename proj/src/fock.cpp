#include "modloc/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "modloc/standard.hpp"

namespace modloc {

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

double multi_factorial(const MultiIndex& occ) {
    double f = 1.0;
    for (int k : occ) f *= factorial(k);
    return f;
}

std::vector<int> decode(long long flat, int d, int n) {
    std::vector<int> idx(n);
    for (int k = n - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(flat % d);
        flat /= d;
    }
    return idx;
}

long long encode(const std::vector<int>& idx, int d) {
    long long flat = 0;
    for (int i : idx) flat = flat * d + i;
    return flat;
}

void enumerate_level(int d, int n, int mode, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (mode == d - 1) {
        cur[mode] = n;
        out.push_back(cur);
        return;
    }
    for (int k = n; k >= 0; --k) {
        cur[mode] = k;
        enumerate_level(d, n - k, mode + 1, cur, out);
    }
}

}  // namespace

Tensor::Tensor(int d_, int n_) : d(d_), n(n_) {
    if (d < 1 || n < 0) throw UsageError("tensor: bad shape");
    data = cvec::Zero(static_cast<Eigen::Index>(std::pow(d, n) + 0.5));
}

Tensor Tensor::elementary(const std::vector<cvec>& factors) {
    if (factors.empty()) throw UsageError("elementary tensor needs at least one factor");
    const int d = static_cast<int>(factors[0].size());
    Tensor t(d, static_cast<int>(factors.size()));
    for (Eigen::Index f = 0; f < t.data.size(); ++f) {
        const auto idx = decode(f, d, t.n);
        cplx v = 1.0;
        for (int k = 0; k < t.n; ++k) {
            if (factors[k].size() != d) throw UsageError("elementary tensor: mixed dimensions");
            v *= factors[k](idx[k]);
        }
        t.data(f) = v;
    }
    return t;
}

Tensor Tensor::power(const cvec& x, int n) {
    if (n == 0) {
        Tensor t(static_cast<int>(x.size()), 0);
        t.data(0) = 1.0;
        return t;
    }
    return elementary(std::vector<cvec>(n, x));
}

double Tensor::asymmetry() const {
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (Eigen::Index f = 0; f < data.size(); ++f) {
                auto idx = decode(f, d, n);
                std::swap(idx[a], idx[b]);
                worst = std::max(worst, std::abs(data(f) - data(encode(idx, d))));
            }
    return worst;
}

Tensor sym_project(const Tensor& t) {
    Tensor out(t.d, t.n);
    std::vector<int> perm(t.n);
    std::iota(perm.begin(), perm.end(), 0);
    long long count = 0;
    do {
        for (Eigen::Index f = 0; f < t.data.size(); ++f) {
            const auto idx = decode(f, t.d, t.n);
            std::vector<int> p(t.n);
            for (int k = 0; k < t.n; ++k) p[k] = idx[perm[k]];
            out.data(encode(p, t.d)) += t.data(f);
        }
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.data /= static_cast<double>(count);
    return out;
}

Tensor sym_project(const std::vector<cvec>& factors, int cutoff) {
    if (static_cast<int>(factors.size()) > cutoff)
        throw TruncationError("sym_project: tensor degree exceeds the Fock cutoff");
    return sym_project(Tensor::elementary(factors));
}

Tensor sym_power_expand(const std::vector<cvec>& factors, int cutoff) {
    const int n = static_cast<int>(factors.size());
    if (n > cutoff) throw TruncationError("sym_power_expand: tensor degree exceeds the Fock cutoff");
    if (n == 0) throw UsageError("sym_power_expand: no factors");
    const int d = static_cast<int>(factors[0].size());
    Tensor out(d, n);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        cvec s = cvec::Zero(d);
        int size = 0;
        for (int j = 0; j < n; ++j)
            if (mask & (1u << j)) {
                s += factors[j];
                ++size;
            }
        const double sign = ((size + n) % 2 == 0) ? 1.0 : -1.0;
        out.data += sign * Tensor::power(s, n).data;
    }
    out.data /= factorial(n);
    return out;
}

FockSpace::FockSpace(int d, int cutoff) : d_(d), cutoff_(cutoff) {
    if (d < 1) throw UsageError("Fock space needs one-particle dimension >= 1");
    if (cutoff < 0) throw UsageError("Fock cutoff must be non-negative");
    offsets_.push_back(0);
    for (int n = 0; n <= cutoff; ++n) {
        MultiIndex cur(d, 0);
        enumerate_level(d, n, 0, cur, basis_);
        offsets_.push_back(static_cast<int>(basis_.size()));
    }
    for (int i = 0; i < dim(); ++i) lookup_[basis_[i]] = i;
    raise_.assign(dim(), std::vector<int>(d, -1));
    lower_.assign(dim(), std::vector<int>(d, -1));
    for (int i = 0; i < dim(); ++i)
        for (int m = 0; m < d; ++m) {
            MultiIndex up = basis_[i];
            ++up[m];
            raise_[i][m] = index(up);
            if (basis_[i][m] > 0) {
                MultiIndex down = basis_[i];
                --down[m];
                lower_[i][m] = index(down);
            }
        }
}

int FockSpace::level_of(int i) const {
    return std::accumulate(basis_[i].begin(), basis_[i].end(), 0);
}

int FockSpace::index(const MultiIndex& occ) const {
    auto it = lookup_.find(occ);
    return it == lookup_.end() ? -1 : it->second;
}

FockSpacePtr make_fock_space(int d, int cutoff) { return std::make_shared<const FockSpace>(d, cutoff); }

long long fock_dimension(int d, int cutoff) {
    long long total = 0;
    for (int n = 0; n <= cutoff; ++n) {
        // C(n+d-1, d-1)
        long long c = 1;
        for (int k = 1; k <= d - 1; ++k) c = c * (n + k) / k;
        total += c;
    }
    return total;
}

cvec FockVector::level(int n) const {
    return coeffs.segment(space->level_offset(n), space->level_size(n));
}

FockVector FockVector::truncated(int n) const {
    FockVector v = *this;
    const int keep = n >= space->cutoff() ? space->dim() : space->level_offset(n + 1);
    v.coeffs.tail(space->dim() - keep).setZero();
    return v;
}

FockVector vacuum(const FockSpacePtr& space) {
    FockVector v{space, cvec::Zero(space->dim())};
    v.coeffs(0) = 1.0;
    return v;
}

cplx inner(const FockVector& a, const FockVector& b) {
    if (a.space->dim() != b.space->dim()) throw UsageError("Fock inner product: different spaces");
    return a.coeffs.dot(b.coeffs);
}

cvec to_occupation(const Tensor& t, const FockSpace& space) {
    if (t.d != space.one_particle_dim()) throw UsageError("to_occupation: dimension mismatch");
    if (t.n > space.cutoff()) throw TruncationError("to_occupation: degree above cutoff");
    cvec out(space.level_size(t.n));
    for (int s = 0; s < space.level_size(t.n); ++s) {
        const MultiIndex& occ = space.state(space.level_offset(t.n) + s);
        std::vector<int> idx;
        for (int m = 0; m < t.d; ++m) idx.insert(idx.end(), occ[m], m);
        out(s) = std::sqrt(factorial(t.n) / multi_factorial(occ)) * t.data(encode(idx, t.d));
    }
    return out;
}

Tensor from_occupation(const cvec& block, int n, const FockSpace& space) {
    Tensor t(space.one_particle_dim(), n);
    for (Eigen::Index f = 0; f < t.data.size(); ++f) {
        MultiIndex occ(t.d, 0);
        for (int i : decode(f, t.d, n)) ++occ[i];
        const int s = space.index(occ) - space.level_offset(n);
        t.data(f) = block(s) / std::sqrt(factorial(n) / multi_factorial(occ));
    }
    return t;
}

FockVector FockOperator::apply(const FockVector& v) const {
    if (v.space->dim() != space->dim()) throw UsageError("Fock operator applied to vector of another space");
    FockVector out{space, antilinear ? cvec(matrix * v.coeffs.conjugate()) : cvec(matrix * v.coeffs)};
    return out;
}

FockOperator FockOperator::adjoint() const {
    FockOperator r = *this;
    r.matrix = antilinear ? cmat(matrix.transpose()) : cmat(matrix.adjoint());
    return r;
}

FockOperator FockOperator::compose(const FockOperator& o) const {
    FockOperator r;
    r.space = space;
    r.kind = (kind == OperatorKind::LevelPreserving && o.kind == OperatorKind::LevelPreserving)
                 ? OperatorKind::LevelPreserving
                 : OperatorKind::General;
    r.antilinear = antilinear != o.antilinear;
    r.matrix = antilinear ? cmat(matrix * o.matrix.conjugate()) : cmat(matrix * o.matrix);
    return r;
}

FockVector coherent(const cvec& h, const FockSpacePtr& space) {
    if (h.size() != space->one_particle_dim()) throw UsageError("coherent: dimension mismatch");
    FockVector v{space, cvec(space->dim())};
    for (int i = 0; i < space->dim(); ++i) {
        const MultiIndex& occ = space->state(i);
        cplx c = 1.0;
        for (int m = 0; m < static_cast<int>(occ.size()); ++m)
            c *= std::pow(h(m), occ[m]) / std::sqrt(factorial(occ[m]));
        v.coeffs(i) = c;
    }
    return v;
}

FockOperator gamma(const cmat& a, const FockSpacePtr& space) {
    const int d = space->one_particle_dim();
    if (a.rows() != d || a.cols() != d) throw UsageError("gamma: dimension mismatch");
    FockOperator op{space, cmat::Zero(space->dim(), space->dim()), false, OperatorKind::LevelPreserving};
    // level n of the Fock space is the space of degree-n polynomials in d variables,
    // |k> <-> x^k / sqrt(k!), and a^{⊗n} is the substitution x_j -> sum_i a_ij x_i
    for (int col = 0; col < space->dim(); ++col) {
        const MultiIndex& k = space->state(col);
        cvec poly = cvec::Zero(space->dim());
        poly(0) = 1.0;
        for (int j = 0; j < d; ++j)
            for (int rep = 0; rep < k[j]; ++rep) {
                cvec next = cvec::Zero(space->dim());
                for (int mu = 0; mu < space->dim(); ++mu) {
                    if (poly(mu) == 0.0) continue;
                    for (int i = 0; i < d; ++i)
                        if (a(i, j) != 0.0) next(space->raised(mu, i)) += poly(mu) * a(i, j);
                }
                poly = std::move(next);
            }
        const double kf = std::sqrt(multi_factorial(k));
        for (int row = 0; row < space->dim(); ++row)
            if (poly(row) != 0.0) op.matrix(row, col) = poly(row) * std::sqrt(multi_factorial(space->state(row))) / kf;
    }
    return op;
}

FockOperator gamma(const RealLinearMap& a, const FockSpacePtr& space) {
    FockOperator op = gamma(a.complex_form(), space);
    op.antilinear = a.cls == MapClass::Antilinear;
    return op;
}

FockOperator creation(const cvec& g, const FockSpacePtr& space) {
    FockOperator op{space, cmat::Zero(space->dim(), space->dim()), false, OperatorKind::LevelShifting};
    for (int i = 0; i < space->dim(); ++i)
        for (int m = 0; m < space->one_particle_dim(); ++m) {
            const int r = space->raised(i, m);
            if (r >= 0) op.matrix(r, i) += g(m) * std::sqrt(space->state(i)[m] + 1.0);
        }
    return op;
}

FockOperator annihilation(const cvec& g, const FockSpacePtr& space) {
    FockOperator op{space, cmat::Zero(space->dim(), space->dim()), false, OperatorKind::LevelShifting};
    for (int i = 0; i < space->dim(); ++i)
        for (int m = 0; m < space->one_particle_dim(); ++m) {
            const int l = space->lowered(i, m);
            if (l >= 0) op.matrix(l, i) += std::conj(g(m)) * std::sqrt(static_cast<double>(space->state(i)[m]));
        }
    return op;
}

double creation_overflow(const cvec& g, const FockVector& v) {
    const FockSpace& s = *v.space;
    const FockSpace up(s.one_particle_dim(), s.cutoff() + 1);
    cvec top = cvec::Zero(up.level_size(s.cutoff() + 1));
    for (int i = s.level_offset(s.cutoff()); i < s.dim(); ++i)
        for (int m = 0; m < s.one_particle_dim(); ++m) {
            MultiIndex occ = s.state(i);
            ++occ[m];
            top(up.index(occ) - up.level_offset(s.cutoff() + 1)) += g(m) * std::sqrt(double(occ[m])) * v.coeffs(i);
        }
    return top.norm();
}

FockVector weyl_on_coherent(const cvec& h, const cvec& k, const FockSpacePtr& space) {
    const cplx ip = inner(h, k);
    const cvec hk = h + k;
    const cplx c = std::exp(cplx(0.25 * k.squaredNorm() - 0.25 * hk.squaredNorm(), -0.5 * ip.imag()));
    FockVector v = coherent(cvec(cplx(0, 1.0 / std::sqrt(2.0)) * hk), space);
    v.coeffs *= c;
    return v;
}

cmat matrix_exponential(const cmat& a) { return a.exp(); }

WeylMatrix weyl_matrix(const cvec& h, const FockSpacePtr& space, int guard) {
    const int n = space->cutoff();
    if (guard < 0) guard = std::max(8, n);
    const FockSpacePtr work = make_fock_space(space->one_particle_dim(), n + guard);
    const cmat phi = (annihilation(h, work).matrix + creation(h, work).matrix) / std::sqrt(2.0);
    const cmat u = matrix_exponential(cmat(cplx(0, 1) * phi));
    WeylMatrix w;
    w.working_cutoff = n + guard;
    w.op = FockOperator{space, u.topLeftCorner(space->dim(), space->dim()), false, OperatorKind::General};
    const int low = space->level_offset(n / 2 + 1);
    const cmat leak = u.block(space->dim(), 0, work->dim() - space->dim(), low);
    w.truncation_bound = leak.size() ? Eigen::JacobiSVD<cmat>(leak).singularValues()(0) : 0.0;
    return w;
}

SecondQuantizedReport second_quantized_modular_check(const RealSubspace& k, int cutoff, int samples,
                                                     unsigned long long seed, double t) {
    const auto cert = is_standard(k);
    if (!cert.standard) throw StandardnessError("second_quantized_modular_check: subspace is not standard", cert);
    const int d = k.dim;
    const ModularData md = modular_data(tomita_operator(k));
    const RealSubspace kp = symplectic_complement(k);
    const FockSpacePtr space = make_fock_space(d, cutoff);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const double radius = 0.5;

    auto sample = [&](const RealSubspace& sub) {
        rvec c(sub.real_dim());
        for (int i = 0; i < c.size(); ++i) c(i) = nd(rng);
        cvec v = complexify(sub.basis * c);
        return cvec(radius * v / v.norm());
    };
    auto sample_any = [&]() {
        cvec v(d);
        for (int i = 0; i < d; ++i) v(i) = {nd(rng), nd(rng)};
        return cvec(radius * v / v.norm());
    };

    const FockOperator gs = gamma(md.s, space);
    const FockOperator gj = gamma(md.j, space);
    const RealLinearMap flow = modular_flow(md, t);
    const FockOperator gf = gamma(flow, space);
    const FockOperator gfi = gamma(modular_flow(md, -t), space);

    std::vector<FockVector> frame{vacuum(space)};
    for (int i = 0; i < 3; ++i) frame.push_back(coherent(cvec(cplx(0, 1 / std::sqrt(2.0)) * sample_any()), space));

    SecondQuantizedReport rep;
    rep.samples = samples;
    const cplx i1(0, 1);
    for (int sidx = 0; sidx < samples; ++sidx) {
        const cvec kv = sample(k);
        const FockVector lhs = gs.apply(coherent(cvec(i1 * kv), space));
        const FockVector rhs = coherent(cvec(-i1 * kv), space);
        rep.tomita_coherent = std::max(rep.tomita_coherent, (lhs.coeffs - rhs.coeffs).norm());

        const FockOperator wk = weyl_matrix(kv, space).op;
        const FockOperator conj_side = gj.compose(wk).compose(gj);
        const FockOperator wjk_adj = weyl_matrix(md.j.apply(kv), space).op.adjoint();
        const FockOperator flow_side = gf.compose(wk).compose(gfi);
        const FockOperator wflow = weyl_matrix(flow.apply(kv), space).op;
        for (const auto& x : frame) {
            rep.conjugation_weyl =
                std::max(rep.conjugation_weyl, (conj_side.apply(x).coeffs - wjk_adj.apply(x).coeffs).norm());
            rep.flow_weyl = std::max(rep.flow_weyl, (flow_side.apply(x).coeffs - wflow.apply(x).coeffs).norm());
        }

        const cvec kprime = sample(kp);
        const double im = inner(kv, kprime).imag();
        rep.symplectic_pairing = std::max(rep.symplectic_pairing, std::abs(im));
        rep.commutation_phase = std::max(rep.commutation_phase, std::abs(std::exp(cplx(0, -im)) - 1.0));
        const FockOperator wp = weyl_matrix(kprime, space).op;
        const FockVector om = vacuum(space);
        const cvec ab = wk.apply(wp.apply(om)).coeffs;
        const cvec ba = wp.apply(wk.apply(om)).coeffs;
        const int low = space->level_offset(cutoff / 2 + 1);
        rep.commutation_matrix = std::max(rep.commutation_matrix, (ab - ba).head(low).norm());
    }
    return rep;
}

}  // namespace modloc
