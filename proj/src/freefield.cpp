#include "modloc/freefield.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace modloc {

namespace {

constexpr double pi = std::numbers::pi;

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

}  // namespace

// FFTW planning is not thread safe; execution through the new-array interface is
class FftCache {
public:
    static std::shared_ptr<FftCache> instance() {
        static std::shared_ptr<FftCache> cache(new FftCache);
        return cache;
    }

    Plans plans(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        fftw_complex* in = fftw_alloc_complex(n);
        fftw_complex* out = fftw_alloc_complex(n);
        Plans p;
        p.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        plans_[n] = p;
        return p;
    }

private:
    std::mutex mutex_;
    std::map<int, Plans> plans_;
};

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// 16-point Gauss-Legendre rule on [-1, 1]
const std::array<std::pair<double, double>, 16>& gauss_legendre16() {
    static const auto rule = [] {
        std::array<std::pair<double, double>, 16> r{};
        const int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        return r;
    }();
    return rule;
}

double bump_profile(double q) { return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0; }

// Abel projection A(x) = int b(x^2 + y^2) dy of the unit bump, y = sqrt(1-x^2) u; the integrand is even in u.
// Panels are graded towards u = 1 where the bump flattens out; the coarse rule is an independent check.
double abel_projection(double x, bool coarse) {
    static constexpr std::array<double, 7> graded{0.0, 0.5, 0.75, 0.875, 0.9375, 0.96875, 1.0};
    static constexpr std::array<double, 9> uniform{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
    const double w = 1.0 - x * x;
    if (w <= 0.0) return 0.0;
    const auto& gl = gauss_legendre16();
    auto integrate = [&](const auto& edges) {
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            const double half = 0.5 * (edges[p + 1] - edges[p]);
            for (const auto& [t, wt] : gl) {
                const double u = edges[p] + half * (t + 1.0);
                acc += half * wt * bump_profile(1.0 - w * (1.0 - u * u));
            }
        }
        return acc;
    };
    return 2.0 * std::sqrt(w) * (coarse ? integrate(uniform) : integrate(graded));
}

// H(kappa) = int_0^1 b(s) J0(kappa s) s ds = (2 pi)^{-1} int A(x) cos(kappa x) dx, trapezoid in x
struct AbelTable {
    double dx;
    std::vector<double> a;  // A(j dx), j >= 0

    AbelTable(int m, bool coarse) : dx(1.0 / m), a(m + 1) {
        for (int j = 0; j <= m; ++j) a[j] = abel_projection(j * dx, coarse);
    }
    double hankel(double kappa) const {
        double acc = 0.5 * a[0];
        for (std::size_t j = 1; j < a.size(); ++j) acc += a[j] * std::cos(kappa * dx * double(j));
        return 2.0 * dx * acc / (2.0 * pi);
    }
};

double relative_difference(const cvec& a, const cvec& b) {
    const double n = a.norm();
    return n == 0.0 ? 0.0 : (a - b).norm() / n;
}

}  // namespace

FreeFieldModel::FreeFieldModel(double mass, double theta_max, int n_points, double amplification_cap)
    : mass_(mass), cap_(amplification_cap), grid_{theta_max, n_points}, mutex_(std::make_shared<std::mutex>()) {
    if (!(mass > 0.0)) throw UsageError("free field: mass must be positive");
    if (!(theta_max >= 4.0)) throw UsageError("free field: theta_max must be at least 4");
    if (!power_of_two(n_points) || n_points < 8) throw UsageError("free field: n_points must be a power of two");
    if (!(amplification_cap > 1.0)) throw UsageError("free field: amplification cap must exceed 1");
    const int n = n_points;
    const double h = grid_.spacing();
    theta_.resize(n);
    p0_.resize(n);
    p1_.resize(n);
    omega_.resize(n);
    for (int k = 0; k < n; ++k) {
        theta_(k) = grid_.theta(k);
        p0_(k) = mass * std::cosh(theta_(k));
        p1_(k) = mass * std::sinh(theta_(k));
        const int f = k < n / 2 ? k : k - n;
        omega_(k) = 2.0 * pi * f / (n * h);
    }
    fft_ = FftCache::instance();
    fft_->plans(n);
}

double FreeFieldModel::cutoff_frequency() const { return std::log(cap_) / pi; }

cplx FreeFieldModel::inner(const cvec& x, const cvec& y) const {
    if (x.size() != size() || y.size() != size()) throw UsageError("free field: vector not on the model grid");
    return h() * x.dot(y);
}

double FreeFieldModel::norm(const cvec& x) const { return std::sqrt(h()) * x.norm(); }

cvec FreeFieldModel::fft(const cvec& x) const {
    if (x.size() != size()) throw UsageError("free field: vector not on the model grid");
    cvec in = x, out(size());
    const Plans p = fft_->plans(size());
    fftw_execute_dft(p.forward, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

cvec FreeFieldModel::ifft(const cvec& x) const {
    if (x.size() != size()) throw UsageError("free field: vector not on the model grid");
    cvec in = x, out(size());
    const Plans p = fft_->plans(size());
    fftw_execute_dft(p.backward, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    return out / double(size());
}

rvec FreeFieldModel::realified(const cvec& x) const { return std::sqrt(h()) * modloc::realify(x); }

rmat FreeFieldModel::realified(const std::vector<cvec>& xs) const {
    rmat out(2 * size(), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = realified(xs[i]);
    return out;
}

cvec FreeFieldModel::from_realified(const rvec& x) const { return complexify(x) / std::sqrt(h()); }

const cvec& FreeFieldModel::radial_profile(double r, double* richardson) const {
    std::lock_guard<std::mutex> lock(*mutex_);
    auto it = profiles_.find(r);
    if (it == profiles_.end()) {
        // symmetric in theta: theta_{n-k} = -theta_k
        const int n = size();
        cvec fine = cvec::Zero(n), coarse = cvec::Zero(n);
        const double scale = std::sqrt(2.0 * pi) * r * r;
        // the trapezoid sum aliases at 2 pi / dx, kept well above the largest kappa
        const double kappa_max = r * mass_ * std::sqrt(std::cosh(2.0 * grid_.theta_max));
        const int m = std::max(256, static_cast<int>(std::ceil((kappa_max + 1500.0) / (2.0 * pi))));
        const AbelTable fine_table(m, false);
        const AbelTable coarse_table(std::max(192, static_cast<int>(std::ceil((kappa_max + 700.0) / (2.0 * pi)))), true);
        double h0 = 0.0, window_max = 0.0;
        int since_reset = 0;
        for (int k = n / 2; k >= 0; --k) {
            const double kappa = r * mass_ * std::sqrt(std::cosh(2.0 * theta_(k)));
            const double hf = fine_table.hankel(kappa), hc = coarse_table.hankel(kappa);
            if (k == n / 2) h0 = std::abs(hf);
            fine(k) = scale * hf;
            coarse(k) = scale * hc;
            if (k > 0 && k < n / 2) {
                fine(n - k) = fine(k);
                coarse(n - k) = coarse(k);
            }
            // stop once a whole window of 64 nodes sits below the noise floor
            window_max = std::max(window_max, std::abs(hf));
            if (++since_reset == 64) {
                if (window_max < 1e-18 * h0) break;
                window_max = 0.0;
                since_reset = 0;
            }
        }
        Profile prof{fine, relative_difference(fine, coarse)};
        it = profiles_.emplace(r, std::move(prof)).first;
    }
    if (richardson) *richardson = it->second.richardson;
    return it->second.values;
}

// ---------------------------------------------------------------- geometry

Region2 Region2::right_wedge(Point2 apex) { return {RegionKind::RightWedge, apex, 0.0, nullptr}; }
Region2 Region2::left_wedge(Point2 apex) { return {RegionKind::LeftWedge, apex, 0.0, nullptr}; }

Region2 Region2::double_cone(Point2 center, double r) {
    if (!(r > 0.0)) throw UsageError("double cone radius must be positive");
    return {RegionKind::DoubleCone, center, r, nullptr};
}

Region2 Region2::complement_of(const Region2& o) {
    if (o.kind == RegionKind::ComplementOf) return *o.base;
    return {RegionKind::ComplementOf, {}, 0.0, std::make_shared<const Region2>(o)};
}

bool Region2::contains(Point2 x) const {
    const Point2 y = x - apex;
    switch (kind) {
        case RegionKind::RightWedge:
            return y.x1 > std::abs(y.x0);
        case RegionKind::LeftWedge:
            return -y.x1 > std::abs(y.x0);
        case RegionKind::DoubleCone:
            return std::abs(y.x0) + std::abs(y.x1) < radius;
        case RegionKind::ComplementOf:
            if (base->kind == RegionKind::DoubleCone) {
                const Point2 top{0.0, base->radius};
                return right_wedge(base->apex + top).contains(x) || left_wedge(base->apex - top).contains(x);
            }
            return base->causal_complement().contains(x);
    }
    return false;
}

bool Region2::contains_disc(Point2 c, double r) const {
    const Point2 y = c - apex;
    const double s = std::sqrt(2.0) * r;
    switch (kind) {
        case RegionKind::RightWedge:
            return y.x1 - std::abs(y.x0) > s;
        case RegionKind::LeftWedge:
            return -y.x1 - std::abs(y.x0) > s;
        case RegionKind::DoubleCone:
            return std::abs(y.x0) + std::abs(y.x1) + s < radius;
        case RegionKind::ComplementOf: {
            if (base->kind == RegionKind::DoubleCone) {
                const Point2 top{0.0, base->radius};
                return right_wedge(base->apex + top).contains_disc(c, r) ||
                       left_wedge(base->apex - top).contains_disc(c, r);
            }
            return base->causal_complement().contains_disc(c, r);
        }
    }
    return false;
}

Region2 Region2::causal_complement() const {
    switch (kind) {
        case RegionKind::RightWedge:
            return left_wedge(apex);
        case RegionKind::LeftWedge:
            return right_wedge(apex);
        case RegionKind::DoubleCone:
            return complement_of(*this);
        case RegionKind::ComplementOf:
            return *base;
    }
    return *this;
}

Region2 Region2::translated(Point2 a) const { return transformed(PoincareElement::translate(a)); }

Region2 Region2::transformed(const PoincareElement& g) const {
    Region2 out = *this;
    switch (kind) {
        case RegionKind::RightWedge:
        case RegionKind::LeftWedge:
            out.apex = g.act(apex);
            if (g.reflect) out.kind = kind == RegionKind::RightWedge ? RegionKind::LeftWedge : RegionKind::RightWedge;
            return out;
        case RegionKind::DoubleCone:
            if (g.rapidity != 0.0) throw UsageError("boosted double cones are not represented");
            out.apex = g.act(apex);
            return out;
        case RegionKind::ComplementOf:
            return complement_of(base->transformed(g));
    }
    return out;
}

std::string Region2::describe() const {
    std::ostringstream os;
    os << std::setprecision(6);
    switch (kind) {
        case RegionKind::RightWedge:
            os << "right_wedge(" << apex.x0 << "," << apex.x1 << ")";
            break;
        case RegionKind::LeftWedge:
            os << "left_wedge(" << apex.x0 << "," << apex.x1 << ")";
            break;
        case RegionKind::DoubleCone:
            os << "double_cone(" << apex.x0 << "," << apex.x1 << ";" << radius << ")";
            break;
        case RegionKind::ComplementOf:
            os << "complement(" << base->describe() << ")";
            break;
    }
    return os.str();
}

Point2 PoincareElement::act(Point2 x) const {
    if (reflect) x = -x;
    const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
    return Point2{ch * x.x0 + sh * x.x1, sh * x.x0 + ch * x.x1} + translation;
}

PoincareElement PoincareElement::compose(const PoincareElement& other) const {
    const PoincareElement linear{rapidity, {}, reflect};
    return {rapidity + other.rapidity, translation + linear.act(other.translation), reflect != other.reflect};
}

PoincareElement PoincareElement::inverse() const {
    const PoincareElement linear{-rapidity, {}, reflect};
    return {-rapidity, -linear.act(translation), reflect};
}

TestFunction2::TestFunction2(Point2 c, double r, const Region2& reg, double amp)
    : center(c), radius(r), amplitude(amp), region(reg) {
    if (!(r > 0.0)) throw UsageError("test function radius must be positive");
    if (!reg.contains_disc(c, r)) throw UsageError("test function support is not inside " + reg.describe());
}

TestFunction2 TestFunction2::unchecked(Point2 c, double r, double amp) {
    TestFunction2 f(c, r, Region2::double_cone(c, 2.0 * r), amp);
    f.region.reset();
    return f;
}

double TestFunction2::operator()(Point2 x) const {
    const Point2 y = transform.inverse().act(x) - center;
    return amplitude * bump_profile((y.x0 * y.x0 + y.x1 * y.x1) / (radius * radius));
}

TestFunction2 TestFunction2::transformed(const PoincareElement& g) const {
    TestFunction2 out = *this;
    out.transform = g.compose(transform);
    if (region) {
        try {
            out.region = region->transformed(g);
        } catch (const UsageError&) {
            out.region.reset();
        }
    }
    return out;
}

Point2 TestFunction2::support_extent() const {
    const double e = radius * std::hypot(std::cosh(transform.rapidity), std::sinh(transform.rapidity));
    return {e, e};
}

double TestFunction2::support_radius() const { return radius * std::exp(std::abs(transform.rapidity)); }

// ---------------------------------------------------------------- embedding

namespace {

cvec embed_radial(const TestFunction2& f, const FreeFieldModel& model, double* err) {
    const cvec& prof = model.radial_profile(f.radius, err);
    const Point2 c = f.support_center();
    cvec out(model.size());
    for (int k = 0; k < model.size(); ++k)
        out(k) = f.amplitude * std::polar(1.0, model.p0()(k) * c.x0 - model.p1()(k) * c.x1) * prof(k);
    return out;
}

// trapezoid sum over the lattice hx Z^2 restricted to the support box; stride 2 gives the coarse sum
cvec embed_lattice(const TestFunction2& f, const FreeFieldModel& model, double hx, int stride) {
    const Point2 c = f.support_center(), e = f.support_extent();
    const long i0 = static_cast<long>(std::floor((c.x0 - e.x0) / hx)), i1 = static_cast<long>(std::ceil((c.x0 + e.x0) / hx));
    const long j0 = static_cast<long>(std::floor((c.x1 - e.x1) / hx)), j1 = static_cast<long>(std::ceil((c.x1 + e.x1) / hx));
    std::vector<double> xs0, xs1;
    for (long i = i0; i <= i1; ++i)
        if (i % stride == 0) xs0.push_back(i * hx);
    for (long j = j0; j <= j1; ++j)
        if (j % stride == 0) xs1.push_back(j * hx);
    const auto n0 = static_cast<Eigen::Index>(xs0.size()), n1 = static_cast<Eigen::Index>(xs1.size());
    rmat vals(n0, n1);
    for (Eigen::Index a = 0; a < n0; ++a)
        for (Eigen::Index b = 0; b < n1; ++b) vals(a, b) = f({xs0[a], xs1[b]});
    const int n = model.size();
    cvec out(n);
    const double h = hx * stride;
    const double scale = std::sqrt(2.0 * pi) * h * h / (2.0 * pi);
    cvec e1(n1), row(n0);
    for (int k = 0; k < n; ++k) {
        for (Eigen::Index b = 0; b < n1; ++b) e1(b) = std::polar(1.0, -model.p1()(k) * xs1[b]);
        row = vals * e1;
        cplx acc = 0.0;
        for (Eigen::Index a = 0; a < n0; ++a) acc += std::polar(1.0, model.p0()(k) * xs0[a]) * row(a);
        out(k) = scale * acc;
    }
    return out;
}

}  // namespace

EmbedResult embed(const TestFunction2& f, const FreeFieldModel& model, const EmbedOptions& opt) {
    const Point2 c = f.support_center(), e = f.support_extent();
    if (std::abs(c.x0) + e.x0 >= opt.window || std::abs(c.x1) + e.x1 >= opt.window)
        throw UsageError("test function support leaves the spacetime window");
    EmbedRoute route = opt.route;
    if (route == EmbedRoute::Auto) route = f.radial() ? EmbedRoute::Radial : EmbedRoute::Lattice;
    if (route == EmbedRoute::Radial && !f.radial()) throw UsageError("radial embedding needs an unboosted bump");
    EmbedResult r;
    r.route = route;
    if (route == EmbedRoute::Radial) {
        r.values = embed_radial(f, model, &r.quadrature_error);
    } else {
        if (!(opt.hx > 0.0)) throw UsageError("lattice spacing must be positive");
        r.values = embed_lattice(f, model, opt.hx, 1);
        r.quadrature_error = relative_difference(r.values, embed_lattice(f, model, opt.hx, 2));
    }
    return r;
}

EmbedResult embed(const std::vector<TestFunction2>& fs, const FreeFieldModel& model, const EmbedOptions& opt) {
    EmbedResult r;
    r.values = cvec::Zero(model.size());
    for (const auto& f : fs) {
        const EmbedResult one = embed(f, model, opt);
        r.values += one.values;
        r.quadrature_error = std::max(r.quadrature_error, one.quadrature_error);
        r.route = one.route;
    }
    return r;
}

// ---------------------------------------------------------------- Poincare action

cvec boost_shift(const cvec& phi, double lambda, const FreeFieldModel& model) {
    if (lambda == 0.0) return phi;
    cvec f = model.fft(phi);
    const rvec& w = model.frequencies();
    for (int k = 0; k < model.size(); ++k) f(k) *= std::polar(1.0, -w(k) * lambda);
    return model.ifft(f);
}

cvec translation_phase(Point2 a, const FreeFieldModel& model) {
    cvec out(model.size());
    for (int k = 0; k < model.size(); ++k) out(k) = std::polar(1.0, a.x0 * model.p0()(k) - a.x1 * model.p1()(k));
    return out;
}

cvec poincare_act(const PoincareElement& g, const cvec& phi, const FreeFieldModel& model, double leakage_budget,
                  double* leaked) {
    if (phi.size() != model.size()) throw UsageError("free field: vector not on the model grid");
    cvec x = g.reflect ? cvec(phi.conjugate()) : phi;
    double leak = 0.0;
    if (g.rapidity != 0.0) {
        // the periodic shift wraps the strip of width |lambda| at the leading edge
        const int n = model.size();
        const int strip = std::min(n, static_cast<int>(std::ceil(std::abs(g.rapidity) / model.h())));
        const double total = x.squaredNorm();
        const double wrapped = g.rapidity > 0 ? x.tail(strip).squaredNorm() : x.head(strip).squaredNorm();
        leak = total > 0.0 ? std::sqrt(wrapped / total) : 0.0;
        if (leaked) *leaked = leak;
        if (leak > leakage_budget) throw BoundaryTruncationError("boost leaks mass across the rapidity grid edge", leak);
        x = boost_shift(x, g.rapidity, model);
    } else if (leaked) {
        *leaked = 0.0;
    }
    if (g.translation.x0 != 0.0 || g.translation.x1 != 0.0) x = x.cwiseProduct(translation_phase(g.translation, model));
    return x;
}

double covariance_residual(const TestFunction2& f, const PoincareElement& g, const FreeFieldModel& model,
                           const EmbedOptions& opt) {
    EmbedOptions lat = opt;
    lat.route = EmbedRoute::Lattice;
    const cvec ef = embed(f, model, lat).values;
    const double n = ef.norm();
    if (n == 0.0) return 0.0;
    if (g.is_identity()) return 0.0;
    const cvec lhs = embed(f.transformed(g), model, lat).values;
    return (lhs - poincare_act(g, ef, model)).norm() / n;
}

RealSubspace local_subspace(const Region2& o, const std::vector<TestFunction2>& dictionary,
                            const FreeFieldModel& model, const EmbedOptions& opt) {
    std::vector<cvec> vs;
    for (const auto& f : dictionary) {
        if (!o.contains_disc(f.support_center(), f.support_radius()))
            throw UsageError("dictionary member is not supported in " + o.describe());
        vs.push_back(embed(f, model, opt).values);
    }
    if (vs.empty()) return zero_subspace(model.size());
    return real_span(model.size(), model.realified(vs));
}

double locality_pairing(const TestFunction2& f, const TestFunction2& g, const FreeFieldModel& model,
                        const EmbedOptions& opt) {
    return model.inner(embed(f, model, opt).values, embed(g, model, opt).values).imag();
}

// ---------------------------------------------------------------- modular half shift

HalfShift wedge_modular_half(const cvec& phi, const FreeFieldModel& model, int direction, double tail_threshold) {
    if (direction != 1 && direction != -1) throw UsageError("half shift direction must be +1 or -1");
    cvec f = model.fft(phi);
    const rvec& w = model.frequencies();
    const double log_cap = std::log(model.amplification_cap());
    const double total = f.squaredNorm();
    const double floor = 1e-15 * f.cwiseAbs().maxCoeff();
    HalfShift out;
    double cut = 0.0, log_max = -1e300;
    std::vector<double> logs;
    for (int k = 0; k < model.size(); ++k) {
        const double e = -direction * pi * w(k);
        if (e > log_cap) {
            const double a = std::abs(f(k));
            if (a > floor) {
                cut += a * a;
                logs.push_back(2.0 * e + 2.0 * std::log(a));
                log_max = std::max(log_max, logs.back());
            }
            f(k) = 0.0;
        } else {
            f(k) *= std::exp(e);
        }
    }
    if (total > 0.0) {
        out.tail_mass = cut / total;
        if (!logs.empty()) {
            double s = 0.0;
            for (double l : logs) s += std::exp(l - log_max);
            out.log10_amplified_tail = (log_max + std::log(s) - std::log(total)) / std::log(10.0);
        }
    }
    out.in_domain = out.tail_mass <= tail_threshold;
    out.values = model.ifft(f);
    return out;
}

cvec band_project(const cvec& phi, const FreeFieldModel& model) {
    cvec f = model.fft(phi);
    const double wc = model.cutoff_frequency();
    const rvec& w = model.frequencies();
    for (int k = 0; k < model.size(); ++k)
        if (std::abs(w(k)) > wc) f(k) = 0.0;
    return model.ifft(f);
}

double band_fraction(const cvec& phi, const FreeFieldModel& model) {
    const double n = phi.norm();
    return n == 0.0 ? 1.0 : band_project(phi, model).norm() / n;
}

cvec right_wedge_tomita(const cvec& phi, const FreeFieldModel& model, HalfShift* diag) {
    HalfShift hs = wedge_modular_half(phi, model, -1);
    cvec out = hs.values.conjugate();
    if (diag) *diag = std::move(hs);
    return out;
}

BwResult bw_diagnostics(const cvec& phi, const FreeFieldModel& model) {
    BwResult r;
    const HalfShift whole = wedge_modular_half(phi, model, -1);
    r.tail_mass = whole.tail_mass;
    r.log10_amplified_tail = whole.log10_amplified_tail;
    const cvec p = band_project(phi, model);
    r.band_fraction = phi.norm() == 0.0 ? 1.0 : p.norm() / phi.norm();
    const double pn = p.norm();
    r.residual = pn == 0.0 ? 0.0 : (right_wedge_tomita(p, model) - p).norm() / pn;
    return r;
}

BwResult bw_residual(const TestFunction2& f, const FreeFieldModel& model, const EmbedOptions& opt) {
    const EmbedResult e = embed(f, model, opt);
    BwResult r = bw_diagnostics(e.values, model);
    r.quadrature_error = e.quadrature_error;
    if (r.tail_mass > 1e-8)
        throw DomainViolation("embedding is outside the domain of the right-wedge half shift", r.tail_mass,
                              r.log10_amplified_tail);
    return r;
}

// ---------------------------------------------------------------- Borchers

cvec lightlike_phase(double alpha, const FreeFieldModel& model) {
    // a = (alpha, alpha): a.p = alpha m e^{-theta}
    cvec out(model.size());
    for (int k = 0; k < model.size(); ++k) out(k) = std::polar(1.0, alpha * model.mass() * std::exp(-model.theta()(k)));
    return out;
}

cvec gaussian_probe(const FreeFieldModel& model, double center, double sigma) {
    cvec out(model.size());
    for (int k = 0; k < model.size(); ++k) {
        const double z = (model.theta()(k) - center) / sigma;
        out(k) = std::exp(-0.5 * z * z);
    }
    return out;
}

BorchersReport borchers_check(double alpha, double t, const std::vector<cvec>& probes, const FreeFieldModel& model) {
    BorchersReport rep;
    const cvec u = lightlike_phase(alpha, model);
    const cvec u_scaled = lightlike_phase(std::exp(-2.0 * pi * t) * alpha, model);
    const cvec u_neg = lightlike_phase(-alpha, model);
    for (const auto& phi : probes) {
        const double n = phi.norm();
        if (n == 0.0) continue;
        // Delta^{it} phi(theta) = phi(theta + 2 pi t)
        const cvec lhs = boost_shift(cvec(u.cwiseProduct(boost_shift(phi, 2.0 * pi * t, model))), -2.0 * pi * t, model);
        rep.boost_deviation = std::max(rep.boost_deviation, (lhs - u_scaled.cwiseProduct(phi)).norm() / n);
        const cvec jlhs = u.cwiseProduct(phi.conjugate()).conjugate();
        rep.conjugation_deviation = std::max(rep.conjugation_deviation, (jlhs - u_neg.cwiseProduct(phi)).norm() / n);
        ++rep.probes;
    }
    return rep;
}

std::string one_particle_csv(const cvec& phi, const FreeFieldModel& model) {
    std::ostringstream os;
    os << "theta,re,im\n" << std::setprecision(17);
    for (int k = 0; k < model.size(); ++k) os << model.theta()(k) << "," << phi(k).real() << "," << phi(k).imag() << "\n";
    return os.str();
}

void write_csv(const std::string& path, const cvec& phi, const FreeFieldModel& model) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path);
    os << one_particle_csv(phi, model);
}

}  // namespace modloc
