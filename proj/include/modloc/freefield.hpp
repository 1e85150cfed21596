#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "modloc/hilbert.hpp"

namespace modloc {

struct BoundaryTruncationError : DomainError {
    double leaked_mass;
    BoundaryTruncationError(const std::string& what, double leaked) : DomainError(what), leaked_mass(leaked) {}
};

struct DomainViolation : DomainError {
    double tail_mass;
    double log10_amplified_tail;
    DomainViolation(const std::string& what, double tail, double log_tail)
        : DomainError(what), tail_mass(tail), log10_amplified_tail(log_tail) {}
};

struct RapidityGrid {
    double theta_max = 6.0;
    int n_points = 512;

    double spacing() const { return 2.0 * theta_max / n_points; }
    double theta(int k) const { return -theta_max + spacing() * k; }
};

class FftCache;

class FreeFieldModel {
public:
    FreeFieldModel(double mass, double theta_max, int n_points, double amplification_cap = 1e12);

    double mass() const { return mass_; }
    const RapidityGrid& grid() const { return grid_; }
    int size() const { return grid_.n_points; }
    double h() const { return grid_.spacing(); }
    double amplification_cap() const { return cap_; }
    // frequencies beyond this are cut from e^{±pi w}
    double cutoff_frequency() const;

    const rvec& theta() const { return theta_; }
    const rvec& p0() const { return p0_; }
    const rvec& p1() const { return p1_; }
    // angular theta-frequencies in FFT order
    const rvec& frequencies() const { return omega_; }

    cplx inner(const cvec& x, const cvec& y) const;
    double norm(const cvec& x) const;

    cvec fft(const cvec& x) const;
    cvec ifft(const cvec& x) const;

    // coordinates in which the Euclidean product is the grid product
    rvec realified(const cvec& x) const;
    rmat realified(const std::vector<cvec>& xs) const;
    cvec from_realified(const rvec& x) const;

    // cached Hankel profile of the unit bump at radius r
    const cvec& radial_profile(double r, double* richardson = nullptr) const;

private:
    double mass_, cap_;
    RapidityGrid grid_;
    rvec theta_, p0_, p1_, omega_;
    std::shared_ptr<FftCache> fft_;
    struct Profile {
        cvec values;
        double richardson = 0.0;
    };
    mutable std::map<double, Profile> profiles_;
    mutable std::shared_ptr<std::mutex> mutex_;
};

struct Point2 {
    double x0 = 0.0;
    double x1 = 0.0;
    bool operator==(const Point2&) const = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x0 + b.x0, a.x1 + b.x1}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x0 - b.x0, a.x1 - b.x1}; }
inline Point2 operator-(Point2 a) { return {-a.x0, -a.x1}; }

// x -> a + Lambda(rapidity) (reflect ? -x : x)
struct PoincareElement {
    double rapidity = 0.0;
    Point2 translation;
    bool reflect = false;

    static PoincareElement boost(double lambda) { return {lambda, {}, false}; }
    static PoincareElement translate(Point2 a) { return {0.0, a, false}; }
    static PoincareElement reflection() { return {0.0, {}, true}; }

    Point2 act(Point2 x) const;
    PoincareElement compose(const PoincareElement& other) const;  // this after other
    PoincareElement inverse() const;
    bool is_identity() const { return rapidity == 0.0 && translation.x0 == 0.0 && translation.x1 == 0.0 && !reflect; }
};

enum class RegionKind { RightWedge, LeftWedge, DoubleCone, ComplementOf };

struct Region2 {
    RegionKind kind = RegionKind::RightWedge;
    Point2 apex;          // wedges; center for a double cone
    double radius = 0.0;  // double cone
    std::shared_ptr<const Region2> base;  // for ComplementOf

    static Region2 right_wedge(Point2 apex = {});
    static Region2 left_wedge(Point2 apex = {});
    // diamond |x0-c0| + |x1-c1| < r
    static Region2 double_cone(Point2 center, double r);
    static Region2 complement_of(const Region2& o);

    bool contains(Point2 x) const;
    // closed disc of radius r around c strictly inside
    bool contains_disc(Point2 c, double r) const;
    Region2 causal_complement() const;
    Region2 translated(Point2 a) const;
    // wedges and complements transform for any g, double cones only without a boost
    Region2 transformed(const PoincareElement& g) const;
    bool bounded() const { return kind == RegionKind::DoubleCone; }
    std::string describe() const;
};

// smooth bump exp(-1/(1-|y|^2)), y = (g^{-1}x - c)/r, declared inside a region
struct TestFunction2 {
    Point2 center;
    double radius = 0.5;
    double amplitude = 1.0;
    PoincareElement transform;  // f(x) = bump(transform^{-1} x)
    std::optional<Region2> region;

    TestFunction2(Point2 c, double r, const Region2& region, double amplitude = 1.0);
    // unchecked: support may leave the region
    static TestFunction2 unchecked(Point2 c, double r, double amplitude = 1.0);
    double operator()(Point2 x) const;
    TestFunction2 transformed(const PoincareElement& g) const;  // x -> f(g^{-1} x)
    bool radial() const { return transform.rapidity == 0.0; }
    Point2 support_center() const { return transform.act(center); }
    // half extents of the support bounding box
    Point2 support_extent() const;
    // radius of a disc around support_center() containing the support
    double support_radius() const;
};

enum class EmbedRoute { Auto, Radial, Lattice };

struct EmbedOptions {
    EmbedRoute route = EmbedRoute::Auto;
    double hx = 1.0 / 96.0;  // lattice spacing
    double window = 32.0;    // half width of the admissible spacetime box
};

struct EmbedResult {
    cvec values;
    double quadrature_error = 0.0;  // relative difference between two resolutions
    EmbedRoute route = EmbedRoute::Radial;
};

EmbedResult embed(const TestFunction2& f, const FreeFieldModel& model, const EmbedOptions& opt = {});
// sum of amplitudes times embeddings
EmbedResult embed(const std::vector<TestFunction2>& fs, const FreeFieldModel& model, const EmbedOptions& opt = {});

// u(g) phi; boost shifts through the FFT and the periodic wrap is charged as leakage
cvec poincare_act(const PoincareElement& g, const cvec& phi, const FreeFieldModel& model, double leakage_budget = 1e-6,
                  double* leaked = nullptr);
cvec boost_shift(const cvec& phi, double lambda, const FreeFieldModel& model);
cvec translation_phase(Point2 a, const FreeFieldModel& model);

double covariance_residual(const TestFunction2& f, const PoincareElement& g, const FreeFieldModel& model,
                           const EmbedOptions& opt = {});

RealSubspace local_subspace(const Region2& o, const std::vector<TestFunction2>& dictionary,
                            const FreeFieldModel& model, const EmbedOptions& opt = {});

double locality_pairing(const TestFunction2& f, const TestFunction2& g, const FreeFieldModel& model,
                        const EmbedOptions& opt = {});

struct HalfShift {
    cvec values;
    double tail_mass = 0.0;                // input mass cut on the amplified side
    double log10_amplified_tail = -1e300;  // log10 of what the cut mass would have become
    bool in_domain = true;
};

// e^{-direction pi w}, i.e. theta -> theta + direction i pi, with the spectral cutoff
HalfShift wedge_modular_half(const cvec& phi, const FreeFieldModel& model, int direction,
                             double tail_threshold = 1e-8);

// projection onto |w| <= cutoff
cvec band_project(const cvec& phi, const FreeFieldModel& model);
double band_fraction(const cvec& phi, const FreeFieldModel& model);

// s_W for the right wedge at the origin: conj of the half shift
cvec right_wedge_tomita(const cvec& phi, const FreeFieldModel& model, HalfShift* diag = nullptr);

struct BwResult {
    double residual = 0.0;
    double tail_mass = 0.0;
    double log10_amplified_tail = 0.0;
    double band_fraction = 1.0;
    double quadrature_error = 0.0;
};

// throws DomainViolation when Ef is outside the domain of the half shift
BwResult bw_residual(const TestFunction2& f, const FreeFieldModel& model, const EmbedOptions& opt = {});
// same diagnostics without throwing
BwResult bw_diagnostics(const cvec& phi, const FreeFieldModel& model);

struct BorchersReport {
    double boost_deviation = 0.0;       // max over probes
    double conjugation_deviation = 0.0;
    int probes = 0;
};

// lightlike translation a = (alpha, alpha) on the right wedge's boundary
cvec lightlike_phase(double alpha, const FreeFieldModel& model);
cvec gaussian_probe(const FreeFieldModel& model, double center, double sigma);
BorchersReport borchers_check(double alpha, double t, const std::vector<cvec>& probes, const FreeFieldModel& model);

std::string one_particle_csv(const cvec& phi, const FreeFieldModel& model);
void write_csv(const std::string& path, const cvec& phi, const FreeFieldModel& model);

}  // namespace modloc
