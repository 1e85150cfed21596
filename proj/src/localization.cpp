#include "modloc/localization.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace modloc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

rmat realified_columns(const PoincareRep2& rep, const std::vector<cvec>& xs) {
    rmat out(2 * rep.size(), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = rep.realified(xs[i]);
    return out;
}

RealSubspace span_in(const PoincareRep2& rep, const std::vector<cvec>& xs) {
    return RealSubspace(rep.size(), orthonormalize(realified_columns(rep, xs)));
}

std::vector<cvec> basis_vectors(const PoincareRep2& rep, const RealSubspace& k) {
    std::vector<cvec> out;
    for (int i = 0; i < k.real_dim(); ++i) out.push_back(rep.from_realified(k.basis.col(i)));
    return out;
}

rmat defect_matrix(const WedgeTomita& s, const PoincareRep2& rep, const rmat& q) {
    rmat m(q.rows(), q.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) m.col(c) = rep.realified(s.defect(rep.from_realified(q.col(c))));
    return m;
}

double largest_singular_value(const rmat& m) {
    if (m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<rmat> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------- representation

PoincareRep2::PoincareRep2(std::vector<FreeFieldModel> summands) : models_(std::move(summands)) {
    if (models_.empty()) throw UsageError("representation needs at least one summand");
    for (const auto& m : models_)
        if (m.size() != models_.front().size() || m.grid().theta_max != models_.front().grid().theta_max ||
            m.amplification_cap() != models_.front().amplification_cap())
            throw UsageError("direct sum summands must share the rapidity grid");
}

PoincareRep2 PoincareRep2::scalar(double mass, double theta_max, int n_points) {
    return PoincareRep2({FreeFieldModel(mass, theta_max, n_points)});
}

cvec PoincareRep2::block(const cvec& x, int i) const {
    if (x.size() != size()) throw UsageError("representation: vector of wrong size");
    return x.segment(static_cast<Eigen::Index>(i) * block_size(), block_size());
}

cvec PoincareRep2::with_block(const cvec& b, int i) const {
    if (b.size() != block_size()) throw UsageError("representation: block of wrong size");
    cvec out = cvec::Zero(size());
    out.segment(static_cast<Eigen::Index>(i) * block_size(), block_size()) = b;
    return out;
}

cvec PoincareRep2::act(const PoincareElement& g, const cvec& x) const {
    cvec out(size());
    for (int i = 0; i < summands(); ++i)
        out.segment(static_cast<Eigen::Index>(i) * block_size(), block_size()) = poincare_act(g, block(x, i), summand(i));
    return out;
}

cvec PoincareRep2::embed(const TestFunction2& f, int i, const EmbedOptions& opt) const {
    return with_block(modloc::embed(f, summand(i), opt).values, i);
}

rvec PoincareRep2::realified(const cvec& x) const { return std::sqrt(models_.front().h()) * realify(x); }

cvec PoincareRep2::from_realified(const rvec& x) const { return complexify(x) / std::sqrt(models_.front().h()); }

double PoincareRep2::norm(const cvec& x) const { return std::sqrt(models_.front().h()) * x.norm(); }

cplx PoincareRep2::inner(const cvec& x, const cvec& y) const { return models_.front().h() * x.dot(y); }

// ---------------------------------------------------------------- wedge Tomita operator

WedgeTomita::WedgeTomita(const PoincareRep2& rep, const Region2& wedge) : rep_(&rep), wedge_(wedge) {
    if (wedge.kind == RegionKind::RightWedge)
        direction_ = -1;
    else if (wedge.kind == RegionKind::LeftWedge)
        direction_ = 1;
    else
        throw UsageError("wedge Tomita operator needs a wedge, got " + wedge.describe());
}

WedgeTomita wedge_tomita(const PoincareRep2& rep, const Region2& wedge) { return WedgeTomita(rep, wedge); }

namespace {

// applies op to u(a)^{-1} x_b in every block and transports the result back
template <class Op>
cvec transported(const PoincareRep2& rep, Point2 apex, const cvec& x, Op op) {
    const bool moved = apex.x0 != 0.0 || apex.x1 != 0.0;
    cvec out(rep.size());
    for (int b = 0; b < rep.summands(); ++b) {
        const FreeFieldModel& m = rep.summand(b);
        const cvec phase = moved ? translation_phase(apex, m) : cvec();
        cvec y = rep.block(x, b);
        if (moved) y = y.cwiseProduct(phase.conjugate());
        y = op(y, m);
        if (moved) y = y.cwiseProduct(phase);
        out.segment(static_cast<Eigen::Index>(b) * rep.block_size(), rep.block_size()) = y;
    }
    return out;
}

}  // namespace

cvec WedgeTomita::band_project(const cvec& x) const {
    return transported(*rep_, wedge_.apex, x, [](const cvec& y, const FreeFieldModel& m) { return modloc::band_project(y, m); });
}

ProbeDomain WedgeTomita::domain(const cvec& x) const {
    ProbeDomain d;
    d.log10_amplified_tail = -std::numeric_limits<double>::infinity();
    transported(*rep_, wedge_.apex, x, [&](const cvec& y, const FreeFieldModel& m) {
        if (y.squaredNorm() == 0.0) return y;
        const HalfShift hs = wedge_modular_half(y, m, direction_);
        d.tail_mass = std::max(d.tail_mass, hs.tail_mass);
        d.log10_amplified_tail = std::max(d.log10_amplified_tail, hs.log10_amplified_tail);
        d.in_domain = d.in_domain && hs.in_domain;
        return y;
    });
    return d;
}

cvec WedgeTomita::apply(const cvec& x, ProbeDomain* diag) const {
    if (diag) *diag = domain(x);
    const int dir = direction_;
    return transported(*rep_, wedge_.apex, x, [dir](const cvec& y, const FreeFieldModel& m) {
        return cvec(wedge_modular_half(modloc::band_project(y, m), m, dir).values.conjugate());
    });
}

cvec WedgeTomita::defect(const cvec& x) const { return apply(x) - band_project(x); }

cvec WedgeTomita::reflect(const cvec& x) const {
    return transported(*rep_, wedge_.apex, x, [](const cvec& y, const FreeFieldModel&) { return cvec(y.conjugate()); });
}

cvec WedgeTomita::modular_group(double t, const cvec& x) const {
    const double lambda = direction_ * two_pi * t;
    return transported(*rep_, wedge_.apex, x,
                       [lambda](const cvec& y, const FreeFieldModel& m) { return boost_shift(y, lambda, m); });
}

// ---------------------------------------------------------------- fixed points

std::vector<cvec> dictionary_vectors(const PoincareRep2& rep, const std::vector<TestFunction2>& dictionary,
                                     const EmbedOptions& opt) {
    std::vector<cvec> out;
    for (const auto& f : dictionary)
        for (int i = 0; i < rep.summands(); ++i) out.push_back(rep.embed(f, i, opt));
    return out;
}

RealSubspace localized_subspace(const PoincareRep2& rep, const Region2& wedge, const std::vector<cvec>& vectors,
                                const LocalizationOptions& opt, LocalizationReport* report) {
    if (vectors.empty()) throw UsageError("localized subspace: empty dictionary for " + wedge.describe());
    const WedgeTomita s(rep, wedge);
    LocalizationReport rep_out;
    std::vector<cvec> accepted;
    for (const auto& v : vectors) {
        rep_out.probes.push_back(s.domain(v));
        if (rep_out.probes.back().in_domain)
            accepted.push_back(v);
        else
            ++rep_out.rejected_probes;
    }
    if (accepted.empty())
        throw EmptyModelError("localized subspace: every probe is outside the domain of s for " + wedge.describe());

    const rmat q = orthonormalize(realified_columns(rep, accepted));
    const rmat m = defect_matrix(s, rep, q);
    Eigen::JacobiSVD<rmat> svd(m, Eigen::ComputeThinV);
    const rvec sv_desc = svd.singularValues();
    const Eigen::Index k = sv_desc.size();
    rep_out.singular_values = sv_desc.reverse();
    // FFT roundoff in every frequency bin is amplified by up to the cap, so below eps * cap
    // (or n eps) a defect on a unit vector is indistinguishable from an exact fixed point
    const double noise = std::numeric_limits<double>::epsilon() *
                         std::max(double(m.rows()), rep.summand(0).amplification_cap());
    rep_out.threshold = std::max(opt.tol, noise);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < k; ++i)
        if (sv_desc(i) <= rep_out.threshold) keep.push_back(i);
    rmat basis(q.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        basis.col(static_cast<Eigen::Index>(i)) = q * svd.matrixV().col(keep[i]);
    rep_out.max_fixed_defect = keep.empty() ? 0.0 : sv_desc(keep.front());

    const bool has_rejected = static_cast<Eigen::Index>(keep.size()) < k;
    if (!keep.empty() && has_rejected) {
        const double last_kept = std::max(sv_desc(keep.front()), std::numeric_limits<double>::min());
        rep_out.gap = sv_desc(keep.front() - 1) / last_kept;
    }
    if (has_rejected && rep_out.gap < opt.gap_required) {
        // no clean gap: adjoin the exact fixed points (h + s h)/2 of the accepted probes
        std::vector<cvec> sym;
        for (const auto& v : accepted) {
            // symmetrize the band component only: P h becomes (P v + s P v)/2
            const cvec h = v + 0.5 * s.defect(v);
            // probes that are mostly anti-fixed symmetrize to nothing
            if (s.band_project(h).norm() > 0.1 * s.band_project(v).norm()) sym.push_back(h);
        }
        if (sym.empty()) sym.push_back(cvec::Zero(rep.size()));
        rmat cols = realified_columns(rep, sym);
        for (Eigen::Index c = 0; c < cols.cols(); ++c)
            if (cols.col(c).norm() > 0.0) cols.col(c).normalize();
        Eigen::JacobiSVD<rmat> cs(cols);
        const rvec csv = cs.singularValues();
        rep_out.symmetrization_condition = csv(csv.size() - 1) > 0.0 ? csv(0) / csv(csv.size() - 1)
                                                                     : std::numeric_limits<double>::infinity();
        rmat joined(q.rows(), basis.cols() + cols.cols());
        joined << basis, cols;
        basis = orthonormalize(joined, std::max(opt.tol, 1e-10));
        rep_out.symmetrized = true;
    }
    if (report) *report = std::move(rep_out);
    return RealSubspace(rep.size(), basis);
}

RealSubspace localized_subspace(const PoincareRep2& rep, const Region2& wedge,
                                const std::vector<TestFunction2>& dictionary, const LocalizationOptions& opt,
                                LocalizationReport* report) {
    if (dictionary.empty()) throw UsageError("localized subspace: empty dictionary for " + wedge.describe());
    return localized_subspace(rep, wedge, dictionary_vectors(rep, dictionary, opt.embed), opt, report);
}

double fixed_point_defect(const WedgeTomita& s, const PoincareRep2& rep, const RealSubspace& k) {
    return largest_singular_value(defect_matrix(s, rep, k.basis));
}

// ---------------------------------------------------------------- net

LocalizedNet::LocalizedNet(const PoincareRep2& rep, LocalizationOptions opt) : rep_(&rep), opt_(std::move(opt)) {}

const NetEntry& LocalizedNet::add_wedge(const Region2& wedge, std::vector<TestFunction2> dictionary) {
    NetEntry e{wedge, std::move(dictionary), {}, {}};
    e.space = localized_subspace(*rep_, wedge, e.dictionary, opt_, &e.report);
    return entries_.insert_or_assign(wedge.describe(), std::move(e)).first->second;
}

bool LocalizedNet::has(const Region2& region) const { return entries_.count(region.describe()) > 0; }

const NetEntry& LocalizedNet::at(const Region2& region) const {
    auto it = entries_.find(region.describe());
    if (it == entries_.end()) throw UsageError("net has no model for " + region.describe());
    return it->second;
}

bool wedge_contains(const Region2& big, const Region2& small) {
    if (big.kind != small.kind) return false;
    const Point2 y = small.apex - big.apex;
    if (big.kind == RegionKind::RightWedge) return y.x1 >= std::abs(y.x0);
    if (big.kind == RegionKind::LeftWedge) return -y.x1 >= std::abs(y.x0);
    return false;
}

std::vector<TestFunction2> wedge_dictionary(const Region2& wedge, const std::vector<Point2>& offsets, double radius,
                                            const Region2& declared) {
    if (wedge.kind != RegionKind::RightWedge && wedge.kind != RegionKind::LeftWedge)
        throw UsageError("wedge_dictionary: " + wedge.describe() + " is not a wedge");
    std::vector<TestFunction2> d;
    for (const auto& o : offsets)
        d.emplace_back(wedge.kind == RegionKind::RightWedge ? wedge.apex + o : wedge.apex - o, radius, declared);
    return d;
}

std::vector<TestFunction2> matched_dictionary(const Region2& w, const std::vector<Region2>& family,
                                              const std::vector<Point2>& offsets, double radius) {
    std::vector<TestFunction2> d;
    for (const auto& v : family)
        if (wedge_contains(w, v))
            for (auto& f : wedge_dictionary(v, offsets, radius, w)) d.push_back(std::move(f));
    return d;
}

double NetReport::max(const std::string& check) const {
    double out = 0.0;
    for (const auto& r : rows)
        if (r.check == check) out = std::max(out, r.value);
    return out;
}

int NetReport::count(const std::string& check) const {
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](const NetResidual& r) { return r.check == check; }));
}

RealSubspace complement_within(const RealSubspace& k, const RealSubspace& joint, double rel_tol) {
    if (k.dim != joint.dim) throw UsageError("complement_within: dimension mismatch");
    if (k.real_dim() == 0) return joint;
    // Im<x, k> = Re<i x, k>: constraints k^T (i Q) c = 0
    const rmat a = k.basis.transpose() * times_i(joint.basis);
    Eigen::JacobiSVD<rmat> svd(a, Eigen::ComputeFullV);
    const rvec sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * smax) ++rank;
    const rmat null = svd.matrixV().rightCols(joint.real_dim() - rank);
    return RealSubspace(joint.dim, orthonormalize(joint.basis * null));
}

namespace {

std::string describe(const PoincareElement& g) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "g(rapidity=%g,a=(%g,%g)%s)", g.rapidity, g.translation.x0, g.translation.x1,
                  g.reflect ? ",reflect" : "");
    return buf;
}

}  // namespace

NetReport net_checks(const LocalizedNet& net, const NetCheckOptions& opt) {
    const PoincareRep2& rep = net.rep();
    NetReport out;
    const auto& entries = net.entries();

    for (const auto& [ka, a] : entries)
        for (const auto& [kb, b] : entries)
            if (wedge_contains(b.region, a.region))
                out.rows.push_back({"isotony", ka + " in " + kb, inclusion_defect(a.space, b.space)});

    for (const auto& [ka, a] : entries) {
        // K(W') from the dictionary reflected about the apex of W, so both sides use matched dictionaries
        const PoincareElement r{0.0, {2.0 * a.region.apex.x0, 2.0 * a.region.apex.x1}, true};
        const Region2 prime = a.region.causal_complement();
        std::vector<TestFunction2> mirrored;
        for (const auto& f : a.dictionary) mirrored.push_back(f.transformed(r));
        const RealSubspace kp = localized_subspace(rep, prime, mirrored, net.options());
        const RealSubspace joint = sum(a.space, kp);
        const RealSubspace comp = complement_within(a.space, joint, opt.symplectic_tol);
        out.rows.push_back({"duality", ka + " vs " + prime.describe(), projection_distance(comp, kp)});

        const WedgeTomita s(rep, a.region);
        std::vector<cvec> reflected;
        for (const auto& v : basis_vectors(rep, a.space)) reflected.push_back(s.reflect(v));
        out.rows.push_back({"reflection", ka + " vs " + prime.describe(), projection_distance(span_in(rep, reflected), kp)});
    }

    for (const auto& g : opt.covariance)
        for (const auto& [ka, a] : entries) {
            const Region2 ga = a.region.transformed(g);
            if (!net.has(ga)) continue;
            std::vector<TestFunction2> moved;
            for (const auto& f : a.dictionary) moved.push_back(f.transformed(g));
            const RealSubspace target = localized_subspace(rep, ga, moved, net.options());
            std::vector<cvec> acted;
            for (const auto& v : basis_vectors(rep, a.space)) acted.push_back(rep.act(g, v));
            out.rows.push_back({"covariance", describe(g) + " " + ka, projection_distance(span_in(rep, acted), target)});
        }

    for (double t : opt.boost_times)
        for (const auto& [ka, a] : entries) {
            const WedgeTomita s(rep, a.region);
            std::vector<cvec> boosted;
            for (const auto& v : basis_vectors(rep, a.space)) boosted.push_back(s.modular_group(t, v));
            char buf[64];
            std::snprintf(buf, sizeof buf, " t=%g", t);
            out.rows.push_back({"boost", ka + buf, fixed_point_defect(s, rep, span_in(rep, boosted))});
        }

    for (const auto& [ka, a] : entries) {
        // weak standardness: the model meets i times itself only in 0
        const rvec angles = principal_angles(a.space, times_i(a.space));
        const double smallest = angles.size() ? angles(0) : std::numbers::pi / 2;
        out.rows.push_back({"separating_angle", ka, smallest});
    }
    return out;
}

// ---------------------------------------------------------------- double cones

DoubleConeResult intersect_wedges(const LocalizedNet& net, const Region2& w1, const Region2& w2,
                                  const std::vector<cvec>& probes, double tol) {
    const RealSubspace& k1 = net.at(w1).space;
    const RealSubspace& k2 = net.at(w2).space;
    DoubleConeResult out;
    out.space = intersection(k1, k2, tol);
    out.real_dim = out.space.real_dim();
    for (const auto& p : probes) {
        const rvec x = net.rep().realified(p);
        const double n = x.norm();
        if (n == 0.0) continue;
        out.max_residual = std::max(out.max_residual, (x - out.space.project(x)).norm() / n);
    }
    if (out.real_dim == 0) {
        out.warning = true;
        out.note = "empty intersection of " + w1.describe() + " and " + w2.describe();
    }
    return out;
}

DoubleConeResult doublecone_space(const LocalizedNet& net, const Region2& cone,
                                  const std::vector<TestFunction2>& cone_dictionary, double tol) {
    if (cone.kind != RegionKind::DoubleCone) throw UsageError("doublecone_space needs a double cone");
    const Point2 up{0.0, cone.radius};
    const Region2 right = Region2::right_wedge(cone.apex - up), left = Region2::left_wedge(cone.apex + up);
    if (!net.has(right) || !net.has(left))
        throw UsageError("doublecone_space: the net lacks " + (net.has(right) ? left : right).describe());
    for (const auto& f : cone_dictionary)
        if (!cone.contains_disc(f.support_center(), f.support_radius()))
            throw UsageError("doublecone_space: dictionary function not supported in " + cone.describe());
    return intersect_wedges(net, right, left, dictionary_vectors(net.rep(), cone_dictionary, net.options().embed), tol);
}

// ---------------------------------------------------------------- export

std::string dictionary_hash(const std::vector<TestFunction2>& dictionary) {
    // FNV-1a over a canonical text rendering
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& f : dictionary) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d;", f.center.x0, f.center.x1,
                      f.radius, f.amplitude, f.transform.rapidity, f.transform.translation.x0,
                      f.transform.translation.x1, f.transform.reflect ? 1 : 0);
        for (const char* c = buf; *c; ++c) {
            h ^= static_cast<unsigned char>(*c);
            h *= 1099511628211ull;
        }
    }
    char out[32];
    std::snprintf(out, sizeof out, "%016" PRIx64, h);
    return out;
}

std::string net_json(const LocalizedNet& net, const NetReport& report) {
    using nlohmann::ordered_json;
    ordered_json doc;
    ordered_json wedges = ordered_json::array();
    for (const auto& [key, e] : net.entries()) {
        ordered_json w;
        w["region"] = key;
        w["dictionary_hash"] = dictionary_hash(e.dictionary);
        w["dictionary_size"] = e.dictionary.size();
        w["real_dim"] = e.space.real_dim();
        w["threshold"] = e.report.threshold;
        w["max_fixed_defect"] = e.report.max_fixed_defect;
        w["rejected_probes"] = e.report.rejected_probes;
        w["symmetrized"] = e.report.symmetrized;
        std::vector<double> sv(e.report.singular_values.data(),
                               e.report.singular_values.data() + e.report.singular_values.size());
        w["singular_values"] = sv;
        wedges.push_back(std::move(w));
    }
    doc["wedges"] = std::move(wedges);
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json row;
        row["check"] = r.check;
        row["subject"] = r.subject;
        row["value"] = r.value;
        rows.push_back(std::move(row));
    }
    doc["residuals"] = std::move(rows);
    return doc.dump(2);
}

}  // namespace modloc
