#pragma once

#include <map>
#include <string>
#include <vector>

#include "modloc/freefield.hpp"

namespace modloc {

struct EmptyModelError : DomainError {
    using DomainError::DomainError;
};

// finite direct sum of scalar models sharing one rapidity grid; vectors are stacked blocks
class PoincareRep2 {
public:
    explicit PoincareRep2(std::vector<FreeFieldModel> summands);
    static PoincareRep2 scalar(double mass, double theta_max, int n_points);

    int summands() const { return static_cast<int>(models_.size()); }
    const FreeFieldModel& summand(int i) const { return models_.at(static_cast<std::size_t>(i)); }
    int block_size() const { return models_.front().size(); }
    int size() const { return block_size() * summands(); }

    cvec block(const cvec& x, int i) const;
    cvec with_block(const cvec& block, int i) const;  // zero elsewhere
    cvec act(const PoincareElement& g, const cvec& x) const;
    cvec embed(const TestFunction2& f, int summand, const EmbedOptions& opt = {}) const;

    rvec realified(const cvec& x) const;
    cvec from_realified(const rvec& x) const;
    double norm(const cvec& x) const;
    cplx inner(const cvec& x, const cvec& y) const;

private:
    std::vector<FreeFieldModel> models_;
};

struct ProbeDomain {
    double tail_mass = 0.0;
    double log10_amplified_tail = 0.0;
    bool in_domain = true;
};

// s_W = j_W delta_W^{1/2} for a left or right wedge with arbitrary apex a, transported from the
// origin wedge: s_{W_a} = u(a) s_W u(a)^{-1}. Acts on the band |w| <= cutoff of u(a)^{-1} x.
class WedgeTomita {
public:
    WedgeTomita(const PoincareRep2& rep, const Region2& wedge);

    const Region2& wedge() const { return wedge_; }
    int direction() const { return direction_; }

    cvec band_project(const cvec& x) const;
    // s_W applied to band_project(x)
    cvec apply(const cvec& x, ProbeDomain* diag = nullptr) const;
    // s_W P x - P x
    cvec defect(const cvec& x) const;
    ProbeDomain domain(const cvec& x) const;
    // j_W = u(reflection about the apex)
    cvec reflect(const cvec& x) const;
    // delta_W^{it} = u(Lambda_W(t)), the boost fixing W with rapidity -+2 pi t
    cvec modular_group(double t, const cvec& x) const;

private:
    const PoincareRep2* rep_;
    Region2 wedge_;
    int direction_;
};

WedgeTomita wedge_tomita(const PoincareRep2& rep, const Region2& wedge);

struct LocalizationReport {
    std::vector<ProbeDomain> probes;  // one per dictionary vector
    int rejected_probes = 0;
    rvec singular_values;             // of the defect on the orthonormal span, ascending
    double threshold = 0.0;
    double gap = 0.0;                 // first rejected over last kept singular value
    bool symmetrized = false;
    double symmetrization_condition = 0.0;
    double max_fixed_defect = 0.0;    // largest relative defect of a kept direction
};

struct LocalizationOptions {
    double tol = 1e-2;          // singular-value threshold on unit vectors
    double gap_required = 10.0; // below this the symmetrization fallback is used
    EmbedOptions embed;
};

// every embedding of every dictionary function into every summand
std::vector<cvec> dictionary_vectors(const PoincareRep2& rep, const std::vector<TestFunction2>& dictionary,
                                     const EmbedOptions& opt = {});

RealSubspace localized_subspace(const PoincareRep2& rep, const Region2& wedge, const std::vector<cvec>& vectors,
                                const LocalizationOptions& opt = {}, LocalizationReport* report = nullptr);
RealSubspace localized_subspace(const PoincareRep2& rep, const Region2& wedge,
                                const std::vector<TestFunction2>& dictionary, const LocalizationOptions& opt = {},
                                LocalizationReport* report = nullptr);

// largest relative fixed-point defect ||s_W P x - P x|| / ||P x|| over unit vectors of k
double fixed_point_defect(const WedgeTomita& s, const PoincareRep2& rep, const RealSubspace& k);

struct NetEntry {
    Region2 region;
    std::vector<TestFunction2> dictionary;
    RealSubspace space;
    LocalizationReport report;
};

class LocalizedNet {
public:
    LocalizedNet(const PoincareRep2& rep, LocalizationOptions opt = {});

    const PoincareRep2& rep() const { return *rep_; }
    const LocalizationOptions& options() const { return opt_; }

    const NetEntry& add_wedge(const Region2& wedge, std::vector<TestFunction2> dictionary);
    bool has(const Region2& region) const;
    const NetEntry& at(const Region2& region) const;
    const std::map<std::string, NetEntry>& entries() const { return entries_; }

private:
    const PoincareRep2* rep_;
    LocalizationOptions opt_;
    std::map<std::string, NetEntry> entries_;
};

bool wedge_contains(const Region2& big, const Region2& small);

// bumps at apex + offset (right wedges) or apex - offset (left wedges), declared in `declared`
std::vector<TestFunction2> wedge_dictionary(const Region2& wedge, const std::vector<Point2>& offsets, double radius,
                                            const Region2& declared);
// union of the dictionaries of every family wedge contained in w, declared in w
std::vector<TestFunction2> matched_dictionary(const Region2& w, const std::vector<Region2>& family,
                                              const std::vector<Point2>& offsets, double radius);

struct NetResidual {
    std::string check;    // isotony, duality, reflection, covariance, boost, standardness
    std::string subject;  // the regions or group element involved
    double value = 0.0;
};

struct NetReport {
    std::vector<NetResidual> rows;
    double max(const std::string& check) const;
    int count(const std::string& check) const;
};

struct NetCheckOptions {
    std::vector<PoincareElement> covariance;  // group elements, transported dictionaries
    std::vector<double> boost_times{0.05};
    double symplectic_tol = 1e-8;  // relative rank threshold for the duality complement
};

NetReport net_checks(const LocalizedNet& net, const NetCheckOptions& opt = {});

// the symplectic complement of k inside span(joint), joint given by an orthonormal basis
RealSubspace complement_within(const RealSubspace& k, const RealSubspace& joint, double rel_tol = 1e-8);

struct DoubleConeResult {
    RealSubspace space;
    int real_dim = 0;
    double max_residual = 0.0;  // of the cone embeddings against the intersection, relative
    bool warning = false;       // empty intersection
    std::string note;
};

// intersection of the models of two wedges in the net
DoubleConeResult intersect_wedges(const LocalizedNet& net, const Region2& w1, const Region2& w2,
                                  const std::vector<cvec>& probes = {}, double tol = 1e-6);
// O = R(c - (0,r)) intersected with L(c + (0,r)); both wedges must be in the net
DoubleConeResult doublecone_space(const LocalizedNet& net, const Region2& cone,
                                  const std::vector<TestFunction2>& cone_dictionary, double tol = 1e-6);

// wedge descriptor, dictionary hash, dimension and residual rows
std::string net_json(const LocalizedNet& net, const NetReport& report);
std::string dictionary_hash(const std::vector<TestFunction2>& dictionary);

}  // namespace modloc
