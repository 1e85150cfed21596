#include "modloc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace modloc {

namespace {

// every field of the configuration, in document order; reader, writer and schema all walk this
template <class V, class C>
void visit_config(V& v, C& c) {
    v.field("kind", c.kind, "experiment kind: subspace, fock, freefield, modloc or all");
    v.field("seed", c.seed, "random seed for sampled subspaces and vectors");
    v.field("output_dir", c.output_dir, "directory for report.json and CSV plot data");
    v.section("subspace", [&] {
        auto& s = c.subspace;
        v.field("d_min", s.d_min, "smallest complex dimension of the random standard subspaces");
        v.field("d_max", s.d_max, "largest complex dimension");
        v.field("samples", s.samples, "number of random standard subspaces");
        v.field("max_condition", s.max_condition, "largest accepted condition number of delta; worse samples are redrawn");
        v.field("flow_times", s.flow_times, "t values for the modular flow invariance check");
        v.field("tol", s.tol, "threshold for the Tomita and modular-data residuals");
        v.field("fiber_tol", s.fiber_tol, "threshold for the fiber angles and the reassembly of (j, delta)");
    });
    v.section("fock", [&] {
        auto& f = c.fock;
        v.field("sym_max_n", f.sym_max_n, "largest tensor degree in the symmetrization check");
        v.field("sym_max_d", f.sym_max_d, "largest one-particle dimension in the symmetrization check");
        v.field("sym_instances", f.sym_instances, "random instances of the symmetrization check");
        v.field("sym_tol", f.sym_tol, "threshold for the polarization formula against the symmetrizer");
        v.field("coherent_cutoff", f.coherent_cutoff, "Fock cutoff N of the coherent-vector checks");
        v.field("coherent_max_d", f.coherent_max_d, "largest one-particle dimension of the coherent-vector checks");
        v.field("coherent_instances", f.coherent_instances, "random pairs per dimension");
        v.field("taylor_tol", f.taylor_tol, "threshold for <e^h, e^k> against the Taylor partial sum");
        v.field("gamma_tol", f.gamma_tol, "threshold for Gamma(a) e^h against e^{ah}");
        v.field("weyl_cutoffs", f.weyl_cutoffs, "increasing cutoffs for the Weyl truncation study");
        v.field("weyl_tol", f.weyl_tol, "threshold for closed-form Weyl action and CCR phase");
        v.field("fiber_theta", f.fiber_theta, "angle of the single-fiber standard subspace");
        v.field("modular_cutoff", f.modular_cutoff, "Fock cutoff of the second-quantized modular check");
        v.field("modular_samples", f.modular_samples, "sampled vectors of K and K'");
        v.field("modular_time", f.modular_time, "t in the conjugation by Gamma(delta^{it})");
        v.field("modular_tol", f.modular_tol, "threshold for the second-quantized modular residuals");
    });
    v.section("freefield", [&] {
        auto& f = c.freefield;
        v.field("mass", f.mass, "particle mass m > 0");
        v.field("grid", f.grid, "default rapidity grid {theta_max, n_points}");
        v.field("lattice_spacing", f.lattice_spacing, "spacetime lattice spacing for boosted test functions");
        v.field("bw_grid", f.bw_grid, "rapidity grid of the modular half-shift checks");
        v.field("ladder", f.ladder,
                "refinement ladder as n_points of the default grid; every grid is scaled by n / grid.n_points "
                "with theta_max raised by log2 of that ratio");
        v.field("spacelike_pair", f.spacelike_pair, "two bumps at spacelike separation");
        v.field("timelike_pair", f.timelike_pair, "two bumps at timelike separation");
        v.field("spacelike_tol", f.spacelike_tol, "upper bound for |Im<Ef,Eg>| at spacelike separation");
        v.field("timelike_min", f.timelike_min, "lower bound for |Im<Ef,Eg>| at timelike separation");
        v.field("stability_tol", f.stability_tol, "relative change allowed under one refinement step");
        v.field("covariance_bump", f.covariance_bump, "test function of the covariance checks");
        v.field("translation", f.translation, "translation (x0, x1) of the covariance check");
        v.field("boost", f.boost, "boost rapidity of the covariance check");
        v.field("translation_tol", f.translation_tol, "threshold for the translation covariance residual");
        v.field("boost_tol", f.boost_tol, "threshold for the boost covariance residual at the first rung");
        v.field("right_bumps", f.right_bumps, "right-wedge bumps for the modular fixed-point residual");
        v.field("left_bumps", f.left_bumps, "left-wedge bumps expected to violate the half-shift domain");
        v.field("bw_tol", f.bw_tol, "threshold for the fixed-point residual of right-wedge bumps");
        v.field("tail_growth_min", f.tail_growth_min, "decades of amplified-tail growth required per rung");
        v.field("monotone_slack", f.monotone_slack, "relative increase tolerated between ladder rungs");
        v.section("borchers", [&] {
            auto& b = f.borchers;
            v.field("alpha", b.alpha, "lightlike translation magnitude");
            v.field("times", b.times, "modular times t");
            v.field("probe_centers", b.probe_centers, "rapidity centers of the Gaussian probes");
            v.field("probe_sigma", b.probe_sigma, "width of the Gaussian probes");
            v.field("grid", b.grid, "rapidity grid {theta_max, n_points}");
            v.field("tol", b.tol, "threshold for both commutation identities");
        });
    });
    v.section("modloc", [&] {
        auto& m = c.modloc;
        v.field("masses", m.masses, "masses of the summands of the representation");
        v.field("grid", m.grid, "common rapidity grid {theta_max, n_points}");
        v.field("wedges", m.wedges, "wedge family, each {kind: right|left, apex: [x0, x1]}");
        v.field("offsets", m.offsets,
                "dictionary: bump centers relative to the apex (added for right, subtracted for left wedges)");
        v.field("bump_radius", m.bump_radius, "radius of the dictionary bumps");
        v.field("tol", m.tol, "singular-value threshold of the fixed-point extraction");
        v.field("gap_required", m.gap_required, "spectral gap below which the symmetrization fallback is used");
        v.field("covariance_translations", m.covariance_translations, "translations for the covariance rows");
        v.field("boost_times", m.boost_times, "modular times for the boost invariance rows");
        v.field("net_tol", m.net_tol, "threshold for isotony, duality, reflection and covariance");
        v.field("double_cone", m.double_cone, "double cone {center, radius}");
        v.field("cone_dictionary", m.cone_dictionary, "bumps supported in the double cone");
        v.field("doublecone_tol", m.doublecone_tol, "threshold for cone embeddings against the intersection");
        v.field("direct_sum_masses", m.direct_sum_masses, "masses of the direct-sum representation");
        v.field("direct_sum_tol", m.direct_sum_tol, "threshold for the block projections of the direct sum");
    });
}

std::string join(const std::vector<std::string>& path, const std::string& key) {
    std::string out;
    for (const auto& p : path) out += p + ".";
    return out + key;
}

// ---------------------------------------------------------------- values

template <class T>
struct TypeName;
template <> struct TypeName<std::string> { static constexpr const char* value = "string"; };
template <> struct TypeName<int> { static constexpr const char* value = "integer"; };
template <> struct TypeName<unsigned long long> { static constexpr const char* value = "non-negative integer"; };
template <> struct TypeName<double> { static constexpr const char* value = "number"; };
template <> struct TypeName<Point2> { static constexpr const char* value = "point [x0, x1]"; };
template <> struct TypeName<GridSpec> { static constexpr const char* value = "grid {theta_max, n_points}"; };
template <> struct TypeName<BumpSpec> { static constexpr const char* value = "bump {center: [x0, x1], radius}"; };
template <> struct TypeName<WedgeSpec> { static constexpr const char* value = "wedge {kind, apex: [x0, x1]}"; };
template <class T>
struct TypeName<std::vector<T>> {
    static inline const std::string value = std::string("list of ") + TypeName<T>::value;
};

template <class T>
T scalar(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, std::string("expected ") + TypeName<T>::value);
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, std::string("expected ") + TypeName<T>::value + ", got '" + n.Scalar() + "'");
    }
}

void read_value(const YAML::Node& n, const std::string& path, std::string& out) { out = scalar<std::string>(n, path); }
void read_value(const YAML::Node& n, const std::string& path, int& out) { out = scalar<int>(n, path); }
void read_value(const YAML::Node& n, const std::string& path, double& out) { out = scalar<double>(n, path); }
void read_value(const YAML::Node& n, const std::string& path, unsigned long long& out) {
    if (n.IsScalar() && !n.Scalar().empty() && n.Scalar()[0] == '-') throw ConfigError(path, "expected non-negative integer");
    out = scalar<unsigned long long>(n, path);
}

void read_value(const YAML::Node& n, const std::string& path, Point2& out) {
    if (!n.IsSequence() || n.size() != 2) throw ConfigError(path, "expected point [x0, x1]");
    out = {scalar<double>(n[0], path + "[0]"), scalar<double>(n[1], path + "[1]")};
}

// strict map reader for small composite values
class MapReader {
public:
    MapReader(const YAML::Node& n, std::string path, const char* what) : node_(n), path_(std::move(path)) {
        if (!n.IsMap()) throw ConfigError(path_, std::string("expected ") + what);
    }
    template <class T>
    void required(const std::string& key, T& out) {
        seen_.insert(key);
        const YAML::Node& cn = node_;
        const YAML::Node v = cn[key];
        if (!v) throw ConfigError(path_ + "." + key, "missing");
        read_value(v, path_ + "." + key, out);
    }
    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key, "unknown key");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_value(const YAML::Node& n, const std::string& path, GridSpec& out) {
    MapReader r(n, path, TypeName<GridSpec>::value);
    r.required("theta_max", out.theta_max);
    r.required("n_points", out.n_points);
    r.finish();
}

void read_value(const YAML::Node& n, const std::string& path, BumpSpec& out) {
    MapReader r(n, path, TypeName<BumpSpec>::value);
    r.required("center", out.center);
    r.required("radius", out.radius);
    r.finish();
}

void read_value(const YAML::Node& n, const std::string& path, WedgeSpec& out) {
    MapReader r(n, path, TypeName<WedgeSpec>::value);
    r.required("kind", out.kind);
    r.required("apex", out.apex);
    r.finish();
}

template <class T>
void read_value(const YAML::Node& n, const std::string& path, std::vector<T>& out) {
    if (!n.IsSequence()) throw ConfigError(path, "expected " + std::string(TypeName<std::vector<T>>::value));
    out.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
        T v{};
        read_value(n[i], path + "[" + std::to_string(i) + "]", v);
        out.push_back(v);
    }
}

// shortest representation that reads back to the same double
std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

void write_value(YAML::Emitter& e, const std::string& x) { e << YAML::DoubleQuoted << x; }
void write_value(YAML::Emitter& e, int x) { e << x; }
void write_value(YAML::Emitter& e, unsigned long long x) { e << x; }
void write_value(YAML::Emitter& e, double x) { e << format_double(x); }
void write_value(YAML::Emitter& e, const Point2& p) {
    e << YAML::Flow << YAML::BeginSeq << format_double(p.x0) << format_double(p.x1) << YAML::EndSeq;
}
void write_value(YAML::Emitter& e, const GridSpec& g) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "theta_max" << YAML::Value << format_double(g.theta_max)
      << YAML::Key << "n_points" << YAML::Value << g.n_points << YAML::EndMap;
}
void write_value(YAML::Emitter& e, const BumpSpec& b) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "center" << YAML::Value;
    write_value(e, b.center);
    e << YAML::Key << "radius" << YAML::Value << format_double(b.radius) << YAML::EndMap;
}
void write_value(YAML::Emitter& e, const WedgeSpec& w) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << w.kind << YAML::Key << "apex"
      << YAML::Value;
    write_value(e, w.apex);
    e << YAML::EndMap;
}
template <class T>
void write_value(YAML::Emitter& e, const std::vector<T>& xs) {
    constexpr bool nested = std::is_same_v<T, BumpSpec> || std::is_same_v<T, WedgeSpec>;
    if (!nested) e << YAML::Flow;
    e << YAML::BeginSeq;
    for (const auto& x : xs) write_value(e, x);
    e << YAML::EndSeq;
}

// ---------------------------------------------------------------- visitors

class Reader {
public:
    explicit Reader(YAML::Node root) { stack_.push_back({std::move(root), {}}); }

    template <class T>
    void field(const std::string& key, T& out) {
        auto& top = stack_.back();
        top.seen.insert(key);
        if (!top.node.IsMap()) return;
        const YAML::Node& cn = top.node;
        const YAML::Node v = cn[key];
        if (!v || v.IsNull()) return;  // absent: the documented default stays
        read_value(v, join(path_, key), out);
    }
    template <class T>
    void field(const std::string& key, T& out, const char*) {
        field(key, out);
    }

    void section(const std::string& key, const std::function<void()>& body) {
        auto& top = stack_.back();
        top.seen.insert(key);
        YAML::Node child;
        if (top.node.IsMap()) {
            const YAML::Node& cn = top.node;
            const YAML::Node v = cn[key];
            if (v && !v.IsNull()) {
                if (!v.IsMap()) throw ConfigError(join(path_, key), "expected a section (mapping)");
                child = v;
            }
        }
        path_.push_back(key);
        stack_.push_back({child, {}});
        body();
        finish();
        stack_.pop_back();
        path_.pop_back();
    }

    void finish() {
        const auto& top = stack_.back();
        if (!top.node.IsMap()) return;
        for (const auto& kv : top.node) {
            const auto key = kv.first.as<std::string>();
            if (!top.seen.count(key)) throw ConfigError(join(path_, key), "unknown key");
        }
    }

private:
    struct Frame {
        YAML::Node node;
        std::set<std::string> seen;
    };
    std::vector<Frame> stack_;
    std::vector<std::string> path_;
};

class Writer {
public:
    explicit Writer(YAML::Emitter& e) : e_(e) {}
    template <class T>
    void field(const std::string& key, const T& x, const char* doc) {
        (void)doc;
        e_ << YAML::Key << key << YAML::Value;
        write_value(e_, x);
    }
    void section(const std::string& key, const std::function<void()>& body) {
        e_ << YAML::Key << key << YAML::Value << YAML::BeginMap;
        body();
        e_ << YAML::EndMap;
    }

private:
    YAML::Emitter& e_;
};

class SchemaCollector {
public:
    std::vector<SchemaField> fields;
    template <class T>
    void field(const std::string& key, const T&, const char* doc) {
        fields.push_back({join(path_, key), TypeName<T>::value, doc});
    }
    void section(const std::string& key, const std::function<void()>& body) {
        path_.push_back(key);
        body();
        path_.pop_back();
    }

private:
    std::vector<std::string> path_;
};

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

void check_grid(const GridSpec& g, const std::string& path) {
    require(g.theta_max >= 4.0, path + ".theta_max", "must be at least 4");
    require(power_of_two(g.n_points) && g.n_points >= 16, path + ".n_points", "must be a power of two >= 16");
}

void check_bumps(const std::vector<BumpSpec>& bs, const std::string& path, std::size_t min_size) {
    require(bs.size() >= min_size, path,
            bs.empty() ? "empty dictionary" : "needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < bs.size(); ++i)
        require(bs[i].radius > 0, path + "[" + std::to_string(i) + "].radius", "must be positive");
}

void check_positive(double x, const std::string& path) { require(x > 0, path, "must be positive"); }

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
    }
    if (root && !root.IsNull() && !root.IsMap()) throw ConfigError("<document>", "expected a mapping at top level");
    ExperimentConfig cfg;
    Reader r(root && !root.IsNull() ? root : YAML::Node());
    visit_config(r, cfg);
    r.finish();
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("<file>", "cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
    static const std::set<std::string> kinds{"subspace", "fock", "freefield", "modloc", "all"};
    require(kinds.count(c.kind) > 0, "kind", "must be one of subspace, fock, freefield, modloc, all");
    require(!c.output_dir.empty(), "output_dir", "must not be empty");

    const auto& s = c.subspace;
    require(s.d_min >= 1, "subspace.d_min", "must be at least 1");
    require(s.d_max >= s.d_min, "subspace.d_max", "must be at least d_min");
    require(s.samples >= 1, "subspace.samples", "must be at least 1");
    require(!s.flow_times.empty(), "subspace.flow_times", "must not be empty");
    check_positive(s.tol, "subspace.tol");
    check_positive(s.fiber_tol, "subspace.fiber_tol");
    require(s.max_condition >= 1.0, "subspace.max_condition", "must be at least 1");

    const auto& f = c.fock;
    require(f.sym_max_n >= 1, "fock.sym_max_n", "must be at least 1");
    require(f.sym_max_d >= 1, "fock.sym_max_d", "must be at least 1");
    require(f.sym_instances >= 1, "fock.sym_instances", "must be at least 1");
    check_positive(f.sym_tol, "fock.sym_tol");
    require(f.coherent_cutoff >= 1, "fock.coherent_cutoff", "must be at least 1");
    require(f.coherent_max_d >= 1, "fock.coherent_max_d", "must be at least 1");
    require(f.coherent_instances >= 1, "fock.coherent_instances", "must be at least 1");
    check_positive(f.taylor_tol, "fock.taylor_tol");
    check_positive(f.gamma_tol, "fock.gamma_tol");
    require(f.weyl_cutoffs.size() >= 2, "fock.weyl_cutoffs", "needs at least two cutoffs");
    for (std::size_t i = 0; i < f.weyl_cutoffs.size(); ++i)
        require(f.weyl_cutoffs[i] >= 2 && (i == 0 || f.weyl_cutoffs[i] > f.weyl_cutoffs[i - 1]),
                "fock.weyl_cutoffs[" + std::to_string(i) + "]", "must be increasing and at least 2");
    check_positive(f.weyl_tol, "fock.weyl_tol");
    require(f.fiber_theta > 0 && f.fiber_theta < 1.5707963267948966, "fock.fiber_theta", "must lie in (0, pi/2)");
    require(f.modular_cutoff >= 1, "fock.modular_cutoff", "must be at least 1");
    require(f.modular_samples >= 1, "fock.modular_samples", "must be at least 1");
    check_positive(f.modular_tol, "fock.modular_tol");

    const auto& ff = c.freefield;
    check_positive(ff.mass, "freefield.mass");
    check_grid(ff.grid, "freefield.grid");
    check_positive(ff.lattice_spacing, "freefield.lattice_spacing");
    check_grid(ff.bw_grid, "freefield.bw_grid");
    require(!ff.ladder.empty(), "freefield.ladder", "must not be empty");
    for (std::size_t i = 0; i < ff.ladder.size(); ++i)
        require(power_of_two(ff.ladder[i]) && (i == 0 || ff.ladder[i] > ff.ladder[i - 1]),
                "freefield.ladder[" + std::to_string(i) + "]", "must be strictly increasing powers of two");
    check_bumps(ff.spacelike_pair, "freefield.spacelike_pair", 2);
    require(ff.spacelike_pair.size() == 2, "freefield.spacelike_pair", "must hold exactly two bumps");
    check_bumps(ff.timelike_pair, "freefield.timelike_pair", 2);
    require(ff.timelike_pair.size() == 2, "freefield.timelike_pair", "must hold exactly two bumps");
    check_positive(ff.spacelike_tol, "freefield.spacelike_tol");
    check_positive(ff.timelike_min, "freefield.timelike_min");
    check_positive(ff.stability_tol, "freefield.stability_tol");
    check_bumps({ff.covariance_bump}, "freefield.covariance_bump", 1);
    check_positive(ff.translation_tol, "freefield.translation_tol");
    check_positive(ff.boost_tol, "freefield.boost_tol");
    check_bumps(ff.right_bumps, "freefield.right_bumps", 1);
    check_bumps(ff.left_bumps, "freefield.left_bumps", 1);
    check_positive(ff.bw_tol, "freefield.bw_tol");
    check_positive(ff.tail_growth_min, "freefield.tail_growth_min");
    require(ff.monotone_slack >= 0, "freefield.monotone_slack", "must be non-negative");
    const auto& b = ff.borchers;
    require(!b.times.empty(), "freefield.borchers.times", "must not be empty");
    require(!b.probe_centers.empty(), "freefield.borchers.probe_centers", "must not be empty");
    check_positive(b.probe_sigma, "freefield.borchers.probe_sigma");
    check_grid(b.grid, "freefield.borchers.grid");
    check_positive(b.tol, "freefield.borchers.tol");

    const auto& m = c.modloc;
    require(!m.masses.empty(), "modloc.masses", "must not be empty");
    for (std::size_t i = 0; i < m.masses.size(); ++i) check_positive(m.masses[i], "modloc.masses[" + std::to_string(i) + "]");
    check_grid(m.grid, "modloc.grid");
    require(!m.wedges.empty(), "modloc.wedges", "must not be empty");
    for (std::size_t i = 0; i < m.wedges.size(); ++i)
        require(m.wedges[i].kind == "right" || m.wedges[i].kind == "left", "modloc.wedges[" + std::to_string(i) + "].kind",
                "must be right or left");
    require(!m.offsets.empty(), "modloc.offsets", "empty dictionary");
    check_positive(m.bump_radius, "modloc.bump_radius");
    check_positive(m.tol, "modloc.tol");
    check_positive(m.gap_required, "modloc.gap_required");
    check_positive(m.net_tol, "modloc.net_tol");
    check_bumps({m.double_cone}, "modloc.double_cone", 1);
    check_bumps(m.cone_dictionary, "modloc.cone_dictionary", 1);
    check_positive(m.doublecone_tol, "modloc.doublecone_tol");
    require(!m.direct_sum_masses.empty(), "modloc.direct_sum_masses", "must not be empty");
    for (std::size_t i = 0; i < m.direct_sum_masses.size(); ++i)
        check_positive(m.direct_sum_masses[i], "modloc.direct_sum_masses[" + std::to_string(i) + "]");
    check_positive(m.direct_sum_tol, "modloc.direct_sum_tol");
}

std::string to_yaml(const ExperimentConfig& cfg) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    Writer w(e);
    visit_config(w, cfg);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

const std::vector<SchemaField>& config_schema() {
    static const std::vector<SchemaField> fields = [] {
        SchemaCollector c;
        const ExperimentConfig cfg;
        visit_config(c, cfg);
        return c.fields;
    }();
    return fields;
}

std::string schema_text() {
    std::ostringstream os;
    os << "# modloc experiment configuration (YAML)\n"
       << "# Every key is optional; missing keys take the defaults shown below, unknown keys are errors.\n"
       << "# Field reference:\n";
    for (const auto& f : config_schema()) os << "#   " << f.path << " (" << f.type << "): " << f.description << "\n";
    os << "\n" << to_yaml(ExperimentConfig{});
    return os.str();
}

}  // namespace modloc
