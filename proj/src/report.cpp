#include "modloc/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <fftw3.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <sys/utsname.h>

namespace modloc {

namespace {

using ojson = nlohmann::ordered_json;

ojson number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

// YAML scalars carry no type; plain scalars that parse as numbers become numbers
ojson yaml_to_json(const YAML::Node& n) {
    if (n.IsMap()) {
        ojson o = ojson::object();
        for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
        return o;
    }
    if (n.IsSequence()) {
        ojson a = ojson::array();
        for (const auto& x : n) a.push_back(yaml_to_json(x));
        return a;
    }
    if (n.IsNull()) return nullptr;
    const std::string s = n.Scalar();
    if (n.Tag() == "!") return s;  // quoted
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(s, &pos);
        if (pos == s.size()) return i;
    } catch (const std::exception&) {
    }
    try {
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos == s.size()) return d;
    } catch (const std::exception&) {
    }
    return s;
}

ojson environment() {
    ojson e = ojson::object();
#if defined(__clang__)
    e["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
    e["compiler"] = "gcc " __VERSION__;
#endif
    e["cxx_standard"] = static_cast<long>(__cplusplus);
    e["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    e["fftw"] = std::string(fftw_version);
    struct utsname u {};
    if (uname(&u) == 0) {
        e["system"] = std::string(u.sysname) + " " + u.release;
        e["machine"] = u.machine;
    }
    e["hardware_threads"] = std::thread::hardware_concurrency();
    return e;
}

std::string csv_number(double x) {
    if (!std::isfinite(x)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

bool Report::pass() const { return failures() == 0; }

int Report::failures() const {
    int n = 0;
    for (const auto& r : records) n += r.pass ? 0 : 1;
    return n;
}

std::string report_json(const Report& r, bool include_volatile) {
    ojson doc = ojson::object();
    doc["tool"] = "modloc";
    doc["command"] = r.command;
    doc["status"] = r.pass() ? "pass" : "fail";
    doc["seed"] = r.config.seed;
    doc["ladder"] = r.ladder;
    doc["config"] = yaml_to_json(YAML::Load(to_yaml(r.config)));
    ojson recs = ojson::array();
    for (const auto& c : r.records) {
        ojson o = ojson::object();
        o["name"] = c.name;
        o["anchor"] = c.anchor;
        o["criterion"] = c.criterion;
        o["value"] = number(c.value);
        o["comparison"] = c.comparison;
        o["threshold"] = number(c.threshold);
        o["pass"] = c.pass;
        o["expected_violation"] = c.expected_violation;
        o["note"] = c.note;
        recs.push_back(std::move(o));
    }
    doc["records"] = std::move(recs);
    ojson series = ojson::array();
    for (const auto& s : r.series) series.push_back(ojson{{"check", s.check}, {"resolution", s.resolution}, {"value", number(s.value)}});
    doc["refinement"] = std::move(series);
    ojson files = ojson::array();
    for (const auto& a : r.artifacts) files.push_back(a.filename);
    doc["artifacts"] = std::move(files);
    if (include_volatile) {
        doc["environment"] = environment();
        ojson t = ojson::object();
        for (const auto& [name, sec] : r.timings) t[name] = sec;
        doc["timings"] = std::move(t);
    }
    return doc.dump(2) + "\n";
}

std::string records_csv(const Report& r) {
    std::ostringstream os;
    os << "name,criterion,value,comparison,threshold,pass,expected_violation,anchor\n";
    for (const auto& c : r.records)
        os << csv_field(c.name) << "," << c.criterion << "," << csv_number(c.value) << "," << csv_field(c.comparison) << ","
           << csv_number(c.threshold) << "," << (c.pass ? "true" : "false") << ","
           << (c.expected_violation ? "true" : "false") << "," << csv_field(c.anchor) << "\n";
    return os.str();
}

std::string series_csv(const Report& r) {
    std::ostringstream os;
    os << "resolution,check,residual\n";
    for (const auto& s : r.series) os << s.resolution << "," << csv_field(s.check) << "," << csv_number(s.value) << "\n";
    return os.str();
}

std::vector<std::string> write_report(const Report& r, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& content) {
        const fs::path p = fs::path(dir) / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw UsageError("cannot write " + p.string());
        os << content;
        written.push_back(p.string());
    };
    put("report.json", report_json(r));
    put("checks.csv", records_csv(r));
    put("refinement.csv", series_csv(r));
    for (const auto& a : r.artifacts) put(a.filename, a.content);
    return written;
}

}  // namespace modloc
