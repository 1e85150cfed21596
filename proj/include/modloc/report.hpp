#pragma once

#include <string>
#include <utility>
#include <vector>

#include "modloc/config.hpp"

namespace modloc {

struct CheckRecord {
    std::string name;
    std::string anchor;      // the statement being verified
    int criterion = 0;
    double value = 0.0;      // NaN when the check itself failed to evaluate
    double threshold = 0.0;
    std::string comparison;  // "<", "<=", ">" or ">="
    bool pass = false;
    bool expected_violation = false;  // the measured quantity is a diagnostic that is supposed to fire
    std::string note;
};

struct SeriesPoint {
    std::string check;
    int resolution = 0;
    double value = 0.0;
};

struct Artifact {
    std::string filename;
    std::string content;
};

struct Report {
    std::string command = "run";
    ExperimentConfig config;
    std::vector<int> ladder;
    std::vector<CheckRecord> records;
    std::vector<SeriesPoint> series;
    std::vector<Artifact> artifacts;
    std::vector<std::pair<std::string, double>> timings;  // seconds per suite

    bool pass() const;
    int failures() const;
};

// stable field order; timings and environment are left out when include_volatile is false
std::string report_json(const Report& r, bool include_volatile = true);
std::string records_csv(const Report& r);
std::string series_csv(const Report& r);
// report.json, checks.csv, refinement.csv and the artifacts; returns the files written
std::vector<std::string> write_report(const Report& r, const std::string& dir);

}  // namespace modloc
