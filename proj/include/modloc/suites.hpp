#pragma once

#include <set>
#include <string>
#include <vector>

#include "modloc/report.hpp"

namespace modloc {

struct CheckInfo {
    std::string name;
    int criterion = 0;
    std::string suite;  // subspace, fock, freefield, modloc, repeat
    std::string anchor;
    bool refinement_sensitive = false;
};

const std::vector<CheckInfo>& check_registry();
const CheckInfo& check_info(const std::string& name);

struct RunOptions {
    std::set<int> criteria;   // empty: everything the config kind selects
    std::vector<int> ladder;  // empty: freefield.ladder of the config
};

// criteria selected by an experiment kind
std::set<int> criteria_for_kind(const std::string& kind);

// run: all suites of the config kind; refine: only the resolution-dependent checks, on the given ladder
Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});
Report refine_experiment(const ExperimentConfig& cfg, const std::vector<int>& ladder);

// parses "a,b,c" into a strictly increasing list of powers of two
std::vector<int> parse_ladder(const std::string& text);

}  // namespace modloc
