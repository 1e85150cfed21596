#pragma once

#include <string>
#include <vector>

#include "modloc/freefield.hpp"

namespace modloc {

// invalid configuration; the message starts with the offending field path
struct ConfigError : UsageError {
    std::string field;
    ConfigError(const std::string& field_path, const std::string& what)
        : UsageError(field_path + ": " + what), field(field_path) {}
};

struct BumpSpec {
    Point2 center;
    double radius = 0.5;
    bool operator==(const BumpSpec&) const = default;
};

struct GridSpec {
    double theta_max = 6.0;
    int n_points = 512;
    bool operator==(const GridSpec&) const = default;
};

struct WedgeSpec {
    std::string kind = "right";  // right | left
    Point2 apex;
    bool operator==(const WedgeSpec&) const = default;
};

struct SubspaceConfig {
    int d_min = 2;
    int d_max = 8;
    int samples = 200;
    double max_condition = 1e6;  // samples with a worse conditioned delta are redrawn
    std::vector<double> flow_times{0.3, 1.7};
    double tol = 1e-9;
    double fiber_tol = 1e-9;
    bool operator==(const SubspaceConfig&) const = default;
};

struct FockConfig {
    int sym_max_n = 5;
    int sym_max_d = 4;
    int sym_instances = 100;
    double sym_tol = 1e-12;
    int coherent_cutoff = 10;
    int coherent_max_d = 3;
    int coherent_instances = 10;
    double taylor_tol = 1e-12;
    double gamma_tol = 1e-10;
    std::vector<int> weyl_cutoffs{8, 12, 16};
    double weyl_tol = 1e-6;
    double fiber_theta = 1.0471975511965976;
    int modular_cutoff = 10;
    int modular_samples = 6;
    double modular_time = 0.3;
    double modular_tol = 1e-7;
    bool operator==(const FockConfig&) const = default;
};

struct BorchersConfig {
    double alpha = 0.5;
    std::vector<double> times{0.1, 0.25};
    std::vector<double> probe_centers{0.0, 0.5, -0.5};
    double probe_sigma = 0.5;
    GridSpec grid{6.0, 1024};
    double tol = 1e-6;
    bool operator==(const BorchersConfig&) const = default;
};

struct FreeFieldConfig {
    double mass = 1.0;
    GridSpec grid{6.0, 512};
    double lattice_spacing = 1.0 / 96.0;
    GridSpec bw_grid{8.0, 8192};
    std::vector<int> ladder{512, 1024, 2048};
    std::vector<BumpSpec> spacelike_pair{{{0.0, -2.0}, 0.5}, {{0.0, 2.0}, 0.5}};
    std::vector<BumpSpec> timelike_pair{{{0.0, 0.0}, 0.5}, {{1.5, 0.0}, 0.5}};
    double spacelike_tol = 1e-6;
    double timelike_min = 1e-3;
    double stability_tol = 1e-6;
    BumpSpec covariance_bump{{0.0, 1.0}, 0.5};
    Point2 translation{0.3, 0.0};
    double boost = 0.2;
    double translation_tol = 1e-6;
    double boost_tol = 1e-4;
    std::vector<BumpSpec> right_bumps{{{0.0, 3.0}, 0.5}};
    std::vector<BumpSpec> left_bumps{{{0.0, -3.0}, 0.5}};
    double bw_tol = 1e-3;
    double tail_growth_min = 3.0;  // decades per refinement step
    double monotone_slack = 0.1;
    BorchersConfig borchers;
    bool operator==(const FreeFieldConfig&) const = default;
};

struct ModlocConfig {
    std::vector<double> masses{1.0};
    GridSpec grid{8.0, 8192};
    std::vector<WedgeSpec> wedges{{"right", {0, 0}}, {"left", {0, 0}},   {"right", {0, 0.5}},
                                  {"left", {0, 0.5}}, {"right", {0, 1}}, {"left", {0, 1}}};
    std::vector<Point2> offsets{{0.1, 1.0}, {0.35, 1.25}, {-0.25, 1.3}, {0.05, 1.65}};
    double bump_radius = 0.5;
    double tol = 1e-2;
    double gap_required = 10.0;
    std::vector<Point2> covariance_translations{{0.0, 0.5}};
    std::vector<double> boost_times{0.05};
    double net_tol = 1e-3;
    BumpSpec double_cone{{0.0, 0.0}, 1.0};
    std::vector<BumpSpec> cone_dictionary{{{0, 0}, 0.3}, {{0.25, 0}, 0.3}, {{-0.25, 0}, 0.3}, {{0, 0.25}, 0.3},
                                          {{0, -0.25}, 0.3}};
    double doublecone_tol = 1e-2;
    std::vector<double> direct_sum_masses{1.0, 2.0};
    double direct_sum_tol = 1e-10;
    bool operator==(const ModlocConfig&) const = default;
};

struct ExperimentConfig {
    std::string kind = "all";  // subspace | fock | freefield | modloc | all
    unsigned long long seed = 7;
    std::string output_dir = "modloc-out";
    SubspaceConfig subspace;
    FockConfig fock;
    FreeFieldConfig freefield;
    ModlocConfig modloc;
    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
// throws ConfigError on the first violated constraint
void validate(const ExperimentConfig& cfg);
// complete YAML document, every field written; parse_config(to_yaml(c)) == c
std::string to_yaml(const ExperimentConfig& cfg);

struct SchemaField {
    std::string path;
    std::string type;
    std::string description;
};
const std::vector<SchemaField>& config_schema();
std::string schema_text();

}  // namespace modloc
