#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/dichotomy.hpp"
#include "qnls/functionals.hpp"
#include "qnls/ground_state.hpp"

namespace qnls {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical invariant failed; the CLI maps it to exit code 1.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
    bool emit_plot_scripts = false;
};

struct VerifyConfig {
    int scaling_draws = 100;
    int random_fields = 200;
    int minimality_fields = 50;
    double virial_t_max = 0.2;
};

struct RunConfig {
    std::string subcommand;
    int n = 5;
    double r_max = 32.0;
    std::size_t num_nodes = 2048;
    SystemParams system = SystemParams::from_kappa(0.5);
    GroundStateConfig ground_state;        // n, kappa, r_max, num_nodes mirrored from the blocks above
    std::string ground_state_csv;           // reuse a saved ground state instead of solving
    EvolveConfig evolve;
    ExperimentSpec initial_data;            // single-run data for evolve / dichotomy
    std::vector<ExperimentSpec> experiments;
    OutputConfig output;
    VerifyConfig verify;
    std::uint64_t seed = 20240601;
};

/// Default configuration as a JSON document (also the schema reference).
nlohmann::ordered_json default_config_json();

/// Apply "a.b.c=value" to a document. The value is parsed as JSON when possible,
/// otherwise taken as a string.
void apply_override(nlohmann::ordered_json& doc, const std::string& assignment);

/// Validate against the schema and build the typed configuration.
RunConfig parse_config(const nlohmann::ordered_json& doc, const std::string& subcommand);

/// Read a JSON file; syntax errors become ConfigError with line information.
nlohmann::ordered_json load_json_file(const std::string& path);

/// Merge 'overlay' into 'base' recursively (objects merge, everything else replaces).
void merge_json(nlohmann::ordered_json& base, const nlohmann::ordered_json& overlay);

/// Echo of a parsed configuration (what the run actually used).
nlohmann::ordered_json to_json(const RunConfig& cfg);
nlohmann::ordered_json to_json(const EvolveConfig& cfg);

}  // namespace qnls
