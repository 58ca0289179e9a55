#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnls/config.hpp"

namespace qnls::cli {

struct Options {
    std::string subcommand;
    std::string config_path;          // empty: defaults only
    std::vector<std::string> sets;    // dotted key=value overrides, applied in order
    std::optional<std::string> out;   // overrides output.directory
    std::optional<long> seed;         // overrides seed
};

/// Defaults <- config file <- --set overrides <- --out / --seed, then schema check.
RunConfig build_config(const Options& opts);

/// Execute a parsed configuration. Returns 0 on success, 1 when a numerical
/// invariant fails (named on 'err').
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// build_config + run with the exit-code mapping (ConfigError -> 2, anything else -> 1).
int main_entry(const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace qnls::cli
