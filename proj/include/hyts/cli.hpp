#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyts/errors.hpp"
#include "hyts/harness.hpp"
#include "hyts/serialize.hpp"

namespace hyts {

enum ExitCode { exit_ok = 0, exit_config = 1, exit_not_converged = 2, exit_validation = 3 };

// A config problem tied to one field ("fw.max_iterations" for nested keys).
struct ConfigError : InvalidArgument {
    ConfigError(std::string field, const std::string& message);
    std::string field;
};

// 1-based line of the first occurrence of the field's last key in the config text; 0 if absent.
int config_line(const std::string& text, const std::string& field);
std::string format_config_error(const std::string& path, const std::string& text, const ConfigError& e);

struct RunConfig {
    InstanceSpec instance;
    AlgoConfig algo;
    std::uint64_t seed = 0;
};

struct DesignConfig {
    InstanceSpec instance;
    std::uint64_t seed = 0;
    Mode mode = Mode::hybrid;  // hybrid, reward_only or dueling_only
    std::vector<int> competitors;  // empty means every non-best arm
    FwConfig fw;
};

struct ValidateConfig {
    InstanceSpec instance;
    std::uint64_t seed = 0;
    int grid_size = 1001;
};

// All parsers reject unknown fields and out-of-range values with a ConfigError.
RunConfig parse_run_config(const std::string& text);
SweepSpec parse_sweep_config(const std::string& text);
DesignConfig parse_design_config(const std::string& text);
ValidateConfig parse_validate_config(const std::string& text);

// Instance seed shared by run, design and validate: the sweep's seed for cell 0.
std::uint64_t single_instance_seed(std::uint64_t seed);

struct ValidationSummary {
    ValidationReport report;
    double kappa = 0.0;  // min over actions of mu'(eta) for eta on a grid of [-S |x_a|, S |x_a|]
    double sc_margin_reward = 0.0;
    double sc_margin_dueling = 0.0;
    bool passed = false;
    nlohmann::json to_json() const;
};

// Checks on raw instance data, before the instance constructor would reject it.
ValidationSummary validate_data(const InstanceData& data, int grid_size);

nlohmann::json design_report(const HybridInstance& instance, const DesignConfig& config, bool& converged);
nlohmann::json complexity_report(double radius);

// Entry point of the hyts executable.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hyts
