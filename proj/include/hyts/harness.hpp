#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "hyts/explore.hpp"

namespace hyts {

std::uint64_t splitmix64(std::uint64_t x);
// Deterministic child seed; distinct `index` values give unrelated streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// (C_reward, C_dueling) with C_reward / C_dueling = ratio and C_reward + C_dueling = 2.
std::pair<double, double> ratio_costs(double ratio);

enum class Generator { main, basis_rotated, closed_form, toy_1d, explicit_instance };

std::string_view generator_name(Generator g);
Generator parse_generator(std::string_view name);

struct InstanceSpec {
    Generator generator = Generator::main;
    int num_arms = 0;  // main only; 0 means d + 1
    int dim = 2;
    double radius = 5.0;
    int closed_form_case = 1;
    FamilyId family = FamilyId::bernoulli_logistic;
    double cost_ratio = 1.0;
    nlohmann::json instance;  // explicit_instance only, in the instance JSON format

    int resolved_arms() const;
};

// `seed` feeds the random generators; the others ignore it. Costs come from cost_ratio,
// except for explicit instances, which keep their own costs when cost_ratio is 1.
HybridInstance make_instance(const InstanceSpec& spec, std::uint64_t seed);

struct SweepSpec {
    Generator generator = Generator::main;
    std::vector<int> dims{2};
    std::vector<int> num_arms;  // empty means K = d + 1 for every d
    std::vector<double> radii{5.0};
    std::vector<double> cost_ratios{1.0};
    int closed_form_case = 1;
    FamilyId family = FamilyId::bernoulli_logistic;
    nlohmann::json instance;
    std::vector<Mode> modes{Mode::hybrid};
    int runs = 10;
    std::uint64_t base_seed = 0;
    double delta = 0.05;
    double alpha = 0.5;
    std::int64_t max_rounds = 5'000'000;
    FwConfig fw;
    MleConfig mle;
    DesignSchedule schedule;

    void validate() const;
    AlgoConfig algo_config(Mode mode) const;
};

struct Cell {
    std::size_t index = 0;
    InstanceSpec instance;
    std::uint64_t seed = 0;
};

// Cells in grid order: dims (outer), then K, radii, cost ratios (inner).
std::vector<Cell> expand_cells(const SweepSpec& spec);

std::uint64_t environment_seed(const Cell& cell, int run);
std::uint64_t algorithm_seed(std::uint64_t environment_seed, Mode mode);

struct ResultRow {
    std::size_t cell = 0;
    int run = 0;
    std::string generator;
    int d = 0;
    int K = 0;
    double S = 0.0;
    double cost_reward = 1.0;
    double cost_dueling = 1.0;
    Mode mode = Mode::hybrid;
    std::uint64_t seed = 0;  // environment seed
    std::int64_t tau = 0;
    double total_cost = 0.0;
    double reward_cost = 0.0;
    double dueling_cost = 0.0;
    int recommended = -1;
    bool correct = false;
    bool converged = false;
    double wallclock_ms = 0.0;
    std::uint64_t instance_hash = 0;
    std::string error;  // nonempty when the run threw
};

struct SweepOptions {
    int jobs = 1;
    bool timing = false;  // wallclock_ms stays 0 otherwise, so outputs are reproducible
    std::function<void(const ResultRow&)> on_result;  // called from worker threads, serialised
};

struct SweepOutput {
    std::vector<Cell> cells;
    std::vector<std::uint64_t> cell_hashes;  // empty hash (0) when instance construction failed
    std::vector<std::string> cell_errors;
    std::vector<ResultRow> rows;  // sorted by (cell, mode position in the spec, run)
};

SweepOutput execute_sweep(const SweepSpec& spec, const SweepOptions& options = {});

struct SummaryRow {
    std::string generator;
    int d = 0;
    int K = 0;
    double S = 0.0;
    double cost_reward = 1.0;
    double cost_dueling = 1.0;
    Mode mode = Mode::hybrid;
    int runs = 0;
    double tau_mean = 0.0;
    double tau_std = 0.0;  // sample standard deviation, 0 for a single run
    double tau_min = 0.0;
    double tau_max = 0.0;
    double total_cost_mean = 0.0;
    double reward_cost_mean = 0.0;
    double dueling_cost_mean = 0.0;
    double error_rate = 0.0;  // wrong recommendations among converged runs
    int non_converged = 0;
};

// Groups rows by (generator, d, K, S, costs, mode); the result does not depend on row order.
std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
nlohmann::json sweep_manifest(const SweepSpec& spec, const SweepOutput& output);

nlohmann::json sweep_spec_to_json(const SweepSpec& spec);
nlohmann::json run_result_to_json(const RunResult& result, const InstanceView& view);

}  // namespace hyts
