#include "hyts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "hyts/errors.hpp"
#include "hyts/serialize.hpp"

namespace hyts {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xd1342543de82ef95ULL + 1));
}

std::pair<double, double> ratio_costs(double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw InvalidArgument("cost ratio must be positive");
    return {2.0 * ratio / (1.0 + ratio), 2.0 / (1.0 + ratio)};
}

std::string_view generator_name(Generator g) {
    switch (g) {
    case Generator::main:
        return "main";
    case Generator::basis_rotated:
        return "basis_rotated";
    case Generator::closed_form:
        return "closed_form";
    case Generator::toy_1d:
        return "toy_1d";
    case Generator::explicit_instance:
        return "explicit";
    }
    return "unknown";
}

Generator parse_generator(std::string_view name) {
    for (Generator g : {Generator::main, Generator::basis_rotated, Generator::closed_form, Generator::toy_1d,
                        Generator::explicit_instance})
        if (generator_name(g) == name)
            return g;
    throw InvalidArgument("unknown generator '" + std::string(name) + "'");
}

int InstanceSpec::resolved_arms() const {
    switch (generator) {
    case Generator::main:
        return num_arms > 0 ? num_arms : dim + 1;
    case Generator::basis_rotated:
        return dim + 1;
    case Generator::closed_form:
        return closed_form_case == 1 ? 2 : 3;
    case Generator::toy_1d:
        return 2;
    case Generator::explicit_instance:
        return instance.contains("arms") ? static_cast<int>(instance["arms"].size()) : 0;
    }
    return 0;
}

HybridInstance make_instance(const InstanceSpec& spec, std::uint64_t seed) {
    auto priced = [&](HybridInstance inst) {
        const auto [cr, cd] = ratio_costs(spec.cost_ratio);
        return inst.with_costs(modality_costs(inst.view().num_arms(), cr, cd));
    };
    switch (spec.generator) {
    case Generator::main: {
        Rng rng(seed);
        return priced(gen_main_instance(spec.resolved_arms(), spec.dim, spec.radius, rng, spec.family));
    }
    case Generator::basis_rotated:
        return priced(gen_basis_rotated(spec.dim, spec.radius, spec.family));
    case Generator::closed_form:
        return priced(gen_closed_form_case(spec.closed_form_case, spec.radius));
    case Generator::toy_1d:
        return priced(gen_toy_1d(spec.radius));
    case Generator::explicit_instance: {
        HybridInstance inst = instance_from_json(spec.instance);
        return spec.cost_ratio == 1.0 ? inst : priced(inst);
    }
    }
    throw InvalidArgument("unknown generator");
}

void SweepSpec::validate() const {
    if (runs < 1)
        throw InvalidArgument("runs must be at least 1");
    if (modes.empty())
        throw InvalidArgument("modes must be nonempty");
    if (dims.empty() || radii.empty() || cost_ratios.empty())
        throw InvalidArgument("grid axes must be nonempty");
    for (int d : dims)
        if (d < 1)
            throw InvalidArgument("dims must be positive");
    for (int k : num_arms)
        if (k < 2)
            throw InvalidArgument("num_arms must be at least 2");
    for (double s : radii)
        if (!(s > 0.0))
            throw InvalidArgument("radii must be positive");
    for (double r : cost_ratios)
        ratio_costs(r);
    algo_config(modes.front()).validate();
}

AlgoConfig SweepSpec::algo_config(Mode mode) const {
    AlgoConfig c;
    c.mode = mode;
    c.delta = delta;
    c.alpha = alpha;
    c.max_rounds = max_rounds;
    c.fw = fw;
    c.mle = mle;
    c.schedule = schedule;
    return c;
}

std::vector<Cell> expand_cells(const SweepSpec& spec) {
    spec.validate();
    std::vector<Cell> cells;
    const std::vector<int> ks = spec.num_arms.empty() ? std::vector<int>{0} : spec.num_arms;
    for (int d : spec.dims)
        for (int k : ks)
            for (double s : spec.radii)
                for (double r : spec.cost_ratios) {
                    Cell c;
                    c.index = cells.size();
                    c.instance.generator = spec.generator;
                    c.instance.dim = d;
                    c.instance.num_arms = k;
                    c.instance.radius = s;
                    c.instance.cost_ratio = r;
                    c.instance.closed_form_case = spec.closed_form_case;
                    c.instance.family = spec.family;
                    c.instance.instance = spec.instance;
                    c.seed = mix_seed(spec.base_seed, c.index);
                    cells.push_back(std::move(c));
                }
    return cells;
}

std::uint64_t environment_seed(const Cell& cell, int run) {
    return mix_seed(cell.seed, static_cast<std::uint64_t>(run));
}

std::uint64_t algorithm_seed(std::uint64_t env_seed, Mode mode) {
    return mix_seed(env_seed, 1000 + static_cast<std::uint64_t>(mode));
}

SweepOutput execute_sweep(const SweepSpec& spec, const SweepOptions& options) {
    SweepOutput out;
    out.cells = expand_cells(spec);
    const std::size_t num_cells = out.cells.size();
    std::vector<std::optional<HybridInstance>> instances(num_cells);
    out.cell_hashes.assign(num_cells, 0);
    out.cell_errors.assign(num_cells, "");
    for (std::size_t c = 0; c < num_cells; ++c) {
        try {
            instances[c] = make_instance(out.cells[c].instance, out.cells[c].seed);
            out.cell_hashes[c] = instance_hash(*instances[c]);
        } catch (const std::exception& e) {
            out.cell_errors[c] = e.what();
        }
    }

    const std::size_t num_modes = spec.modes.size();
    const auto runs = static_cast<std::size_t>(spec.runs);
    const std::size_t num_tasks = num_cells * num_modes * runs;
    out.rows.resize(num_tasks);
    std::atomic<std::size_t> next{0};
    std::mutex report;

    auto work = [&]() {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= num_tasks)
                return;
            const std::size_t c = task / (num_modes * runs);
            const std::size_t m = (task / runs) % num_modes;
            const int r = static_cast<int>(task % runs);
            const Cell& cell = out.cells[c];
            ResultRow& row = out.rows[task];
            row.cell = c;
            row.run = r;
            row.generator = std::string(generator_name(cell.instance.generator));
            row.d = cell.instance.dim;
            row.K = cell.instance.resolved_arms();
            row.S = cell.instance.radius;
            row.mode = spec.modes[m];
            row.seed = environment_seed(cell, r);
            row.instance_hash = out.cell_hashes[c];
            const auto start = std::chrono::steady_clock::now();
            try {
                if (!instances[c])
                    throw ConstructionFailure(out.cell_errors[c]);
                const HybridInstance& inst = *instances[c];
                const InstanceView& v = inst.view();
                row.d = v.dim();
                row.K = v.num_arms();
                row.S = v.radius();
                row.cost_reward = v.cost(0);
                row.cost_dueling = v.cost(static_cast<std::size_t>(v.num_arms()));
                Environment env(inst, row.seed);
                Rng rng(algorithm_seed(row.seed, row.mode));
                const RunResult res = run(inst, env, spec.algo_config(row.mode), rng);
                row.tau = res.tau;
                row.total_cost = res.total_cost;
                row.reward_cost = res.reward_cost;
                row.dueling_cost = res.dueling_cost;
                row.recommended = res.recommended;
                row.correct = res.correct;
                row.converged = res.converged;
            } catch (const std::exception& e) {
                row.error = e.what();
                row.converged = false;
            }
            if (options.timing)
                row.wallclock_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            if (options.on_result) {
                const std::lock_guard<std::mutex> lock(report);
                options.on_result(row);
            }
        }
    };

    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < std::min(jobs, num_tasks); ++j)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    return out;
}

namespace {

using GroupKey = std::tuple<std::string, int, int, double, double, double, std::string>;

double sorted_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows) {
    std::map<GroupKey, std::vector<const ResultRow*>> groups;
    for (const ResultRow& r : rows)
        groups[{r.generator, r.d, r.K, r.S, r.cost_reward, r.cost_dueling, std::string(mode_name(r.mode))}].push_back(&r);

    std::vector<SummaryRow> out;
    for (const auto& [key, members] : groups) {
        SummaryRow s;
        s.generator = std::get<0>(key);
        s.d = std::get<1>(key);
        s.K = std::get<2>(key);
        s.S = std::get<3>(key);
        s.cost_reward = std::get<4>(key);
        s.cost_dueling = std::get<5>(key);
        s.mode = members.front()->mode;
        s.runs = static_cast<int>(members.size());
        std::vector<double> tau, total, reward, dueling;
        int converged = 0, wrong = 0;
        for (const ResultRow* r : members) {
            tau.push_back(static_cast<double>(r->tau));
            total.push_back(r->total_cost);
            reward.push_back(r->reward_cost);
            dueling.push_back(r->dueling_cost);
            if (r->converged) {
                ++converged;
                wrong += r->correct ? 0 : 1;
            } else {
                ++s.non_converged;
            }
        }
        const double n = static_cast<double>(members.size());
        s.tau_mean = sorted_sum(tau) / n;
        std::vector<double> dev;
        for (double t : tau)
            dev.push_back((t - s.tau_mean) * (t - s.tau_mean));
        s.tau_std = members.size() > 1 ? std::sqrt(sorted_sum(dev) / (n - 1.0)) : 0.0;
        s.tau_min = *std::min_element(tau.begin(), tau.end());
        s.tau_max = *std::max_element(tau.begin(), tau.end());
        s.total_cost_mean = sorted_sum(total) / n;
        s.reward_cost_mean = sorted_sum(reward) / n;
        s.dueling_cost_mean = sorted_sum(dueling) / n;
        s.error_rate = converged > 0 ? static_cast<double>(wrong) / converged : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "generator,d,K,S,cost_reward,cost_dueling,mode,seed,tau,total_cost,reward_cost,dueling_cost,recommended,"
          "correct,converged,wallclock_ms\n";
    for (const ResultRow& r : rows)
        os << r.generator << ',' << r.d << ',' << r.K << ',' << fmt(r.S) << ',' << fmt(r.cost_reward) << ','
           << fmt(r.cost_dueling) << ',' << mode_name(r.mode) << ',' << r.seed << ',' << r.tau << ','
           << fmt(r.total_cost) << ',' << fmt(r.reward_cost) << ',' << fmt(r.dueling_cost) << ',' << r.recommended
           << ',' << (r.correct ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.wallclock_ms) << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "generator,d,K,S,cost_reward,cost_dueling,mode,runs,tau_mean,tau_std,tau_min,tau_max,total_cost_mean,"
          "reward_cost_mean,dueling_cost_mean,error_rate,non_converged\n";
    for (const SummaryRow& s : rows)
        os << s.generator << ',' << s.d << ',' << s.K << ',' << fmt(s.S) << ',' << fmt(s.cost_reward) << ','
           << fmt(s.cost_dueling) << ',' << mode_name(s.mode) << ',' << s.runs << ',' << fmt(s.tau_mean) << ','
           << fmt(s.tau_std) << ',' << fmt(s.tau_min) << ',' << fmt(s.tau_max) << ',' << fmt(s.total_cost_mean)
           << ',' << fmt(s.reward_cost_mean) << ',' << fmt(s.dueling_cost_mean) << ',' << fmt(s.error_rate) << ','
           << s.non_converged << '\n';
}

nlohmann::json sweep_spec_to_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["generator"] = generator_name(spec.generator);
    j["dims"] = spec.dims;
    j["num_arms"] = spec.num_arms;
    j["radii"] = spec.radii;
    j["cost_ratios"] = spec.cost_ratios;
    j["closed_form_case"] = spec.closed_form_case;
    j["family"] = family_name(spec.family);
    if (!spec.instance.is_null())
        j["instance"] = spec.instance;
    j["modes"] = nlohmann::json::array();
    for (Mode m : spec.modes)
        j["modes"].push_back(mode_name(m));
    j["runs"] = spec.runs;
    j["base_seed"] = spec.base_seed;
    j["delta"] = spec.delta;
    j["alpha"] = spec.alpha;
    j["max_rounds"] = spec.max_rounds;
    j["fw"] = {{"max_iterations", spec.fw.max_iterations},
               {"relative_tolerance", spec.fw.relative_tolerance},
               {"smoothing", spec.fw.smoothing},
               {"step_offset", spec.fw.step_offset},
               {"certificate_every", spec.fw.certificate_every},
               {"dual_iterations", spec.fw.dual_iterations}};
    j["mle"] = {{"max_iterations", spec.mle.max_iterations}, {"gradient_tolerance", spec.mle.gradient_tolerance}};
    j["schedule"] = {{"warm_iterations", spec.schedule.warm_iterations},
                     {"warm_step_offset", spec.schedule.warm_step_offset},
                     {"full_every", spec.schedule.full_every},
                     {"full_certificate_every", spec.schedule.full_certificate_every}};
    return j;
}

nlohmann::json sweep_manifest(const SweepSpec& spec, const SweepOutput& output) {
    nlohmann::json j;
    j["config"] = sweep_spec_to_json(spec);
    j["cells"] = nlohmann::json::array();
    for (std::size_t c = 0; c < output.cells.size(); ++c) {
        const Cell& cell = output.cells[c];
        const auto [cr, cd] = ratio_costs(cell.instance.cost_ratio);
        nlohmann::json e = {{"index", cell.index},
                            {"seed", cell.seed},
                            {"d", cell.instance.dim},
                            {"K", cell.instance.resolved_arms()},
                            {"S", cell.instance.radius},
                            {"cost_ratio", cell.instance.cost_ratio},
                            {"cost_reward", cr},
                            {"cost_dueling", cd},
                            {"instance_hash", output.cell_hashes[c]}};
        if (!output.cell_errors[c].empty())
            e["error"] = output.cell_errors[c];
        j["cells"].push_back(std::move(e));
    }
    j["rows"] = output.rows.size();
    std::size_t failed = 0;
    for (const ResultRow& r : output.rows)
        failed += r.error.empty() ? 0 : 1;
    j["failed_runs"] = failed;
    return j;
}

nlohmann::json run_result_to_json(const RunResult& r, const InstanceView& view) {
    nlohmann::json j;
    j["tau"] = r.tau;
    j["recommended"] = r.recommended;
    j["correct"] = r.correct;
    j["converged"] = r.converged;
    j["warmup_rounds"] = r.warmup_rounds;
    j["reward_queries"] = r.reward_queries;
    j["dueling_queries"] = r.dueling_queries;
    j["total_cost"] = r.total_cost;
    j["reward_cost"] = r.reward_cost;
    j["dueling_cost"] = r.dueling_cost;
    j["exploration_rounds"] = r.exploration_rounds;
    j["mle_failures"] = r.mle_failures;
    j["theta_hat"] = std::vector<double>(r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size());
    j["beta"] = r.beta;
    nlohmann::json info = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.info.rows(); ++i) {
        const Vec row = r.info.row(i);
        info.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    j["info"] = info;
    if (!r.actions.empty()) {
        nlohmann::json acts = nlohmann::json::array();
        for (std::size_t a : r.actions)
            acts.push_back(view.action(a).to_string());
        j["actions"] = acts;
    }
    return j;
}

}  // namespace hyts
