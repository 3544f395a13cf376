#include "hyts/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "hyts/confidence.hpp"

namespace hyts {

using nlohmann::json;

ConfigError::ConfigError(std::string field_name, const std::string& message)
    : InvalidArgument("field '" + field_name + "': " + message), field(std::move(field_name)) {}

int config_line(const std::string& text, const std::string& field) {
    const std::size_t dot = field.rfind('.');
    const std::string key = "\"" + (dot == std::string::npos ? field : field.substr(dot + 1)) + "\"";
    const std::size_t pos = text.find(key);
    if (pos == std::string::npos)
        return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string format_config_error(const std::string& path, const std::string& text, const ConfigError& e) {
    const int line = config_line(text, e.field);
    return path + (line > 0 ? ":" + std::to_string(line) : "") + ": " + e.what();
}

namespace {

// Typed access to one JSON object; every key read is recorded so leftovers can be rejected.
class Reader {
public:
    Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object())
            throw ConfigError(prefix_.empty() ? "config" : prefix_, "must be a JSON object");
    }

    std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double real(const std::string& key, double fallback) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number())
            throw ConfigError(name(key), "must be a number");
        return v.get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()) && std::abs(v.get<double>()) < 9e15)
            return static_cast<std::int64_t>(v.get<double>());
        if (!v.is_number_integer())
            throw ConfigError(name(key), "must be an integer");
        return v.get<std::int64_t>();
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned())
            throw ConfigError(name(key), "must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_string())
            throw ConfigError(name(key), "must be a string");
        return v.get<std::string>();
    }

    template <class T, class F>
    std::vector<T> list(const std::string& key, std::vector<T> fallback, F element) {
        if (!has(key))
            return fallback;
        const json& v = j_.at(key);
        if (!v.is_array() || v.empty())
            throw ConfigError(name(key), "must be a nonempty array");
        std::vector<T> out;
        for (const json& e : v)
            out.push_back(element(e));
        return out;
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(name(item.key()), "unknown field");
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset of the failure -> line number
        const std::size_t at = std::min(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(at), '\n'));
        throw ConfigError("config", "JSON does not parse (line " + std::to_string(line) + ")");
    }
}

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok)
        throw ConfigError(field, message);
}

template <class Fn>
auto with_field(const std::string& field, Fn fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

Mode read_mode(Reader& r, const std::string& key, Mode fallback) {
    const std::string s = r.text(key, std::string(mode_name(fallback)));
    return with_field(r.name(key), [&] { return parse_mode(s); });
}

void read_instance(Reader& r, InstanceSpec& spec, bool grid) {
    const std::string gen = r.text("generator", std::string(generator_name(spec.generator)));
    spec.generator = with_field(r.name("generator"), [&] { return parse_generator(gen); });
    if (!grid) {
        spec.dim = static_cast<int>(r.integer("d", spec.dim));
        require(spec.dim >= 1, r.name("d"), "must be at least 1");
        spec.num_arms = static_cast<int>(r.integer("K", spec.num_arms));
        require(spec.num_arms == 0 || spec.num_arms >= 2, r.name("K"), "must be at least 2");
        spec.radius = r.real("S", spec.radius);
        require(spec.radius > 0.0, r.name("S"), "must be positive");
        spec.cost_ratio = r.real("cost_ratio", spec.cost_ratio);
        require(spec.cost_ratio > 0.0 && std::isfinite(spec.cost_ratio), r.name("cost_ratio"), "must be positive");
    }
    spec.closed_form_case = static_cast<int>(r.integer("case", spec.closed_form_case));
    require(spec.closed_form_case == 1 || spec.closed_form_case == 2, r.name("case"), "must be 1 or 2");
    const std::string fam = r.text("family", std::string(family_name(spec.family)));
    spec.family = with_field(r.name("family"), [&] { return parse_family(fam); });
    if (r.has("instance")) {
        spec.instance = r.at("instance");
        with_field(r.name("instance"), [&] { return instance_data_from_json(spec.instance); });
    }
    require(spec.generator != Generator::explicit_instance || !spec.instance.is_null(), r.name("instance"),
            "is required by the explicit generator");
}

void read_fw(Reader& parent, FwConfig& fw) {
    if (!parent.has("fw"))
        return;
    Reader r(parent.at("fw"), parent.name("fw"));
    fw.max_iterations = static_cast<int>(r.integer("max_iterations", fw.max_iterations));
    require(fw.max_iterations >= 0, r.name("max_iterations"), "must be nonnegative");
    fw.relative_tolerance = r.real("relative_tolerance", fw.relative_tolerance);
    require(fw.relative_tolerance > 0.0, r.name("relative_tolerance"), "must be positive");
    fw.smoothing = r.real("smoothing", fw.smoothing);
    require(fw.smoothing > 0.0, r.name("smoothing"), "must be positive");
    fw.step_offset = static_cast<int>(r.integer("step_offset", fw.step_offset));
    require(fw.step_offset >= 0, r.name("step_offset"), "must be nonnegative");
    fw.certificate_every = static_cast<int>(r.integer("certificate_every", fw.certificate_every));
    require(fw.certificate_every >= 1, r.name("certificate_every"), "must be at least 1");
    fw.dual_iterations = static_cast<int>(r.integer("dual_iterations", fw.dual_iterations));
    require(fw.dual_iterations >= 0, r.name("dual_iterations"), "must be nonnegative");
    r.finish();
}

void read_algo(Reader& r, AlgoConfig& algo) {
    algo.delta = r.real("delta", algo.delta);
    require(algo.delta > 0.0 && algo.delta < 0.5, r.name("delta"), "must lie in (0, 0.5)");
    algo.alpha = r.real("alpha", algo.alpha);
    require(algo.alpha > 0.0 && algo.alpha < 1.0, r.name("alpha"), "must lie in (0, 1)");
    algo.max_rounds = r.integer("max_rounds", algo.max_rounds);
    require(algo.max_rounds >= 1, r.name("max_rounds"), "must be at least 1");
    read_fw(r, algo.fw);
    if (r.has("mle")) {
        Reader m(r.at("mle"), r.name("mle"));
        algo.mle.max_iterations = static_cast<int>(m.integer("max_iterations", algo.mle.max_iterations));
        require(algo.mle.max_iterations >= 1, m.name("max_iterations"), "must be at least 1");
        algo.mle.gradient_tolerance = m.real("gradient_tolerance", algo.mle.gradient_tolerance);
        require(algo.mle.gradient_tolerance > 0.0, m.name("gradient_tolerance"), "must be positive");
        m.finish();
    }
    if (r.has("schedule")) {
        Reader s(r.at("schedule"), r.name("schedule"));
        DesignSchedule& d = algo.schedule;
        d.warm_iterations = static_cast<int>(s.integer("warm_iterations", d.warm_iterations));
        require(d.warm_iterations >= 0, s.name("warm_iterations"), "must be nonnegative");
        d.warm_step_offset = static_cast<int>(s.integer("warm_step_offset", d.warm_step_offset));
        require(d.warm_step_offset >= 0, s.name("warm_step_offset"), "must be nonnegative");
        d.full_every = static_cast<int>(s.integer("full_every", d.full_every));
        require(d.full_every >= 1, s.name("full_every"), "must be at least 1");
        d.full_certificate_every =
            static_cast<int>(s.integer("full_certificate_every", d.full_certificate_every));
        require(d.full_certificate_every >= 1, s.name("full_certificate_every"), "must be at least 1");
        s.finish();
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    const json j = parse_text(text);
    Reader r(j, "");
    RunConfig c;
    read_instance(r, c.instance, false);
    c.algo.mode = read_mode(r, "mode", c.algo.mode);
    read_algo(r, c.algo);
    c.seed = r.seed("seed", 0);
    r.finish();
    return c;
}

SweepSpec parse_sweep_config(const std::string& text) {
    const json j = parse_text(text);
    Reader r(j, "");
    SweepSpec s;
    InstanceSpec base;
    read_instance(r, base, true);
    s.generator = base.generator;
    s.closed_form_case = base.closed_form_case;
    s.family = base.family;
    s.instance = base.instance;
    auto int_of = [&](const std::string& key) {
        return [&r, key](const json& e) {
            if (!e.is_number_integer())
                throw ConfigError(r.name(key), "entries must be integers");
            return e.get<int>();
        };
    };
    auto real_of = [&](const std::string& key) {
        return [&r, key](const json& e) {
            if (!e.is_number())
                throw ConfigError(r.name(key), "entries must be numbers");
            return e.get<double>();
        };
    };
    s.dims = r.list<int>("dims", s.dims, int_of("dims"));
    for (int d : s.dims)
        require(d >= 1, r.name("dims"), "entries must be at least 1");
    s.num_arms = r.list<int>("K", s.num_arms, int_of("K"));
    for (int k : s.num_arms)
        require(k >= 2, r.name("K"), "entries must be at least 2");
    s.radii = r.list<double>("S", s.radii, real_of("S"));
    for (double v : s.radii)
        require(v > 0.0, r.name("S"), "entries must be positive");
    s.cost_ratios = r.list<double>("cost_ratios", s.cost_ratios, real_of("cost_ratios"));
    for (double v : s.cost_ratios)
        require(v > 0.0 && std::isfinite(v), r.name("cost_ratios"), "entries must be positive");
    s.modes = r.list<Mode>("modes", s.modes, [&](const json& e) {
        if (!e.is_string())
            throw ConfigError(r.name("modes"), "entries must be strings");
        return with_field(r.name("modes"), [&] { return parse_mode(e.get<std::string>()); });
    });
    s.runs = static_cast<int>(r.integer("runs", s.runs));
    require(s.runs >= 1, r.name("runs"), "must be at least 1");
    s.base_seed = r.seed("seed", s.base_seed);
    AlgoConfig algo;
    algo.delta = s.delta;
    algo.alpha = s.alpha;
    algo.max_rounds = s.max_rounds;
    read_algo(r, algo);
    s.delta = algo.delta;
    s.alpha = algo.alpha;
    s.max_rounds = algo.max_rounds;
    s.fw = algo.fw;
    s.mle = algo.mle;
    s.schedule = algo.schedule;
    r.finish();
    return s;
}

DesignConfig parse_design_config(const std::string& text) {
    const json j = parse_text(text);
    Reader r(j, "");
    DesignConfig c;
    read_instance(r, c.instance, false);
    c.mode = read_mode(r, "mode", c.mode);
    require(c.mode == Mode::hybrid || c.mode == Mode::reward_only || c.mode == Mode::dueling_only, r.name("mode"),
            "must be hybrid, reward_only or dueling_only");
    c.competitors = r.list<int>("competitors", {}, [&](const json& e) {
        if (!e.is_number_integer() || e.get<int>() < 0)
            throw ConfigError(r.name("competitors"), "entries must be arm indices");
        return e.get<int>();
    });
    c.seed = r.seed("seed", 0);
    read_fw(r, c.fw);
    r.finish();
    return c;
}

ValidateConfig parse_validate_config(const std::string& text) {
    const json j = parse_text(text);
    Reader r(j, "");
    ValidateConfig c;
    read_instance(r, c.instance, false);
    c.seed = r.seed("seed", 0);
    c.grid_size = static_cast<int>(r.integer("grid_size", c.grid_size));
    require(c.grid_size >= 2, r.name("grid_size"), "must be at least 2");
    r.finish();
    return c;
}

std::uint64_t single_instance_seed(std::uint64_t seed) {
    return mix_seed(seed, 0);
}

json ValidationSummary::to_json() const {
    return {{"max_feature_norm", report.max_feature_norm},
            {"norms_ok", report.norms_ok},
            {"theta_norm", report.theta_norm},
            {"theta_ok", report.theta_ok},
            {"min_singular_value", report.min_singular_value},
            {"span_ok", report.span_ok},
            {"top_two_gap", report.top_two_gap},
            {"unique_best_ok", report.unique_best_ok},
            {"costs_positive", report.costs_positive},
            {"kappa", kappa},
            {"sc_margin_reward", sc_margin_reward},
            {"sc_margin_dueling", sc_margin_dueling},
            {"passed", passed}};
}

ValidationSummary validate_data(const InstanceData& data, int grid_size) {
    ValidationSummary s;
    const int K = static_cast<int>(data.arms.cols());
    const Vec costs = data.costs ? *data.costs : Vec::Ones(static_cast<Eigen::Index>(num_actions(K)));
    s.report = validate_instance(data.arms, data.theta_star, data.radius, costs);
    if (costs.size() != static_cast<Eigen::Index>(num_actions(K)))
        s.report.costs_positive = false;

    // kappa over the image of the parameter ball: x_a^T theta ranges over [-S |x_a|, S |x_a|]
    s.kappa = std::numeric_limits<double>::infinity();
    for (const Action& a : enumerate_actions(K)) {
        const Vec x = a.is_reward() ? Vec(data.arms.col(a.first))
                                    : Vec(data.arms.col(a.first) - data.arms.col(a.second));
        const GlmFamily& fam = a.is_reward() ? data.reward_family : data.dueling_family;
        const double bound = data.radius * x.norm();
        for (int k = 0; k < grid_size; ++k) {
            const double eta = -bound + 2.0 * bound * k / (grid_size - 1);
            s.kappa = std::min(s.kappa, fam.mean_prime(eta));
        }
    }
    s.sc_margin_reward = data.reward_family.self_concordance_margin(data.radius, grid_size);
    s.sc_margin_dueling = data.dueling_family.self_concordance_margin(2.0 * data.radius, grid_size);
    const ValidationReport& r = s.report;
    s.passed = r.norms_ok && r.theta_ok && r.span_ok && r.unique_best_ok && r.costs_positive && s.kappa > 0.0 &&
               s.sc_margin_reward >= -1e-12 && s.sc_margin_dueling >= -1e-12;
    return s;
}

namespace {

std::vector<double> to_std(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace

json design_report(const HybridInstance& instance, const DesignConfig& config, bool& converged) {
    const InstanceView& view = instance.view();
    const BestArm best = best_arm_and_gaps(instance);
    for (int c : config.competitors)
        if (c >= view.num_arms() || c == best.arm)
            throw ConfigError("competitors", "must name arms other than the best arm");
    const std::vector<std::size_t> subset =
        config.mode == Mode::hybrid ? std::vector<std::size_t>{} : mode_actions(view, config.mode);
    const CharacteristicTime t = restricted_characteristic_time(instance, subset, config.competitors, config.fw);
    json out;
    out["mode"] = mode_name(config.mode);
    out["best_arm"] = best.arm;
    out["gap_min"] = t.gap_min;
    json actions = json::array();
    for (std::size_t a = 0; a < view.num_actions(); ++a)
        actions.push_back(view.action(a).to_string());
    out["actions"] = actions;
    out["w"] = to_std(t.weights);
    out["phi"] = t.phi;
    out["T_star"] = t.value;
    out["fw_iterations"] = t.iterations;
    converged = t.converged;
    if (config.mode == Mode::hybrid && config.competitors.empty()) {
        const CharacteristicTime c = cost_characteristic_time(instance, view.costs(), config.fw);
        out["p"] = to_std(c.weights);
        out["w_bar"] = to_std(c.weights / c.weights.sum());
        out["T_star_cost"] = c.value;
        const CharacteristicTime loc = local_lb_time(instance, config.fw);
        out["T_loc"] = loc.value;
        converged = converged && c.converged && loc.converged;
    }
    out["converged"] = converged;
    return out;
}

json complexity_report(double radius) {
    const GlmFamily fam = GlmFamily::bernoulli_logistic();
    const double m = fam.sc_constant();
    const double zeta = fam.dispersion_scale();
    const double b_reward = 2.0 * (1.0 + radius * m) * zeta;
    const double b_dueling = 2.0 * (1.0 + 2.0 * radius * m) * zeta;
    json out;
    out["S"] = radius;
    out["B_reward"] = b_reward;
    out["B_dueling"] = b_dueling;
    out["cases"] = json::array();
    for (int which : {1, 2}) {
        const ClosedForms unit = closed_form_complexities(which, 1.0, 1.0);
        const ClosedForms scaled = closed_form_complexities(which, b_reward, b_dueling);
        out["cases"].push_back({{"case", which},
                                {"unit", {{"T_R", unit.reward_only}, {"T_D", unit.dueling_only}}},
                                {"scaled", {{"T_R", scaled.reward_only}, {"T_D", scaled.dueling_only}}}});
    }
    return out;
}

namespace {

struct Options {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    bool trace = false;
    bool timing = false;
    int verbosity = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << content;
}

std::filesystem::path output_dir(const Options& o) {
    std::filesystem::create_directories(o.out_dir);
    return o.out_dir;
}

HybridInstance build_instance(const InstanceSpec& spec, std::uint64_t seed) {
    return with_field("generator", [&] { return make_instance(spec, single_instance_seed(seed)); });
}

// Reads the config and maps config problems to exit code 1 with a line-numbered message.
template <class Body>
int guarded(const Options& o, std::ostream& err, Body body) {
    const std::string text = read_file(o.config);
    try {
        return body(text);
    } catch (const ConfigError& e) {
        err << format_config_error(o.config, text, e) << '\n';
        return exit_config;
    } catch (const NotIdentifiable& e) {
        err << format_config_error(o.config, text, ConfigError("mode", e.what())) << '\n';
        return exit_config;
    }
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    return guarded(o, err, [&](const std::string& text) {
        RunConfig c = parse_run_config(text);
        if (o.seed)
            c.seed = *o.seed;
        c.algo.record_trace = o.trace;
        const HybridInstance inst = build_instance(c.instance, c.seed);
        Cell cell;
        cell.seed = single_instance_seed(c.seed);
        const std::uint64_t env_seed = environment_seed(cell, 0);
        const std::uint64_t algo_seed = algorithm_seed(env_seed, c.algo.mode);
        Environment env(inst, env_seed);
        Rng rng(algo_seed);
        const RunResult r = run(inst, env, c.algo, rng);
        json j = run_result_to_json(r, inst.view());
        j["mode"] = mode_name(c.algo.mode);
        j["seed"] = c.seed;
        j["environment_seed"] = env_seed;
        j["algorithm_seed"] = algo_seed;
        j["instance_hash"] = instance_hash(inst);
        j["instance"] = instance_to_json(inst);
        const auto dir = output_dir(o);
        write_file(dir / "result.json", j.dump(2) + "\n");
        if (o.trace) {
            std::ostringstream t;
            write_trace_csv(t, r, inst.view());
            write_file(dir / "trace.csv", t.str());
        }
        out << "tau " << r.tau << " recommended " << r.recommended << " correct " << (r.correct ? 1 : 0)
            << " converged " << (r.converged ? 1 : 0) << " total_cost " << r.total_cost << '\n';
        if (o.verbosity > 0)
            err << "warm-up " << r.warmup_rounds << ", reward queries " << r.reward_queries << ", dueling queries "
                << r.dueling_queries << ", exploration rounds " << r.exploration_rounds << ", MLE failures "
                << r.mle_failures << '\n';
        return r.converged ? exit_ok : exit_not_converged;
    });
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    return guarded(o, err, [&](const std::string& text) {
        SweepSpec spec = parse_sweep_config(text);
        if (o.seed)
            spec.base_seed = *o.seed;
        SweepOptions opts;
        opts.jobs = o.jobs;
        opts.timing = o.timing;
        std::size_t done = 0;
        const std::size_t total =
            expand_cells(spec).size() * spec.modes.size() * static_cast<std::size_t>(spec.runs);
        if (o.verbosity > 0)
            opts.on_result = [&](const ResultRow& r) {
                ++done;
                err << "[" << done << "/" << total << "] cell " << r.cell << " " << mode_name(r.mode) << " run "
                    << r.run << " tau " << r.tau << (r.converged ? "" : " (not converged)");
                if (o.verbosity > 1 && !r.error.empty())
                    err << " error: " << r.error;
                err << '\n';
            };
        const SweepOutput result = execute_sweep(spec, opts);
        const auto dir = output_dir(o);
        std::ostringstream rows, sum;
        write_results_csv(rows, result.rows);
        write_summary_csv(sum, aggregate(result.rows));
        write_file(dir / "results.csv", rows.str());
        write_file(dir / "summary.csv", sum.str());
        write_file(dir / "manifest.json", sweep_manifest(spec, result).dump(2) + "\n");
        out << sum.str();
        return static_cast<int>(exit_ok);
    });
}

int cmd_design(const Options& o, std::ostream& out, std::ostream& err) {
    return guarded(o, err, [&](const std::string& text) {
        DesignConfig c = parse_design_config(text);
        if (o.seed)
            c.seed = *o.seed;
        const HybridInstance inst = build_instance(c.instance, c.seed);
        bool converged = false;
        const json j = design_report(inst, c, converged);
        out << j.dump(2) << '\n';
        write_file(output_dir(o) / "design.json", j.dump(2) + "\n");
        if (!converged)
            err << "design solver did not certify its tolerance; the best iterate is reported\n";
        return converged ? exit_ok : exit_not_converged;
    });
}

int cmd_complexity(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.config.empty()) {
        out << complexity_report(5.0).dump(2) << '\n';
        return exit_ok;
    }
    return guarded(o, err, [&](const std::string& text) {
        const json j = parse_text(text);
        Reader r(j, "");
        const double radius = r.real("S", 5.0);
        require(radius > 0.0, "S", "must be positive");
        r.finish();
        out << complexity_report(radius).dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
    return guarded(o, err, [&](const std::string& text) {
        ValidateConfig c = parse_validate_config(text);
        if (o.seed)
            c.seed = *o.seed;
        InstanceData data;
        if (c.instance.generator == Generator::explicit_instance) {
            data = instance_data_from_json(c.instance.instance);
        } else {
            const HybridInstance inst = build_instance(c.instance, c.seed);
            const InstanceView& v = inst.view();
            data.arms = v.arms();
            data.theta_star = inst.theta_star();
            data.radius = v.radius();
            data.reward_family = v.reward_family();
            data.dueling_family = v.dueling_family();
            data.costs = v.costs();
        }
        const ValidationSummary s = validate_data(data, c.grid_size);
        out << s.to_json().dump(2) << '\n';
        if (!s.passed)
            err << "validation failed: " << s.report.describe() << "; kappa " << s.kappa << '\n';
        return s.passed ? static_cast<int>(exit_ok) : static_cast<int>(exit_validation);
    });
}

}  // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid-feedback best-arm identification for generalized linear bandits"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", o.config, "JSON config file");
        if (config_required)
            opt->required();
        sub->add_option("--out", o.out_dir, "output directory (created if absent)");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--jobs", o.jobs, "concurrent runs")->check(CLI::PositiveNumber);
        sub->add_flag("--trace", o.trace, "write the per-round trace CSV");
        sub->add_flag("--timing", o.timing, "record wall-clock times (results are then not reproducible)");
        sub->add_flag("-v", o.verbosity, "verbosity (-v, -vv)");
    };
    auto* run_cmd = app.add_subcommand("run", "single run");
    auto* sweep_cmd = app.add_subcommand("sweep", "grid of runs over shared instances");
    auto* design_cmd = app.add_subcommand("design", "optimal designs and characteristic times at theta*");
    auto* complexity_cmd = app.add_subcommand("complexity", "closed-form complexities of the two 2-d examples");
    auto* validate_cmd = app.add_subcommand("validate", "instance assumption checks");
    add_common(run_cmd, true);
    add_common(sweep_cmd, true);
    add_common(design_cmd, true);
    add_common(complexity_cmd, false);
    add_common(validate_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o_out, o_err;
        const int code = app.exit(e, o_out, o_err);
        out << o_out.str();
        err << o_err.str();
        return code == 0 ? exit_ok : exit_config;
    }
    for (CLI::App* sub : app.get_subcommands())
        if (sub->count("--seed") > 0)
            o.seed = seed;

    try {
        if (run_cmd->parsed())
            return cmd_run(o, out, err);
        if (sweep_cmd->parsed())
            return cmd_sweep(o, out, err);
        if (design_cmd->parsed())
            return cmd_design(o, out, err);
        if (complexity_cmd->parsed())
            return cmd_complexity(o, out, err);
        return cmd_validate(o, out, err);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
}

}  // namespace hyts
