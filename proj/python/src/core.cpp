#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hyts/cli.hpp"
#include "hyts/confidence.hpp"
#include "hyts/design.hpp"
#include "hyts/errors.hpp"
#include "hyts/explore.hpp"
#include "hyts/harness.hpp"
#include "hyts/serialize.hpp"

namespace py = pybind11;
using namespace hyts;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

FwConfig fw_config(double relative_tolerance, int max_iterations) {
    FwConfig fw;
    fw.relative_tolerance = relative_tolerance;
    fw.max_iterations = max_iterations;
    return fw;
}

py::dict characteristic_dict(const CharacteristicTime& t) {
    py::dict d;
    d["value"] = t.value;
    d["phi"] = t.phi;
    d["gap_min"] = t.gap_min;
    d["lower_bound"] = t.lower_bound;
    d["weights"] = t.weights;
    d["iterations"] = t.iterations;
    d["converged"] = t.converged;
    return d;
}

py::dict row_dict(const ResultRow& r) {
    py::dict d;
    d["cell"] = r.cell;
    d["run"] = r.run;
    d["generator"] = r.generator;
    d["d"] = r.d;
    d["K"] = r.K;
    d["S"] = r.S;
    d["cost_reward"] = r.cost_reward;
    d["cost_dueling"] = r.cost_dueling;
    d["mode"] = std::string(mode_name(r.mode));
    d["seed"] = r.seed;
    d["tau"] = r.tau;
    d["total_cost"] = r.total_cost;
    d["reward_cost"] = r.reward_cost;
    d["dueling_cost"] = r.dueling_cost;
    d["recommended"] = r.recommended;
    d["correct"] = r.correct;
    d["converged"] = r.converged;
    d["instance_hash"] = r.instance_hash;
    d["error"] = r.error;
    return d;
}

py::dict summary_dict(const SummaryRow& s) {
    py::dict d;
    d["generator"] = s.generator;
    d["d"] = s.d;
    d["K"] = s.K;
    d["S"] = s.S;
    d["cost_reward"] = s.cost_reward;
    d["cost_dueling"] = s.cost_dueling;
    d["mode"] = std::string(mode_name(s.mode));
    d["runs"] = s.runs;
    d["tau_mean"] = s.tau_mean;
    d["tau_std"] = s.tau_std;
    d["tau_min"] = s.tau_min;
    d["tau_max"] = s.tau_max;
    d["total_cost_mean"] = s.total_cost_mean;
    d["reward_cost_mean"] = s.reward_cost_mean;
    d["dueling_cost_mean"] = s.dueling_cost_mean;
    d["error_rate"] = s.error_rate;
    d["non_converged"] = s.non_converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid reward/dueling best-arm identification";

    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<DegenerateInstance>(m, "DegenerateInstance", PyExc_ValueError);
    py::register_exception<NotIdentifiable>(m, "NotIdentifiable", PyExc_ValueError);

    py::class_<HybridInstance>(m, "Instance")
        .def_static("from_json", &instance_from_string, py::arg("text"))
        .def("to_json", &instance_to_string)
        .def_property_readonly("arms", [](const HybridInstance& i) { return i.view().arms(); })
        .def_property_readonly("theta_star", &HybridInstance::theta_star)
        .def_property_readonly("radius", [](const HybridInstance& i) { return i.view().radius(); })
        .def_property_readonly("costs", [](const HybridInstance& i) { return i.view().costs(); })
        .def_property_readonly("dim", [](const HybridInstance& i) { return i.view().dim(); })
        .def_property_readonly("num_arms", [](const HybridInstance& i) { return i.view().num_arms(); })
        .def_property_readonly("actions",
                               [](const HybridInstance& i) {
                                   std::vector<std::string> out;
                                   for (const Action& a : i.view().actions())
                                       out.push_back(a.to_string());
                                   return out;
                               })
        .def_property_readonly("best_arm", [](const HybridInstance& i) { return best_arm_and_gaps(i).arm; })
        .def_property_readonly("gaps", [](const HybridInstance& i) { return best_arm_and_gaps(i).gaps; })
        .def_property_readonly("hash", &instance_hash)
        .def("with_costs", &HybridInstance::with_costs, py::arg("costs"));

    m.def(
        "make_instance",
        [](const std::string& generator, int d, int K, double S, int closed_form_case, double cost_ratio,
           std::uint64_t seed) {
            InstanceSpec spec;
            spec.generator = parse_generator(generator);
            spec.dim = d;
            spec.num_arms = K;
            spec.radius = S;
            spec.closed_form_case = closed_form_case;
            spec.cost_ratio = cost_ratio;
            return make_instance(spec, single_instance_seed(seed));
        },
        py::arg("generator") = "main", py::arg("d") = 2, py::arg("K") = 0, py::arg("S") = 5.0,
        py::arg("closed_form_case") = 1, py::arg("cost_ratio") = 1.0, py::arg("seed") = 0,
        "Instance from a named generator; seeds match the run command.");

    m.def(
        "characteristic_time",
        [](const HybridInstance& inst, const std::string& mode, const std::vector<int>& competitors,
           double relative_tolerance, int max_iterations) {
            const Mode md = parse_mode(mode);
            const std::vector<std::size_t> subset =
                md == Mode::hybrid ? std::vector<std::size_t>{} : mode_actions(inst.view(), md);
            return characteristic_dict(restricted_characteristic_time(
                inst, subset, competitors, fw_config(relative_tolerance, max_iterations)));
        },
        py::arg("instance"), py::arg("mode") = "hybrid", py::arg("competitors") = std::vector<int>{},
        py::arg("relative_tolerance") = 1e-2, py::arg("max_iterations") = 5000);

    m.def(
        "cost_characteristic_time",
        [](const HybridInstance& inst, double relative_tolerance, int max_iterations) {
            return characteristic_dict(
                cost_characteristic_time(inst, inst.view().costs(), fw_config(relative_tolerance, max_iterations)));
        },
        py::arg("instance"), py::arg("relative_tolerance") = 1e-2, py::arg("max_iterations") = 5000);

    m.def(
        "closed_form_complexities",
        [](int which, double b_reward, double b_dueling) {
            const ClosedForms c = closed_form_complexities(which, b_reward, b_dueling);
            return py::make_tuple(c.reward_only, c.dueling_only);
        },
        py::arg("case"), py::arg("b_reward") = 1.0, py::arg("b_dueling") = 1.0,
        "(reward-only, dueling-only) characteristic times of a closed-form case.");

    m.def("beta_radius", &beta_radius, py::arg("lipschitz"), py::arg("dim"), py::arg("radius"), py::arg("delta"));

    m.def(
        "run",
        [](const HybridInstance& inst, const std::string& mode, double delta, double alpha, std::int64_t max_rounds,
           std::uint64_t seed, bool record_actions) {
            AlgoConfig cfg;
            cfg.mode = parse_mode(mode);
            cfg.delta = delta;
            cfg.alpha = alpha;
            cfg.max_rounds = max_rounds;
            cfg.record_actions = record_actions;
            RunResult r;
            {
                py::gil_scoped_release release;
                Environment env(inst, seed);
                Rng rng(algorithm_seed(seed, cfg.mode));
                r = run(inst, env, cfg, rng);
            }
            return to_python(run_result_to_json(r, inst.view()));
        },
        py::arg("instance"), py::arg("mode") = "hybrid", py::arg("delta") = 0.05, py::arg("alpha") = 0.5,
        py::arg("max_rounds") = 5'000'000, py::arg("seed") = 0, py::arg("record_actions") = false,
        "One identification run; `seed` is the environment seed and the algorithm seed derives from it.");

    m.def(
        "sweep",
        [](const std::string& config, int jobs) {
            const SweepSpec spec = parse_sweep_config(config);
            SweepOptions opt;
            opt.jobs = jobs;
            SweepOutput out;
            {
                py::gil_scoped_release release;
                out = execute_sweep(spec, opt);
            }
            py::list rows, summary;
            for (const ResultRow& r : out.rows)
                rows.append(row_dict(r));
            for (const SummaryRow& s : aggregate(out.rows))
                summary.append(summary_dict(s));
            py::dict d;
            d["rows"] = rows;
            d["summary"] = summary;
            return d;
        },
        py::arg("config"), py::arg("jobs") = 1, "Runs a sweep given as the JSON text of a sweep config.");

    m.def(
        "validate",
        [](const std::string& instance_json, int grid_size) {
            return to_python(validate_data(instance_data_from_json(nlohmann::json::parse(instance_json)), grid_size)
                                 .to_json());
        },
        py::arg("instance_json"), py::arg("grid_size") = 1001);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> argv_store{"hyts"};
            argv_store.insert(argv_store.end(), args.begin(), args.end());
            std::vector<char*> argv;
            for (auto& a : argv_store)
                argv.push_back(a.data());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process; returns (exit code, stdout, stderr).");
}
