#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "hyts/errors.hpp"
#include "hyts/harness.hpp"
#include "hyts/serialize.hpp"

using namespace hyts;

namespace {

SweepSpec small_spec() {
    SweepSpec s;
    s.generator = Generator::closed_form;
    s.closed_form_case = 1;
    s.radii = {2.0};
    s.modes = {Mode::hybrid, Mode::reward_only};
    s.runs = 3;
    s.base_seed = 42;
    s.delta = 0.1;
    return s;
}

std::string results_csv(const SweepOutput& out) {
    std::ostringstream os;
    write_results_csv(os, out.rows);
    return os.str();
}

std::string summary_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_summary_csv(os, aggregate(rows));
    return os.str();
}

ResultRow row(const std::string& gen, Mode mode, std::int64_t tau, bool correct, bool converged, double cr = 1.0,
              double cd = 1.0) {
    ResultRow r;
    r.generator = gen;
    r.d = 2;
    r.K = 3;
    r.S = 2.0;
    r.mode = mode;
    r.tau = tau;
    r.cost_reward = cr;
    r.cost_dueling = cd;
    r.reward_cost = 0.25 * static_cast<double>(tau) * cr;
    r.dueling_cost = 0.75 * static_cast<double>(tau) * cd;
    r.total_cost = r.reward_cost + r.dueling_cost;
    r.correct = correct;
    r.converged = converged;
    return r;
}

}  // namespace

TEST_CASE("seed mixing") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base = 0; base < 20; ++base)
        for (std::uint64_t i = 0; i < 50; ++i)
            seen.insert(mix_seed(base, i));
    CHECK(seen.size() == 1000);
    // reference value of the splitmix64 finaliser for input 0
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("cost ratios keep the sum at two") {
    const double ratios[] = {1.0 / 3.0, 0.5, 1.0, 2.0, 3.0};
    const double expected[][2] = {{0.5, 1.5}, {2.0 / 3.0, 4.0 / 3.0}, {1.0, 1.0}, {4.0 / 3.0, 2.0 / 3.0}, {1.5, 0.5}};
    for (int k = 0; k < 5; ++k) {
        const auto [cr, cd] = ratio_costs(ratios[k]);
        CHECK(cr == doctest::Approx(expected[k][0]).epsilon(1e-15));
        CHECK(cd == doctest::Approx(expected[k][1]).epsilon(1e-15));
        CHECK(cr + cd == doctest::Approx(2.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(ratio_costs(0.0), InvalidArgument);
}

TEST_CASE("generators by name") {
    for (Generator g : {Generator::main, Generator::basis_rotated, Generator::closed_form, Generator::toy_1d,
                        Generator::explicit_instance})
        CHECK(parse_generator(generator_name(g)) == g);
    CHECK_THROWS_AS(parse_generator("appendix"), InvalidArgument);

    InstanceSpec s;
    s.dim = 4;
    CHECK(s.resolved_arms() == 5);
    const HybridInstance inst = make_instance(s, 7);
    CHECK(inst.view().num_arms() == 5);
    CHECK(instance_hash(make_instance(s, 7)) == instance_hash(inst));
    CHECK(instance_hash(make_instance(s, 8)) != instance_hash(inst));

    s.generator = Generator::closed_form;
    s.closed_form_case = 2;
    s.cost_ratio = 3.0;
    const HybridInstance cf = make_instance(s, 0);
    CHECK(cf.view().num_arms() == 3);
    CHECK(cf.view().cost(0) == doctest::Approx(1.5));
    CHECK(cf.view().cost(3) == doctest::Approx(0.5));
}

TEST_CASE("instance JSON round trip is lossless") {
    Rng g(99);
    const HybridInstance inst = gen_main_instance(4, 3, 5.0, g).with_costs(modality_costs(4, 2.0 / 3.0, 4.0 / 3.0));
    const std::string text = instance_to_string(inst);
    const HybridInstance back = instance_from_string(text);
    CHECK(back.view().arms() == inst.view().arms());
    CHECK(back.theta_star() == inst.theta_star());
    CHECK(back.view().costs() == inst.view().costs());
    CHECK(back.view().radius() == inst.view().radius());
    CHECK(instance_hash(back) == instance_hash(inst));
    CHECK(instance_to_string(back) == text);

    CHECK_THROWS_AS(instance_from_string("{"), InvalidArgument);
    CHECK_THROWS_AS(instance_from_string(R"({"arms": [[1.0]]})"), InvalidArgument);
    CHECK_THROWS_AS(
        instance_from_string(R"({"arms": [[1.0], [-1.0]], "theta_star": [1.0], "S": 2, "family_reward": "gaussian",
                                 "family_dueling": "gaussian", "costs": {"reward": [1, 1], "dueling": []}})"),
        InvalidArgument);

    InstanceSpec s;
    s.generator = Generator::explicit_instance;
    s.instance = instance_to_json(inst);
    CHECK(instance_hash(make_instance(s, 0)) == instance_hash(inst));
}

TEST_CASE("observation model") {
    SUBCASE("logistic duel at zero utility difference") {
        Mat arms(2, 3);
        arms << 1.0, 0.0, 0.0,
                0.0, 0.5, -0.5;
        Vec theta(2);
        theta << 1.0, 0.0;
        const GlmFamily f = GlmFamily::bernoulli_logistic();
        const HybridInstance inst(InstanceView(arms, 2.0, f, f), theta);
        Environment env(inst, 17);
        double s = 0.0;
        for (int k = 0; k < 100000; ++k)
            s += env.observe(Action::duel(1, 2));
        CHECK(std::abs(s / 100000 - 0.5) <= 0.01);
    }
    SUBCASE("gaussian reward at eta = 2") {
        Mat arms(1, 2);
        arms << 1.0, -1.0;
        const GlmFamily f = GlmFamily::gaussian();
        const HybridInstance inst(InstanceView(arms, 2.0, f, f), Vec::Constant(1, 2.0));
        Environment env(inst, 18);
        double s = 0.0;
        for (int k = 0; k < 10000; ++k)
            s += env.observe(Action::reward(0));
        CHECK(std::abs(s / 10000 - 2.0) <= 0.03);
    }
}

TEST_CASE("cell expansion") {
    SweepSpec s;
    s.dims = {2, 4};
    s.radii = {2.0, 5.0};
    s.cost_ratios = {1.0 / 3.0, 1.0, 3.0};
    const auto cells = expand_cells(s);
    REQUIRE(cells.size() == 12);
    CHECK(cells[0].instance.dim == 2);
    CHECK(cells[0].instance.radius == 2.0);
    CHECK(cells[1].instance.cost_ratio == 1.0);
    CHECK(cells[3].instance.radius == 5.0);
    CHECK(cells[6].instance.dim == 4);
    CHECK(cells[6].instance.resolved_arms() == 5);
    std::set<std::uint64_t> seeds;
    for (const Cell& c : cells)
        seeds.insert(c.seed);
    CHECK(seeds.size() == 12);

    s.runs = 0;
    CHECK_THROWS_AS(expand_cells(s), InvalidArgument);
    s.runs = 1;
    s.modes.clear();
    CHECK_THROWS_AS(expand_cells(s), InvalidArgument);
}

TEST_CASE("sweep execution") {
    const SweepSpec spec = small_spec();
    const SweepOutput out = execute_sweep(spec);
    REQUIRE(out.rows.size() == 6);
    for (std::size_t k = 0; k < out.rows.size(); ++k) {
        const ResultRow& r = out.rows[k];
        CHECK(r.error.empty());
        CHECK(r.converged);
        CHECK(r.instance_hash == out.cell_hashes[0]);
        CHECK(r.mode == spec.modes[k / 3]);
        CHECK(r.run == static_cast<int>(k % 3));
        CHECK(r.reward_cost + r.dueling_cost == r.total_cost);
        CHECK(r.wallclock_ms == 0.0);
        // matched environment seeds across modes
        CHECK(r.seed == out.rows[k % 3].seed);
    }
    CHECK(out.rows[0].seed != out.rows[1].seed);

    SUBCASE("reruns and thread counts give identical files") {
        const std::string first = results_csv(out);
        CHECK(results_csv(execute_sweep(spec)) == first);
        SweepOptions opts;
        opts.jobs = 3;
        int delivered = 0;
        opts.on_result = [&](const ResultRow&) { ++delivered; };
        CHECK(results_csv(execute_sweep(spec, opts)) == first);
        CHECK(delivered == 6);
        std::ostringstream m1, m2;
        m1 << sweep_manifest(spec, out).dump(2);
        m2 << sweep_manifest(spec, execute_sweep(spec, opts)).dump(2);
        CHECK(m1.str() == m2.str());
    }
    SUBCASE("matched seeds reproduce a direct run") {
        const HybridInstance inst = make_instance(out.cells[0].instance, out.cells[0].seed);
        Environment env(inst, out.rows[4].seed);
        Rng rng(algorithm_seed(out.rows[4].seed, Mode::reward_only));
        const RunResult r = run(inst, env, spec.algo_config(Mode::reward_only), rng);
        CHECK(r.tau == out.rows[4].tau);
        CHECK(r.total_cost == out.rows[4].total_cost);
    }
}

TEST_CASE("failed runs become rows") {
    SweepSpec spec;
    spec.generator = Generator::closed_form;
    spec.closed_form_case = 1;
    spec.radii = {2.0};
    spec.modes = {Mode::dueling_only, Mode::hybrid};
    spec.runs = 2;
    spec.delta = 0.1;
    const SweepOutput bad = execute_sweep(spec);
    REQUIRE(bad.rows.size() == 4);
    CHECK_FALSE(bad.rows[0].converged);
    CHECK_FALSE(bad.rows[0].error.empty());
    CHECK(bad.rows[2].error.empty());
    const auto summary = aggregate(bad.rows);
    REQUIRE(summary.size() == 2);
    const auto& due = summary[0].mode == Mode::dueling_only ? summary[0] : summary[1];
    CHECK(due.non_converged == 2);
}

TEST_CASE("aggregation") {
    SUBCASE("single run has zero spread") {
        const auto s = aggregate({row("main", Mode::hybrid, 100, true, true)});
        REQUIRE(s.size() == 1);
        CHECK(s[0].tau_std == 0.0);
        CHECK(s[0].tau_mean == 100.0);
        CHECK(s[0].error_rate == 0.0);
    }
    SUBCASE("statistics") {
        const std::vector<ResultRow> rows = {row("main", Mode::hybrid, 100, true, true),
                                             row("main", Mode::hybrid, 200, false, true),
                                             row("main", Mode::hybrid, 400, true, true),
                                             row("main", Mode::hybrid, 500, true, false),
                                             row("main", Mode::reward_only, 10, true, true)};
        const auto s = aggregate(rows);
        REQUIRE(s.size() == 2);
        const SummaryRow& h = s[0].mode == Mode::hybrid ? s[0] : s[1];
        CHECK(h.runs == 4);
        CHECK(h.tau_mean == doctest::Approx(300.0));
        CHECK(h.tau_std == doctest::Approx(std::sqrt((40000.0 + 10000.0 + 10000.0 + 40000.0) / 3.0)));
        CHECK(h.tau_min == 100.0);
        CHECK(h.tau_max == 500.0);
        CHECK(h.error_rate == doctest::Approx(1.0 / 3.0));
        CHECK(h.non_converged == 1);
        CHECK(h.reward_cost_mean + h.dueling_cost_mean == doctest::Approx(h.total_cost_mean));
    }
    SUBCASE("row order does not matter") {
        std::vector<ResultRow> rows;
        Rng rng(5);
        std::uniform_int_distribution<int> tau(10, 10000);
        for (int k = 0; k < 60; ++k) {
            const double ratio = k % 3 == 0 ? 1.0 : (k % 3 == 1 ? 3.0 : 1.0 / 3.0);
            const auto [cr, cd] = ratio_costs(ratio);
            rows.push_back(row(k % 2 ? "main" : "closed_form", k % 4 < 2 ? Mode::hybrid : Mode::cost_aware,
                               tau(rng), k % 7 != 0, k % 11 != 0, cr, cd));
        }
        const std::string ref = summary_csv(rows);
        for (int trial = 0; trial < 10; ++trial) {
            std::shuffle(rows.begin(), rows.end(), rng);
            CHECK(summary_csv(rows) == ref);
        }
    }
}

TEST_CASE("CSV schemas") {
    const std::string r = results_csv(execute_sweep(small_spec()));
    CHECK(r.rfind("generator,d,K,S,cost_reward,cost_dueling,mode,seed,tau,total_cost,reward_cost,dueling_cost,"
                  "recommended,correct,converged,wallclock_ms\n",
                  0) == 0);
    CHECK(std::count(r.begin(), r.end(), '\n') == 7);
    const std::string s = summary_csv(execute_sweep(small_spec()).rows);
    CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}

TEST_CASE("run result JSON") {
    const HybridInstance inst = gen_closed_form_case(1, 2.0);
    Environment env(inst, 1);
    Rng rng(2);
    AlgoConfig cfg;
    cfg.delta = 0.1;
    cfg.record_actions = true;
    const RunResult r = run(inst, env, cfg, rng);
    const nlohmann::json j = run_result_to_json(r, inst.view());
    CHECK(j["tau"] == r.tau);
    CHECK(j["converged"] == true);
    CHECK(j["actions"].size() == static_cast<std::size_t>(r.tau));
    CHECK(j["info"].size() == 2);
}
