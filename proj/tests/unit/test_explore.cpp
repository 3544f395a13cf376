#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "support/oracles.hpp"

#include "hyts/confidence.hpp"
#include "hyts/errors.hpp"
#include "hyts/explore.hpp"

using namespace hyts;
using namespace hyts::oracle;

namespace {

// Certificate recomputed with an explicit inverse, independent of ConfidenceState.
Vec random_simplex(std::size_t n, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    Vec w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w(i) = e(rng);
    return w / w.sum();
}

std::vector<std::size_t> iota_vec(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

HybridInstance unit_square_instance() {
    Mat arms(2, 2);
    arms << 1.0, 0.0,
            0.0, 1.0;
    Vec theta(2);
    theta << 0.5, -0.5;
    const GlmFamily f = GlmFamily::bernoulli_logistic();
    return {InstanceView(arms, 2.0, f, f), theta};
}

}  // namespace

TEST_CASE("modes parse and name round trip") {
    for (Mode m : {Mode::hybrid, Mode::reward_only, Mode::dueling_only, Mode::random_hybrid, Mode::cost_aware})
        CHECK(parse_mode(mode_name(m)) == m);
    CHECK_THROWS_AS(parse_mode("greedy"), InvalidArgument);
}

TEST_CASE("mode action sets") {
    const HybridInstance inst = gen_closed_form_case(2, 2.0);
    const InstanceView& v = inst.view();
    CHECK(mode_actions(v, Mode::hybrid).size() == 6);
    CHECK(mode_actions(v, Mode::reward_only) == std::vector<std::size_t>{0, 1, 2});
    CHECK(mode_actions(v, Mode::dueling_only) == std::vector<std::size_t>{3, 4, 5});
}

TEST_CASE("warm-up sequences") {
    SUBCASE("hybrid on the unit square uses both reward actions") {
        const HybridInstance inst = unit_square_instance();
        CHECK(warmup_sequence(inst.view(), Mode::hybrid) == std::vector<std::size_t>{0, 1});
        Environment env(inst, 3);
        Rng rng(4);
        AlgoConfig cfg;
        cfg.max_rounds = 50;
        CHECK(run(inst, env, cfg, rng).warmup_rounds == 2);
    }
    SUBCASE("dueling_only with two arms in the plane is not identifiable") {
        const HybridInstance inst = unit_square_instance();
        CHECK_THROWS_AS(warmup_sequence(inst.view(), Mode::dueling_only), NotIdentifiable);
        Environment env(inst, 3);
        Rng rng(4);
        AlgoConfig cfg;
        cfg.mode = Mode::dueling_only;
        CHECK_THROWS_AS(run(inst, env, cfg, rng), NotIdentifiable);
    }
    SUBCASE("reward_only in three dimensions takes a spanning triple") {
        Rng g(11);
        const HybridInstance inst = gen_main_instance(4, 3, 3.0, g);
        const auto seq = warmup_sequence(inst.view(), Mode::reward_only);
        REQUIRE(seq.size() == 3);
        Mat X(3, 3);
        for (int k = 0; k < 3; ++k)
            X.col(k) = inst.view().feature(seq[static_cast<std::size_t>(k)]);
        CHECK(std::abs(X.determinant()) > 1e-6);
        Environment env(inst, 5);
        Rng rng(6);
        AlgoConfig cfg;
        cfg.mode = Mode::reward_only;
        cfg.max_rounds = 20;
        CHECK(run(inst, env, cfg, rng).warmup_rounds == 3);
    }
    SUBCASE("cost_aware spans with the cheapest actions") {
        Rng g(12);
        const HybridInstance inst = gen_main_instance(3, 2, 5.0, g);
        const InstanceView& v = inst.view();
        CHECK(warmup_sequence(v, Mode::cost_aware) == warmup_sequence(v, Mode::hybrid));
        // duels cost 0.5 and rewards 1.5: duel(0,1) and duel(0,2) come first and span the plane
        const HybridInstance dear = inst.with_costs(modality_costs(3, 1.5, 0.5));
        CHECK(exploration_candidates(dear.view(), Mode::cost_aware) == std::vector<std::size_t>{3, 4, 5, 0, 1, 2});
        CHECK(warmup_sequence(dear.view(), Mode::cost_aware) == std::vector<std::size_t>{3, 4});
        CHECK(warmup_sequence(dear.view(), Mode::hybrid) == std::vector<std::size_t>{0, 1});
        // cheap rewards keep index order
        const HybridInstance cheap = inst.with_costs(modality_costs(3, 0.5, 1.5));
        CHECK(warmup_sequence(cheap.view(), Mode::cost_aware) == std::vector<std::size_t>{0, 1});

        Environment env(dear, 8);
        Rng rng(9);
        AlgoConfig cfg;
        cfg.mode = Mode::cost_aware;
        cfg.record_trace = true;
        cfg.max_rounds = 400;
        const RunResult r = run(dear, env, cfg, rng);
        for (const TraceRow& row : r.trace)
            if (!row.was_tracking)
                CHECK(v.action(row.action).is_duel());
    }
    SUBCASE("spanning subset skips dependent candidates") {
        const HybridInstance inst = gen_closed_form_case(1, 2.0);
        // duel(0,1) = (1, 1) is taken first, reward(0) completes the basis, reward(1) is skipped
        CHECK(spanning_subset(inst.view(), {2, 0, 1}) == std::vector<std::size_t>{2, 0});
        CHECK_THROWS_AS(spanning_subset(inst.view(), {2}), NotIdentifiable);
    }
}

TEST_CASE("tracking alternates on a balanced two-action target") {
    TrackingState s(2, {0, 1}, {0, 1}, 0.5);
    const DesignWeights w{Vec::Constant(2, 0.5)};
    std::size_t previous = 1;
    double worst = 0.0;
    for (int t = 1; t <= 100000; ++t) {
        const std::size_t a = s.track(w);
        CHECK(a != previous);
        previous = a;
        worst = std::max(worst, (s.counts() - s.target_mass()).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1.0);
    CHECK(s.tracking_rounds() == 100000);
}

TEST_CASE("tracking a vertex target always picks it") {
    TrackingState s(2, {0, 1}, {0, 1}, 0.5);
    Vec w(2);
    w << 1.0, 0.0;
    for (int t = 0; t < 1000; ++t)
        CHECK(s.track({w}) == 0);
}

TEST_CASE("tracking deviation stays below the number of actions") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
        TrackingState s(n, iota_vec(n), iota_vec(n), 0.5);
        // piecewise-constant targets redrawn every 1000 rounds
        Vec w = random_simplex(n, rng);
        double worst = 0.0;
        for (int t = 1; t <= 100000; ++t) {
            if (t % 1000 == 0)
                w = random_simplex(n, rng);
            s.track({w});
            worst = std::max(worst, (s.counts() - s.target_mass()).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= static_cast<double>(n));
        CHECK(s.counts().sum() == doctest::Approx(100000.0));
        CHECK(std::abs(s.target_mass().sum() - 100000.0) <= 1e-6 * 100000.0);
        CHECK(s.counts().minCoeff() >= 0.0);
        CHECK(s.target_mass().minCoeff() >= 0.0);
    }
}

TEST_CASE("tracking respects the allowed set and breaks ties by index") {
    TrackingState s(4, {1, 3}, {1, 3}, 0.5);
    const DesignWeights w = DesignWeights::uniform_on(4, {1, 3});
    CHECK(s.track(w) == 1);
    CHECK(s.track(w) == 3);
    CHECK(s.track(w) == 1);
    CHECK(s.counts()(0) == 0.0);
    CHECK(s.counts()(2) == 0.0);
}

TEST_CASE("forced exploration") {
    SUBCASE("the first round always explores") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            TrackingState s(3, {0, 1, 2}, {0, 2}, 0.5);
            Rng rng(seed);
            const auto c = s.select_action(DesignWeights::uniform(3), 1, rng);
            CHECK_FALSE(c.tracking);
            CHECK((c.action == 0 || c.action == 2));
            CHECK(s.tracking_rounds() == 0);
            CHECK(s.counts().sum() == 0.0);
        }
    }
    SUBCASE("exploration count matches the sum of t^-alpha") {
        const int horizon = 10000;
        double mean = 0.0, var = 0.0;
        for (int t = 1; t <= horizon; ++t) {
            const double p = std::pow(static_cast<double>(t), -0.5);
            mean += p;
            var += p * (1.0 - p);
        }
        const int seeds = 50;
        double total = 0.0;
        for (int seed = 0; seed < seeds; ++seed) {
            TrackingState s(3, {0, 1, 2}, {0, 1, 2}, 0.5);
            Rng rng(static_cast<std::uint64_t>(seed) + 77);
            for (int t = 1; t <= horizon; ++t)
                s.select_action(DesignWeights::uniform(3), t, rng);
            CHECK(s.exploration_rounds() + s.tracking_rounds() == horizon);
            total += static_cast<double>(s.exploration_rounds());
        }
        const double avg = total / seeds;
        CHECK(std::abs(avg - mean) <= 5.0 * std::sqrt(var / seeds));
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(TrackingState(2, {0, 1}, {0, 1}, 1.0), InvalidArgument);
        CHECK_THROWS_AS(TrackingState(2, {0, 5}, {0, 1}, 0.5), InvalidArgument);
        TrackingState s(2, {0, 1}, {0, 1}, 0.5);
        Rng rng(1);
        CHECK_THROWS_AS(s.select_action(DesignWeights::uniform(3), 1, rng), InvalidArgument);
        CHECK_THROWS_AS(s.select_action(DesignWeights::uniform(2), 0, rng), InvalidArgument);
    }
}

TEST_CASE("recommend") {
    Rng g(5);
    const HybridInstance inst = gen_main_instance(5, 3, 3.0, g);
    CHECK(recommend(inst.theta_star(), inst.view()) == best_arm_and_gaps(inst).arm);
    CHECK(recommend(Vec::Zero(3), inst.view()) == 0);

    SUBCASE("shifts orthogonal to every arm difference change nothing") {
        // all arms share the third coordinate, so e3 is orthogonal to every difference
        Mat arms(3, 4);
        arms << 0.6, 0.0, -0.5, 0.3,
                0.0, 0.6, 0.2, -0.4,
                0.5, 0.5, 0.5, 0.5;
        const GlmFamily f = GlmFamily::bernoulli_logistic();
        const InstanceView v(arms, 3.0, f, f);
        Rng r(8);
        std::normal_distribution<double> n01(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vec theta(3), shift = Vec::Zero(3);
            for (int k = 0; k < 3; ++k)
                theta(k) = n01(r);
            shift(2) = 5.0 * n01(r);
            Mat B(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k)
                    B(i, k) = n01(r);
            const Mat A = B * B.transpose() + 0.1 * Mat::Identity(3, 3);
            const ConfidenceState s1(theta, A, 0.7), s2(theta + shift, A, 0.7);
            const int i1 = recommend(theta, v);
            CHECK(recommend(theta + shift, v) == i1);
            for (int c = 0; c < 4; ++c)
                CHECK(s1.certificate_value(v, c) == doctest::Approx(s2.certificate_value(v, c)).epsilon(1e-12));
        }
    }
}

TEST_CASE("environment sampling") {
    const HybridInstance toy = gen_toy_1d(2.0);
    Environment a(toy, 9), b(toy, 9);
    for (int k = 0; k < 100; ++k)
        CHECK(a.observe(std::size_t{0}) == b.observe(std::size_t{0}));
    CHECK_THROWS_AS(a.observe(std::size_t{3}), InvalidArgument);

    // gaussian reward(0) has mean 1 and duel(0,1) has mean 2 under theta* = 1
    double s0 = 0.0, s2 = 0.0;
    const int n = 40000;
    for (int k = 0; k < n; ++k) {
        s0 += a.observe(Action::reward(0));
        s2 += a.observe(Action::duel(0, 1));
    }
    CHECK(std::abs(s0 / n - 1.0) <= 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 2.0) <= 5.0 / std::sqrt(n));

    const HybridInstance logit = gen_closed_form_case(1, 2.0);
    Environment e(logit, 1);
    double ones = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = e.observe(std::size_t{0});
        CHECK((z == 0.0 || z == 1.0));
        ones += z;
    }
    const double p = sigmoid(1.0);
    CHECK(std::abs(ones / n - p) <= 5.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("run stops with a sound certificate and exact cost accounting") {
    Rng g(3);
    const HybridInstance inst = gen_main_instance(3, 2, 2.0, g).with_costs(modality_costs(3, 1.5, 0.5));
    const InstanceView& v = inst.view();
    for (Mode mode : {Mode::hybrid, Mode::reward_only, Mode::random_hybrid, Mode::cost_aware}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            Environment env(inst, 100 + seed);
            Rng rng(seed);
            AlgoConfig cfg;
            cfg.mode = mode;
            cfg.delta = 0.1;
            cfg.record_trace = true;
            cfg.record_actions = true;
            const RunResult r = run(inst, env, cfg, rng);
            CAPTURE(mode_name(mode));
            REQUIRE(r.converged);
            CHECK(r.tau <= cfg.max_rounds);
            CHECK(r.tau == static_cast<std::int64_t>(r.actions.size()));
            CHECK(r.reward_queries + r.dueling_queries == r.tau);

            double reward = 0.0, dueling = 0.0;
            ObservationLog log(v);
            for (std::size_t k = 0; k < r.actions.size(); ++k) {
                const std::size_t a = r.actions[k];
                (v.action(a).is_reward() ? reward : dueling) += v.cost(a);
                CHECK(r.trace[k].action == a);
                log.append(r.trace[k].t, v.action(a), r.trace[k].z);
            }
            CHECK(r.total_cost == reward + dueling);
            CHECK(r.reward_cost == reward);
            CHECK(r.dueling_cost == dueling);
            if (mode == Mode::reward_only)
                CHECK(r.dueling_queries == 0);

            // rebuild the stopping state from the replayed log and re-verify it independently
            const ConfidenceState state = ConfidenceState::build(log, v, r.theta_hat, cfg.delta);
            CHECK((state.info() - r.info).norm() <= 1e-9 * (1.0 + r.info.norm()));
            CHECK(state.beta() == doctest::Approx(r.beta).epsilon(1e-12));
            CHECK(r.recommended == recommend(r.theta_hat, v));
            CHECK(certificate_oracle(r.theta_hat, r.info, r.beta, v.arms(), r.recommended) > 0.0);
        }
    }
}

TEST_CASE("max_rounds ends a run without an exception") {
    const HybridInstance inst = gen_closed_form_case(1, 2.0);
    Environment env(inst, 1);
    Rng rng(1);
    AlgoConfig cfg;
    cfg.max_rounds = 30;
    const RunResult r = run(inst, env, cfg, rng);
    CHECK_FALSE(r.converged);
    CHECK(r.tau == 30);
}

TEST_CASE("config validation") {
    AlgoConfig cfg;
    cfg.delta = 0.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.delta = 0.1;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.alpha = 0.5;
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("cost_aware with unit costs repeats hybrid exactly") {
    Rng g(21);
    const HybridInstance inst = gen_main_instance(3, 2, 2.0, g);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::vector<std::size_t> seqs[2];
        int k = 0;
        for (Mode mode : {Mode::hybrid, Mode::cost_aware}) {
            Environment env(inst, 500 + seed);
            Rng rng(seed);
            AlgoConfig cfg;
            cfg.mode = mode;
            cfg.record_actions = true;
            seqs[k++] = run(inst, env, cfg, rng).actions;
        }
        CHECK(seqs[0] == seqs[1]);
    }
}

TEST_CASE("delta-correctness on the one-competitor closed-form case") {
    const HybridInstance inst = gen_closed_form_case(1, 2.0);
    const int runs = 100;
    int correct = 0, converged = 0;
    for (int k = 0; k < runs; ++k) {
        Environment env(inst, 9000 + static_cast<std::uint64_t>(k));
        Rng rng(static_cast<std::uint64_t>(k));
        AlgoConfig cfg;
        cfg.delta = 0.1;
        const RunResult r = run(inst, env, cfg, rng);
        correct += r.correct ? 1 : 0;
        converged += r.converged ? 1 : 0;
    }
    CHECK(converged == runs);
    CHECK(correct >= runs * (0.9 - 3.0 * std::sqrt(0.09 / runs)));
}

TEST_CASE("trace CSV") {
    const HybridInstance inst = gen_closed_form_case(1, 2.0);
    Environment env(inst, 2);
    Rng rng(2);
    AlgoConfig cfg;
    cfg.record_trace = true;
    cfg.max_rounds = 5;
    const RunResult r = run(inst, env, cfg, rng);
    std::ostringstream os;
    write_trace_csv(os, r, inst.view());
    const std::string s = os.str();
    CHECK(s.rfind("t,action,z,was_tracking,beta,min_certificate_value,phi\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + static_cast<long>(r.trace.size()));
    CHECK(s.find("\"reward(0)\"") != std::string::npos);
}
