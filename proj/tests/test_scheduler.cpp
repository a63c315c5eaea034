#include "easybo/scheduler.hpp"
#include "easybo/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <cmath>
#include <set>

using namespace easybo;

namespace {

Problem quadratic_1d() {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 1.0;
    return Problem{"quad1d", BoxDomain(lo, hi),
                   [](const Eigen::VectorXd& x) {
                       return -(x[0] - 0.3) * (x[0] - 0.3);
                   },
                   std::make_shared<ConstantDuration>(1.0), 0.0};
}

Problem cheap_branin(std::shared_ptr<const DurationModel> dur) {
    Problem p = find_problem("branin");
    p.duration = std::move(dur);
    return p;
}

/// Small inner-опт budget keeps scheduler tests fast.
RunConfig fast_config(Variant v, int budget, int n_init, int batch, std::uint64_t seed) {
    RunConfig cfg;
    cfg.variant = v;
    cfg.budget = budget;
    cfg.n_init = n_init;
    cfg.batch = batch;
    cfg.seed = seed;
    cfg.inner.n_random = 128;
    cfg.inner.n_local_starts = 3;
    cfg.inner.local_max_iters = 12;
    cfg.fit_options.n_starts = 3;
    cfg.fit_options.max_iterations = 20;
    cfg.refit_every = 5;
    return cfg;
}

bool same_events(const RunRecord& a, const RunRecord& b) {
    if (a.events.size() != b.events.size()) return false;
    for (std::size_t i = 0; i < a.events.size(); ++i) {
        const RunEvent& x = a.events[i];
        const RunEvent& y = b.events[i];
        if (x.issue_time != y.issue_time || x.complete_time != y.complete_time ||
            x.worker != y.worker || x.observation != y.observation ||
            x.point.u != y.point.u || x.weight.has_value() != y.weight.has_value())
            return false;
        if (x.weight.has_value() && *x.weight != *y.weight) return false;
    }
    return true;
}

} // namespace

TEST_CASE("budget equal to n_init is pure random search with no model") {
    Problem p = quadratic_1d();
    RunConfig cfg = fast_config(Variant::EasyBo, 8, 8, 1, 3);
    const RunRecord rec = run_sequential(p, cfg);
    CHECK(rec.events.size() == 8);
    for (const RunEvent& e : rec.events) CHECK(!e.weight.has_value()); // all init points
    // with one worker the clock is the sum of the durations
    CHECK(rec.total_sim_time == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("async with one worker reproduces the sequential event sequence") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(10.0, 0.5));
    RunConfig cfg = fast_config(Variant::EasyBo, 18, 8, 1, 17);
    const RunRecord seq = run_sequential(p, cfg);
    const RunRecord asy = run_async(p, cfg);
    CHECK(same_events(seq, asy));
    CHECK(seq.total_sim_time == asy.total_sim_time);
}

TEST_CASE("async discrete-event trace matches a hand-simulated schedule") {
    // durations by issue index; three workers; hand-executed schedule:
    //  t=0: w0 starts (5), w1 starts (3), w2 starts (4)
    //  t=3: w1 -> issue d=6, ends 9      t=4: w2 -> issue d=2, ends 6
    //  t=5: w0 -> issue d=7, ends 12     t=6: w2 -> issue d=1, ends 7
    //  t=7: w2 -> issue d=4, ends 11     (budget of 8 reached)
    //  completions then drain at t=9, 11, 12
    Problem p = quadratic_1d();
    p.duration = std::make_shared<TableDuration>(
        std::vector<double>{5.0, 3.0, 4.0, 6.0, 2.0, 7.0, 1.0, 4.0});
    RunConfig cfg = fast_config(Variant::EasyBo, 8, 5, 3, 23);
    const RunRecord rec = run_async(p, cfg);

    REQUIRE(rec.events.size() == 8);
    // events arrive in completion order: the t=4 and t=6 issues finish before
    // the t=3 issue whose duration is 6
    const double expected_completion[] = {3.0, 4.0, 5.0, 6.0, 7.0, 9.0, 11.0, 12.0};
    const int expected_worker[] = {1, 2, 0, 2, 2, 1, 2, 0};
    const double expected_issue[] = {0.0, 0.0, 0.0, 4.0, 6.0, 3.0, 7.0, 5.0};
    for (int i = 0; i < 8; ++i) {
        CHECK(rec.events[i].complete_time == doctest::Approx(expected_completion[i]));
        CHECK(rec.events[i].worker == expected_worker[i]);
        CHECK(rec.events[i].issue_time == doctest::Approx(expected_issue[i]));
    }
    CHECK(rec.total_sim_time == doctest::Approx(12.0));
}

TEST_CASE("sync rounds advance the clock by the straggler duration") {
    Problem p = quadratic_1d();
    p.duration = std::make_shared<TableDuration>(std::vector<double>{1.0, 2.0, 3.0, 4.0, 5.0});
    RunConfig cfg = fast_config(Variant::Pbo, 10, 5, 5, 29);
    const RunRecord rec = run_sync_batch(p, cfg);
    REQUIRE(rec.events.size() == 10);
    // both rounds draw the same duration table: max is 5
    CHECK(rec.events[4].complete_time == doctest::Approx(5.0));
    CHECK(rec.events[9].complete_time == doctest::Approx(10.0));
    CHECK(rec.total_sim_time == doctest::Approx(10.0));
    // second round is model-driven: slot weights are (0, .25, .5, .75, 1)
    std::vector<double> weights;
    for (int i = 5; i < 10; ++i) {
        REQUIRE(rec.events[i].weight.has_value());
        weights.push_back(*rec.events[i].weight);
    }
    std::sort(weights.begin(), weights.end());
    const double expected[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) CHECK(weights[i] == doctest::Approx(expected[i]));
}

TEST_CASE("constant durations: sync and async clocks agree") {
    Problem p = cheap_branin(std::make_shared<ConstantDuration>(2.0));
    RunConfig cfg = fast_config(Variant::EasyBoS, 20, 10, 5, 31);
    const RunRecord sync = run_sync_batch(p, cfg);
    cfg.variant = Variant::EasyBo;
    const RunRecord async = run_async(p, cfg);
    CHECK(sync.total_sim_time == doctest::Approx(async.total_sim_time));
    CHECK(sync.total_sim_time == doctest::Approx(2.0 * 20 / 5));
}

TEST_CASE("straggler dominance: async never ends later than sync, 20 seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Problem p = cheap_branin(std::make_shared<LogNormalDuration>(10.0, 0.5));
        RunConfig cfg = fast_config(Variant::EasyBoS, 30, 10, 5, seed);
        const double sync_time = run_sync_batch(p, cfg).total_sim_time;
        cfg.variant = Variant::EasyBo;
        const double async_time = run_async(p, cfg).total_sim_time;
        CHECK(async_time <= sync_time);
    }
}

TEST_CASE("the async pool stays full while budget remains") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(5.0, 0.5));
    RunConfig cfg = fast_config(Variant::EasyBo, 24, 8, 4, 37);
    const RunRecord rec = run_async(p, cfg);
    REQUIRE(rec.events.size() == 24);

    // replay: at each model-driven issue instant, the number of in-flight
    // evaluations (including the new one) must equal the pool size
    int checked = 0;
    for (const RunEvent& e : rec.events) {
        if (!e.weight.has_value()) continue;
        const double t = e.issue_time;
        int in_flight = 0;
        for (const RunEvent& other : rec.events) {
            if (other.issue_time <= t && other.complete_time > t) ++in_flight;
        }
        CHECK(in_flight == 4);
        ++checked;
    }
    CHECK(checked == 24 - 8);

    // hallucination inputs are the other in-flight points: they never include
    // completed evaluations, so each pending set has exactly B-1 = 3 points
    // (implicitly asserted by the engine's pool invariant; the replay above
    // pins the pool size the engine saw)
}

TEST_CASE("best curve replays from the event log") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(10.0, 0.5));
    RunConfig cfg = fast_config(Variant::EasyBo, 20, 8, 4, 41);
    const RunRecord rec = run_async(p, cfg);
    REQUIRE(rec.best_curve.size() == rec.events.size());
    double best = -std::numeric_limits<double>::infinity();
    double prev_value = -std::numeric_limits<double>::infinity();
    double prev_time = 0.0;
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        best = std::max(best, rec.events[i].observation);
        CHECK(rec.best_curve[i].first == rec.events[i].complete_time);
        CHECK(rec.best_curve[i].second == best);
        CHECK(rec.best_curve[i].second >= prev_value);
        CHECK(rec.best_curve[i].first >= prev_time);
        prev_value = rec.best_curve[i].second;
        prev_time = rec.best_curve[i].first;
    }
}

TEST_CASE("identical seed and config give identical records") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(10.0, 0.5));
    const RunConfig cfg = fast_config(Variant::EasyBo, 16, 8, 4, 43);
    const RunRecord a = run_async(p, cfg);
    const RunRecord b = run_async(p, cfg);
    CHECK(same_events(a, b));
    CHECK(a.total_sim_time == b.total_sim_time);

    RunConfig other = cfg;
    other.seed = 44;
    const RunRecord c = run_async(p, other);
    CHECK(!same_events(a, c));
}

TEST_CASE("every issued point completes exactly once") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(10.0, 0.7));
    RunConfig cfg = fast_config(Variant::EasyBoA, 20, 8, 4, 47);
    const RunRecord rec = run_async(p, cfg);
    CHECK(rec.events.size() == 20);
    std::multiset<double> issue_times;
    for (const RunEvent& e : rec.events) {
        CHECK(e.complete_time > e.issue_time);
        issue_times.insert(e.issue_time);
    }
    CHECK(issue_times.size() == 20);
}

TEST_CASE("sequential easybo locates a 1-d quadratic optimum reliably") {
    // pass rate pinned by a pilot over seeds 1..20: each run's best point must
    // come within 1e-2 of the optimum at x = 0.3
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Problem p = quadratic_1d();
        RunConfig cfg = fast_config(Variant::EasyBo, 40, 8, 1, seed);
        const RunRecord rec = run_sequential(p, cfg);
        double best_x = -1.0;
        double best_y = -std::numeric_limits<double>::infinity();
        for (const RunEvent& e : rec.events) {
            if (e.observation > best_y) {
                best_y = e.observation;
                best_x = e.point_raw[0];
            }
        }
        if (std::abs(best_x - 0.3) <= 1e-2) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("phcbo maintains per-slot history across rounds") {
    Problem p = cheap_branin(std::make_shared<ConstantDuration>(1.0));
    RunConfig cfg = fast_config(Variant::Phcbo, 20, 10, 5, 53);
    const RunRecord rec = run_sync_batch(p, cfg);
    CHECK(rec.events.size() == 20);
    // two model-driven rounds of five slots each
    int with_weight = 0;
    for (const RunEvent& e : rec.events) with_weight += e.weight.has_value() ? 1 : 0;
    CHECK(with_weight == 10);
}

TEST_CASE("regime and variant combinations are validated") {
    Problem p = quadratic_1d();
    RunConfig cfg = fast_config(Variant::Pbo, 10, 5, 1, 3);
    CHECK_THROWS_AS(run_sequential(p, cfg), std::invalid_argument);
    cfg = fast_config(Variant::Ei, 10, 5, 2, 3);
    CHECK_THROWS_AS(run_sync_batch(p, cfg), std::invalid_argument);
    cfg = fast_config(Variant::Pbo, 10, 5, 2, 3);
    CHECK_THROWS_AS(run_async(p, cfg), std::invalid_argument);
    cfg = fast_config(Variant::EasyBo, 10, 2, 4, 3); // n_init < batch
    CHECK_THROWS_AS(run_async(p, cfg), std::invalid_argument);
    cfg = fast_config(Variant::EasyBo, 4, 5, 1, 3); // budget < n_init
    CHECK_THROWS_AS(run_sequential(p, cfg), std::invalid_argument);
}

TEST_CASE("the threaded executor completes the budget and keeps workers serial") {
    Problem p = cheap_branin(std::make_shared<LogNormalDuration>(5.0, 0.5));
    RunConfig cfg = fast_config(Variant::EasyBo, 12, 6, 3, 61);
    const RunRecord rec = run_async_threads(p, cfg, 2e-4);
    REQUIRE(rec.events.size() == 12);
    // wall-measured times: monotone best curve, strictly positive durations,
    // and no overlap of consecutive jobs on the same worker
    double prev = -1e308;
    for (const auto& [t, v] : rec.best_curve) {
        CHECK(v >= prev);
        prev = v;
    }
    std::map<int, double> last_done;
    for (const RunEvent& e : rec.events) CHECK(e.complete_time > e.issue_time);
    std::vector<RunEvent> by_issue = rec.events;
    std::sort(by_issue.begin(), by_issue.end(),
              [](const RunEvent& a, const RunEvent& b) { return a.issue_time < b.issue_time; });
    for (const RunEvent& e : by_issue) {
        auto it = last_done.find(e.worker);
        if (it != last_done.end()) CHECK(e.issue_time >= it->second);
        last_done[e.worker] = e.complete_time;
    }
    CHECK(rec.total_sim_time > 0.0);
}

TEST_CASE("ei and lcb run sequentially") {
    Problem p = quadratic_1d();
    for (Variant v : {Variant::Ei, Variant::Lcb}) {
        RunConfig cfg = fast_config(v, 14, 8, 1, 59);
        const RunRecord rec = run_sequential(p, cfg);
        CHECK(rec.events.size() == 14);
        CHECK(rec.best_value() > -0.05); // near the optimum of 0
    }
}
