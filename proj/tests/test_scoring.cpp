#include <doctest.h>

#include "helpers.hpp"
#include "macg/datagen.hpp"
#include "macg/scoring.hpp"

using namespace macg;
using test::make_ad;
using test::make_features;
using test::make_log;

namespace {

// Accumulators with one group filled in directly.
Accumulators acc_with(int group, double clicks, double cost, double value) {
    Accumulators acc;
    acc.group[group].clicks = clicks;
    acc.group[group].cost = cost;
    acc.group[group].value = value;
    if (group == 2 || group == 0) acc.group[group].gmv = value;
    if (group == 3) acc.group[group].cart = value;
    return acc;
}

}  // namespace

TEST_CASE("accumulate: empty episode is all zeros") {
    auto log = make_log({make_ad(0, ObjectiveKind::Gmv)},
                        {AuctionEvent{0, 0, 0, {{0, make_features(0.1)}}}});
    EpisodeResult r;
    r.per_ad.resize(1);
    r.exhausted_at.resize(1);
    const Accumulators acc = accumulate(r, log);
    for (int k = 0; k < 4; ++k) CHECK(acc.group[k] == GroupAccumulators{});
}

TEST_CASE("accumulate: one gmv winner lands in group 2 and group 0") {
    auto log = make_log({make_ad(0, ObjectiveKind::Gmv)},
                        {AuctionEvent{0, 0, 0, {{0, make_features(0.1)}}}});
    EpisodeResult r;
    r.per_ad.resize(1);
    r.exhausted_at.resize(1);
    r.per_ad[0] = {0.5, 0.1, 1.0, 0.02, 1.0};  // cost, clicks, gmv, cart, objective

    const Accumulators acc = accumulate(r, log);
    CHECK(acc.group[2].gmv == 1.0);
    CHECK(acc.group[2].value == 1.0);
    CHECK(acc.group[2].cost == 0.5);
    CHECK(acc.group[0].gmv == 1.0);
    CHECK(acc.group[0].cost == 0.5);
    CHECK(acc.group[1] == GroupAccumulators{});
    CHECK(acc.group[3] == GroupAccumulators{});
}

TEST_CASE("accumulate: self-bidding winners count only toward the global group") {
    auto log = make_log({make_ad(0, ObjectiveKind::SelfBidding)},
                        {AuctionEvent{0, 0, 0, {{0, make_features(0.1)}}}});
    EpisodeResult r;
    r.per_ad.resize(1);
    r.exhausted_at.resize(1);
    r.per_ad[0] = {0.5, 0.1, 2.0, 0.02, 2.0};

    const Accumulators acc = accumulate(r, log);
    CHECK(acc.group[0].gmv == 2.0);
    CHECK(acc.group[0].value == 2.0);
    for (int k = 1; k < 4; ++k) CHECK(acc.group[k] == GroupAccumulators{});
}

TEST_CASE("accumulate rejects a result that does not match the log") {
    auto log = make_log({make_ad(0, ObjectiveKind::Gmv)},
                        {AuctionEvent{0, 0, 0, {{0, make_features(0.1)}}}});
    EpisodeResult r;
    r.per_ad.resize(3);
    CHECK_THROWS_AS(accumulate(r, log), DataError);
}

TEST_CASE("click score: volume ratio minus ppc ratio") {
    const Accumulators bench = acc_with(1, 10.0, 5.0, 10.0);

    CHECK(score_m1(bench, bench) == doctest::Approx(0.0));
    // 10% more clicks at identical ppc -> 1.1 - 1 = 0.1
    CHECK(score_m1(acc_with(1, 11.0, 5.5, 11.0), bench) == doctest::Approx(0.1));
    // equal clicks, 20% higher ppc -> 1 - 1.2 = -0.2
    CHECK(score_m1(acc_with(1, 10.0, 6.0, 10.0), bench) == doctest::Approx(-0.2));
}

TEST_CASE("click score: zero-click candidate takes the configured penalty") {
    const Accumulators bench = acc_with(1, 10.0, 5.0, 10.0);
    bool degenerate = false;
    CHECK(score_m1(acc_with(1, 0.0, 0.0, 0.0), bench, -1.0, &degenerate) == -1.0);
    CHECK(degenerate);
    CHECK(score_m1(acc_with(1, 0.0, 0.0, 0.0), bench, -2.5) == -2.5);
}

TEST_CASE("gmv and cart scores: value ratio minus cost ratio") {
    const Accumulators bench2 = acc_with(2, 1.0, 10.0, 100.0);
    CHECK(score_m2(bench2, bench2) == doctest::Approx(0.0));
    CHECK(score_m2(acc_with(2, 1.0, 10.0, 107.0), bench2) == doctest::Approx(0.07));
    CHECK(score_m2(acc_with(2, 1.0, 9.0, 100.0), bench2) == doctest::Approx(0.1));

    const Accumulators bench3 = acc_with(3, 1.0, 4.0, 20.0);
    CHECK(score_m3(bench3, bench3) == doctest::Approx(0.0));
    CHECK(score_m3(acc_with(3, 1.0, 4.0, 21.4), bench3) == doctest::Approx(0.07));
    CHECK(score_m3(acc_with(3, 1.0, 3.6, 20.0), bench3) == doctest::Approx(0.1));
}

TEST_CASE("global score: gmv ratio minus one minus |cost ratio - 1|") {
    const Accumulators bench = acc_with(0, 10.0, 50.0, 500.0);
    CHECK(score_m0(bench, bench) == doctest::Approx(0.0));
    CHECK(score_m0(acc_with(0, 10.0, 50.0, 525.0), bench) == doctest::Approx(0.05));
    // Collusion-style cost collapse: cost halves, gmv flat -> -0.5.
    CHECK(score_m0(acc_with(0, 10.0, 25.0, 500.0), bench) == doctest::Approx(-0.5));
    // Overspending is punished the same way.
    CHECK(score_m0(acc_with(0, 10.0, 75.0, 500.0), bench) == doctest::Approx(-0.5));
    // The absolute-value term can only subtract.
    CHECK(score_m0(acc_with(0, 10.0, 61.3, 530.0), bench) <= 530.0 / 500.0 - 1.0);
}

TEST_CASE("degenerate benchmark denominators raise errors") {
    const Accumulators cand = acc_with(1, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(score_m1(cand, acc_with(1, 0.0, 5.0, 0.0)), DataError);
    CHECK_THROWS_AS(score_m1(cand, acc_with(1, 10.0, 0.0, 10.0)), DataError);
    CHECK_THROWS_AS(score_m2(cand, acc_with(2, 1.0, 0.0, 10.0)), DataError);
    CHECK_THROWS_AS(score_m3(cand, acc_with(3, 1.0, 10.0, 0.0)), DataError);
    CHECK_THROWS_AS(score_m0(cand, acc_with(0, 1.0, 0.0, 10.0)), DataError);
}

TEST_CASE("combine: worst objective and weighted total") {
    SUBCASE("all zeros") {
        const auto [m_ad, m_all] = combine(0.0, 0.0, 0.0, 0.0, 1.2);
        CHECK(m_ad == 0.0);
        CHECK(m_all == 0.0);
    }
    SUBCASE("hand-computed mix") {
        const auto [m_ad, m_all] = combine(0.05, 0.1, -0.2, 0.3, 1.2);
        CHECK(m_ad == doctest::Approx(-0.2));
        CHECK(m_all == doctest::Approx(0.05 + 1.2 * -0.2));
    }
    SUBCASE("lambda zero turns the total into the global score") {
        const auto [m_ad, m_all] = combine(0.42, 0.1, 0.2, 0.3, 0.0);
        CHECK(m_ad == doctest::Approx(0.1));
        CHECK(m_all == doctest::Approx(0.42));
    }
    SUBCASE("m_ad is a lower bound of each objective score") {
        Rng rng(12);
        for (int i = 0; i < 200; ++i) {
            const double m1 = rng.uniform(-1, 1), m2 = rng.uniform(-1, 1),
                         m3 = rng.uniform(-1, 1);
            const auto [m_ad, m_all] = combine(0.0, m1, m2, m3, 1.2);
            CHECK(m_ad <= m1);
            CHECK(m_ad <= m2);
            CHECK(m_ad <= m3);
            (void)m_all;
        }
    }
}

TEST_CASE("constraint report") {
    auto log = make_log({make_ad(0, ObjectiveKind::Gmv), make_ad(1, ObjectiveKind::Click)},
                        {AuctionEvent{0, 0, 0, {{0, make_features(0.1)}}}});
    log.ads[0].floor = 0.5;
    log.ads[1].floor = 2.0;
    EpisodeResult r;
    r.per_ad.resize(2);
    r.exhausted_at.resize(2);
    r.per_ad[0] = {0.8, 0.1, 10.0, 0.0, 1.0};  // objective 1.0 >= floor 0.5
    r.per_ad[1] = {0.0, 0.0, 0.0, 0.0, 0.0};   // objective 0 < floor 2.0

    SUBCASE("eta zero is always satisfied") {
        const ConstraintDiagnostics d = constraint_report(r, log, 0.0);
        CHECK(d.rpm_satisfied);
        CHECK(d.rpm_ratio == doctest::Approx(0.08));
        CHECK(d.floor_satisfaction == doctest::Approx(0.5));
    }
    SUBCASE("take-rate below eta fails the rpm check") {
        const ConstraintDiagnostics d = constraint_report(r, log, 1.0);
        CHECK_FALSE(d.rpm_satisfied);
    }
    SUBCASE("zero floors are always satisfied") {
        log.ads[0].floor = 0.0;
        log.ads[1].floor = 0.0;
        const ConstraintDiagnostics d = constraint_report(r, log, 0.0);
        CHECK(d.floor_satisfaction == 1.0);
    }
}

TEST_CASE("scoring an episode against itself is exactly zero") {
    GenConfig cfg;
    cfg.n_ads = 40;
    cfg.n_auctions = 400;
    cfg.seed = 77;
    const LogPair logs = generate(cfg);
    const OcpcPolicy bench_policy;
    const EpisodeResult result = replay_episode(logs.train, bench_policy);
    const Accumulators bench = accumulate(result, logs.train);

    const ScoreReport r = score_episode(result, logs.train, bench);
    CHECK(std::abs(r.m0) <= 1e-12);
    CHECK(std::abs(r.m1) <= 1e-12);
    CHECK(std::abs(r.m2) <= 1e-12);
    CHECK(std::abs(r.m3) <= 1e-12);
    CHECK(std::abs(r.m_all) <= 1e-12);
}

TEST_CASE("scores are invariant under a common currency rescaling") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Accumulators cand, bench;
        for (int k = 0; k < 4; ++k) {
            cand.group[k] = {rng.uniform(1, 10), rng.uniform(1, 10), rng.uniform(1, 10),
                             rng.uniform(1, 10), rng.uniform(1, 10)};
            bench.group[k] = {rng.uniform(1, 10), rng.uniform(1, 10), rng.uniform(1, 10),
                              rng.uniform(1, 10), rng.uniform(1, 10)};
        }
        const double c = rng.uniform(0.1, 50.0);
        // Currency rescaling touches costs and GMV-denominated values.
        auto rescale = [&](Accumulators a) {
            for (int k = 0; k < 4; ++k) {
                a.group[k].cost *= c;
                a.group[k].gmv *= c;
                if (k == 0 || k == 2) a.group[k].value *= c;
            }
            return a;
        };
        const Accumulators cand_c = rescale(cand);
        const Accumulators bench_c = rescale(bench);

        CHECK(score_m0(cand, bench) == doctest::Approx(score_m0(cand_c, bench_c)).epsilon(1e-12));
        CHECK(score_m1(cand, bench) == doctest::Approx(score_m1(cand_c, bench_c)).epsilon(1e-12));
        CHECK(score_m2(cand, bench) == doctest::Approx(score_m2(cand_c, bench_c)).epsilon(1e-12));
        CHECK(score_m3(cand, bench) == doctest::Approx(score_m3(cand_c, bench_c)).epsilon(1e-12));
    }
}
