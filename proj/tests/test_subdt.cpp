#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace scdt;
using namespace scdt::testing;

namespace {

struct Fixture {
    Case c = case_study();
    EventLog log = run_scenario(c.system, c.scenario);

    SubDigitalTwin twin(const std::string& member, ChannelConfig channel = {}) const {
        return SubDigitalTwin(*c.system.find_member(member), case_catalog(), c.scenario, channel);
    }
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

ActivityEvent ev(std::uint64_t seq, const std::string& module, BlockKind block, const std::string& process, Phase phase,
                 Tick time, const std::string& order, std::int64_t qty = 1, Rational cost = Rational(0)) {
    ActivityEvent e;
    e.seq = seq;
    e.member = "transport";
    e.module = module;
    e.block = block;
    e.process = process;
    e.phase = phase;
    e.time = time;
    e.payload = {"steel", qty, cost, order};
    return e;
}

SubDigitalTwin loaded(const std::string& member, const std::vector<ActivityEvent>& events, ChannelConfig ch = {}) {
    auto t = fx().twin(member, ch);
    for (const auto& e : events) t.ingest(e);
    t.flush();
    return t;
}

} // namespace

TEST_CASE("start and complete give a cycle time") {
    const auto t = loaded("transport", {ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 3, "o1"),
                                        ev(2, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 7, "o1")});
    const auto mv = t.compute_metric("sS1.2:receive-product-cycle-time", 0, 10);
    REQUIRE(mv.value);
    CHECK(*mv.value == Rational(4));
    CHECK(mv.sample_count == 1);

    const auto two = loaded("transport", {ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 0, "o1"),
                                          ev(2, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 1, "o2"),
                                          ev(3, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 4, "o1"),
                                          ev(4, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 7, "o2")});
    CHECK(*two.compute_metric("sS1.2:receive-product-cycle-time", 0, 10).value == Rational(5));
    // window excludes the second completion
    CHECK(*two.compute_metric("sS1.2:receive-product-cycle-time", 0, 7).value == Rational(4));
    CHECK_FALSE(two.compute_metric("sS1.2:receive-product-cycle-time", 8, 10).value);
}

TEST_CASE("cost and utilization on a hand-built journal") {
    const auto t = loaded("transport", {ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 2, "o1", 3, Rational(1, 4)),
                                        ev(2, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 6, "o1", 3, Rational(1, 4)),
                                        ev(3, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 5, "o2", 2, Rational(1, 2)),
                                        ev(4, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 9, "o2", 2, Rational(1, 2))});
    const auto cost = t.compute_metric("sS1.2:receiving-cost", 0, 10);
    CHECK(*cost.value == Rational(7, 4));
    CHECK(cost.sample_count == 2);
    CHECK(*t.compute_metric("sS1.2:receiving-cost", 20, 30).value == Rational(0));
}

TEST_CASE("utilization counts overlap with the window") {
    const auto& f = fx();
    auto t = f.twin("manufactory");
    t.ingest(member_slice(f.log, "manufactory"));
    t.flush();
    const auto* def = case_catalog()->find_metric("sM1.3:capacity-utilisation");
    REQUIRE(def);
    const auto mv = t.compute_metric(def->code, 100, 400);
    CHECK(mv == metric_oracle(f.log, "manufactory", *def, 100, 400, f.c.scenario.quoted_lead_time));
    CHECK(*mv.value <= Rational(1));
    CHECK(Rational(0) < *mv.value);
}

TEST_CASE("duplicates are idempotent") {
    const auto& f = fx();
    const auto slice = member_slice(f.log, "retailer1");
    auto once = f.twin("retailer1");
    auto twice = f.twin("retailer1");
    for (const auto& e : slice) {
        once.ingest(e);
        twice.ingest(e);
        twice.ingest(e);
    }
    once.flush();
    twice.flush();
    CHECK(twice.duplicates() == slice.size());
    CHECK(twice.journal() == once.journal());
    CHECK(twice.snapshot(1000) == once.snapshot(1000));
}

TEST_CASE("bounded reordering and duplicates converge to the in-order state") {
    const auto& f = fx();
    std::mt19937_64 rng(99);
    for (const char* member : {"transport", "manufactory", "retailer2"}) {
        const auto slice = member_slice(f.log, member);
        const auto reference = loaded(member, slice.events());
        for (Tick delay : {0, 3, 10}) {
            for (int round = 0; round < 10; ++round) {
                std::vector<std::pair<Tick, ActivityEvent>> feed;
                for (const auto& e : slice) {
                    feed.emplace_back(e.time + static_cast<Tick>(rng() % (delay + 1)), e);
                    if (rng() % 5 == 0) feed.emplace_back(e.time + static_cast<Tick>(rng() % (delay + 1)), e);
                }
                std::stable_sort(feed.begin(), feed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
                ChannelConfig ch;
                ch.max_delay = delay;
                auto t = f.twin(member, ch);
                for (const auto& [arrival, e] : feed) t.ingest(e);
                t.flush();
                CAPTURE(member);
                CAPTURE(delay);
                CHECK(t.rejected() == 0);
                CHECK(t.quarantine().empty());
                CHECK(t.journal() == reference.journal());
                CHECK(t.snapshot(1000) == reference.snapshot(1000));
            }
        }
    }
}

TEST_CASE("metric applicability") {
    const auto t = fx().twin("transport");
    const auto codes = t.applicable_metrics();
    CHECK(std::find(codes.begin(), codes.end(), "sS1.2:receiving-cost") != codes.end());
    CHECK(std::find(codes.begin(), codes.end(), "sM1.3:fill-rate") == codes.end());
    CHECK_THROWS_WITH_AS(t.compute_metric("sM1.3:fill-rate", 0, 10), doctest::Contains("subdt.MetricNotApplicable"), Error);
    CHECK_THROWS_AS(t.compute_metric("no-such-metric", 0, 10), Error);
}

TEST_CASE("every applicable metric agrees with the single-pass oracle") {
    const auto& f = fx();
    for (const auto& m : f.c.system.members) {
        auto t = f.twin(m.id);
        t.ingest(member_slice(f.log, m.id));
        t.flush();
        CHECK(t.quarantine().empty());
        for (const auto& code : t.applicable_metrics()) {
            const auto* def = case_catalog()->find_metric(code);
            for (auto [t0, t1] : {std::pair<Tick, Tick>{0, 1000}, {0, 100}, {250, 600}, {999, 1000}}) {
                CAPTURE(m.id);
                CAPTURE(code);
                CHECK(t.compute_metric(code, t0, t1) == metric_oracle(f.log, m.id, *def, t0, t1, f.c.scenario.quoted_lead_time));
            }
        }
    }
}

TEST_CASE("snapshots") {
    const auto& f = fx();
    CHECK(f.twin("retailer1").snapshot(0).empty());
    const auto slice = member_slice(f.log, "retailer1");
    auto t = f.twin("retailer1");
    t.ingest(slice);
    t.flush();
    CHECK(t.snapshot(slice.begin()->time - 1).empty());
    for (Tick at : {Tick{0}, Tick{50}, Tick{333}, Tick{999}}) CHECK(t.snapshot(at) == t.fold(slice.events(), at));
    const auto s = t.snapshot(999);
    CHECK(s.count("completed/main/B3/sD4"));
    // snapshot is a prefix fold: later events never change an earlier snapshot
    std::vector<ActivityEvent> prefix;
    for (const auto& e : slice) {
        if (e.time <= 400) prefix.push_back(e);
    }
    CHECK(loaded("retailer1", prefix).snapshot(400) == t.snapshot(400));
}

TEST_CASE("foreign events are refused") {
    auto t = fx().twin("retailer1");
    auto e = *fx().log.begin();
    e.member = "retailer2";
    CHECK_THROWS_WITH_AS(t.ingest(e), doctest::Contains("subdt.ForeignEvent"), Error);
}

TEST_CASE("divergence") {
    const auto& f = fx();
    const auto slice = member_slice(f.log, "manufactory");
    const auto full = loaded("manufactory", slice.events());
    CHECK(divergence(full, slice) == Rational(0));

    std::vector<ActivityEvent> lossy;
    std::size_t dropped = 0;
    for (const auto& e : slice) {
        if (e.phase == Phase::Complete && e.seq % 7 == 0) {
            ++dropped;
            continue;
        }
        lossy.push_back(e);
    }
    REQUIRE(dropped > 0);
    const auto twin = loaded("manufactory", lossy);
    const auto d = divergence(twin, slice);
    CHECK(Rational(0) < d);
    CHECK(d <= Rational(1));

    // key-count oracle
    const Tick at = slice.events().back().time;
    const auto mine = twin.snapshot(at);
    const auto truth = full.snapshot(at);
    std::set<std::string> keys;
    std::size_t same = 0;
    for (const auto& [k, v] : mine) {
        keys.insert(k);
        auto it = truth.find(k);
        if (it != truth.end() && it->second == v) ++same;
    }
    for (const auto& [k, v] : truth) keys.insert(k);
    CHECK(d == Rational(1) - Rational(static_cast<std::int64_t>(same), static_cast<std::int64_t>(keys.size())));
    CHECK(divergence(f.twin("manufactory"), EventLog{}) == Rational(0));
}

TEST_CASE("drop policies") {
    const auto orphan = ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Complete, 5, "o1");
    const auto sell = ev(2, "main", BlockKind::B3_Distribute, "sD1.12", Phase::Start, 6, "o1");
    for (auto policy : {DropPolicy::Reject, DropPolicy::Quarantine}) {
        ChannelConfig ch;
        ch.policy = policy;
        auto t = loaded("transport", {orphan, sell}, ch);
        CAPTURE(to_string(policy));
        REQUIRE_FALSE(t.quarantine().empty());
        CHECK(t.quarantine().front().kind == AnomalyKind::OrphanComplete);
        CHECK(t.snapshot(10).at("orphans") == "1");
        if (policy == DropPolicy::Reject) {
            CHECK(t.rejected() == 1);
            CHECK(t.journal().empty());
        } else {
            CHECK(t.rejected() == 0);
            REQUIRE(t.quarantine().size() == 2);
            CHECK(t.quarantine()[1].kind == AnomalyKind::NegativeInventory);
            CHECK(t.journal().size() == 1);
        }
    }
    // late arrivals
    for (auto policy : {DropPolicy::Reject, DropPolicy::Quarantine}) {
        ChannelConfig ch;
        ch.policy = policy;
        auto t = fx().twin("transport", ch);
        t.ingest(ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 10, "a"));
        t.ingest(ev(2, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 30, "b"));
        t.ingest(ev(3, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 5, "c"));
        t.flush();
        if (policy == DropPolicy::Reject) {
            CHECK(t.rejected() == 1);
        } else {
            REQUIRE(t.quarantine().size() == 1);
            CHECK(t.quarantine()[0].kind == AnomalyKind::Late);
        }
        CHECK(t.journal().size() == 2);
    }
    auto dup = loaded("transport", {ev(1, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 1, "a"),
                                    ev(2, "main", BlockKind::B1_Obtain, "sS1.2", Phase::Start, 2, "a")});
    CHECK(dup.rejected() == 1);
}

TEST_CASE("what-if requires a warm model") {
    const auto cold = fx().twin("manufactory");
    CHECK_FALSE(cold.warm());
    CHECK_THROWS_WITH_AS(cold.what_if({}, 500), doctest::Contains("subdt.ModelNotWarm"), Error);
}

TEST_CASE("identity what-if equals a forward run of the fitted model") {
    const auto& f = fx();
    for (const char* member : {"manufactory", "retailer1", "supplier2"}) {
        auto t = f.twin(member);
        t.ingest(member_slice(f.log, member));
        t.flush();
        REQUIRE(t.warm());
        const auto vm = t.fit({}, 1000);
        CHECK(vm.system.members.size() == 1);
        const auto log = run_scenario(vm.system, vm.scenario);
        SubDigitalTwin forward(vm.system.members.front(), case_catalog(), vm.scenario);
        forward.ingest(log);
        forward.flush();
        const auto pred = t.what_if({}, 1000);
        CHECK(pred.tag == "predicted");
        REQUIRE(pred.metrics.size() == forward.applicable_metrics().size());
        for (const auto& mv : pred.metrics) CHECK(mv == forward.compute_metric(mv.code, 0, 1000));
        CHECK(t.what_if({}, 1000).metrics == pred.metrics);
    }
}

TEST_CASE("perturbations reach the fitted model") {
    const auto& f = fx();
    auto t = f.twin("manufactory");
    t.ingest(member_slice(f.log, "manufactory"));
    t.flush();
    const auto base = t.fit({}, 1000);
    const auto doubled = t.fit({Rational(2), Rational(1), Rational(1)}, 1000);
    REQUIRE(base.scenario.demand.size() == 1);
    CHECK(*doubled.scenario.demand[0].rate == std::min(Rational(1), *base.scenario.demand[0].rate * Rational(2)));
    const auto faster = t.fit({Rational(1), Rational(3), Rational(1)}, 1000);
    REQUIRE(faster.scenario.capacities.size() == base.scenario.capacities.size());
    for (std::size_t i = 0; i < base.scenario.capacities.size(); ++i) {
        CHECK(faster.scenario.capacities[i].units_per_tick == base.scenario.capacities[i].units_per_tick * Rational(3));
    }
    const auto none = t.what_if({Rational(0), Rational(1), Rational(1)}, 1000);
    for (const auto& mv : none.metrics) CHECK(mv.sample_count == 0);
    CHECK_THROWS_AS(t.fit({Rational(1), Rational(0), Rational(1)}, 1000), Error);
}

TEST_CASE("moving-average forecaster") {
    const MovingAverageForecaster ma(2, 10);
    CHECK(ma.rate({}, 0) == Rational(0));
    CHECK(ma.rate({1, 2, 3, 15}, 20) == Rational(4, 20));
    CHECK(ma.rate({1, 2, 3, 15}, 30) == Rational(1, 20));
    CHECK(ma.rate({1, 2}, 5) == Rational(2, 5));
}

TEST_CASE("metric export line") {
    MetricValue v{"x", 0, 10, Rational(3, 2), 4};
    CHECK(metric_to_tsv("m", v) == "m\tx\t[0,10)\t3/2\t4");
    v.value.reset();
    CHECK(metric_to_tsv("m", v) == "m\tx\t[0,10)\tabsent\t4");
}
