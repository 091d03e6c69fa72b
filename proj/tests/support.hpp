#ifndef SCDT_TESTS_SUPPORT_HPP
#define SCDT_TESTS_SUPPORT_HPP

// Shared helpers for the test binaries: fixture paths, a seeded generator of
// small supply chains, and independent oracles that re-derive results from
// raw event logs without touching the library's state machine.

#include "scdt/emulator.hpp"
#include "scdt/scor_catalog.hpp"
#include "scdt/subdt.hpp"
#include "scdt/topology.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace scdt::testing {

inline std::string source_path(const std::string& rel) { return std::string(SCDT_SOURCE_DIR) + "/" + rel; }
inline std::string fixture(const std::string& name) { return source_path("fixtures/case_study/" + name); }

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

inline std::shared_ptr<const Catalog> case_catalog() {
    static auto cat = std::make_shared<const Catalog>(Catalog::load_file(fixture("catalog.tsv")));
    return cat;
}

struct Case {
    SupplyChainSystem system;
    Scenario scenario;
};

inline Case case_study() { return {load_topology_file(fixture("topology.yaml")), load_scenario_file(fixture("scenario.yaml"))}; }

// ---------------------------------------------------------------------------
// seeded random supply chains: 1-2 suppliers, optional carrier, one
// manufacturer (one or three modules), 1-2 retailers; at most 6 members.

class CaseGenerator {
public:
    explicit CaseGenerator(std::uint64_t seed) : rng_(seed), seed_(seed) {}

    Case next() {
        const int suppliers = pick(1, 2);
        const bool carrier = pick(0, 1) == 1;
        const int retailers = pick(1, 2);
        const bool split = pick(0, 1) == 1;

        std::ostringstream y;
        y << "goal: generated\nmembers:\n";
        for (int s = 1; s <= suppliers; ++s) {
            y << "  - id: s" << s << "\n    role: Supplier\n    modules:\n      - id: main\n        blocks:\n"
              << "          - {id: make, kind: B2, processes: [sM1.1, sM1.3], core: sM1.3}\n"
              << "          - {id: ship, kind: B3, processes: [sD1.1, sD1.12], core: sD1.12}\n";
        }
        if (carrier) {
            y << "  - id: carrier\n    role: Transport\n    modules:\n      - id: main\n        blocks:\n"
              << "          - {id: obtain, kind: B1, processes: [sS1.2]}\n"
              << "          - {id: ship, kind: B3, processes: [sD1.12]}\n";
        }
        const std::string raw = split ? "raw" : "main";
        const std::string floor = split ? "floor" : "main";
        const std::string fin = split ? "fin" : "main";
        y << "  - id: maker\n    role: Manufacturer\n    self_transport: true\n    modules:\n";
        if (split) {
            y << "      - id: raw\n        blocks:\n"
              << "          - {id: obtain, kind: B1, processes: [sS1.1, sS1.2], core: sS1.2}\n"
              << "          - {id: back, kind: B4, processes: [sSR1.5]}\n"
              << "      - id: floor\n        blocks:\n"
              << "          - {id: make, kind: B2, processes: [sM1.1, sM1.2, sM1.3, sM1.6], core: sM1.3}\n"
              << "      - id: fin\n        blocks:\n"
              << "          - {id: ship, kind: B3, processes: [sD1.1, sD1.2, sD1.12], core: sD1.12}\n"
              << "          - {id: returns, kind: B5, processes: [sDR1.3]}\n";
        } else {
            y << "      - id: main\n        blocks:\n"
              << "          - {id: obtain, kind: B1, processes: [sS1.2]}\n"
              << "          - {id: make, kind: B2, processes: [sM1.1, sM1.3], core: sM1.3}\n"
              << "          - {id: ship, kind: B3, processes: [sD1.12]}\n"
              << "          - {id: returns, kind: B5, processes: [sDR1.3]}\n";
        }
        for (int r = 1; r <= retailers; ++r) {
            y << "  - id: r" << r << "\n    role: Retailer\n    modules:\n      - id: main\n        blocks:\n"
              << "          - {id: obtain, kind: B1, fulfillment: Retail, processes: [sS1.1, sS1.2], core: sS1.2}\n"
              << "          - {id: sell, kind: B3, fulfillment: Retail, processes: [sD4]}\n"
              << "          - {id: back, kind: B4, processes: [sSR1.5]}\n"
              << "          - {id: returns, kind: B5, processes: [sDR1.3]}\n";
        }
        y << "flows:\n";
        for (int s = 1; s <= suppliers; ++s) {
            y << "  - {from: s" << s << "/main, to: maker/" << raw << ", carrier: " << (carrier && s == 1 ? "carrier" : "maker")
              << "}\n";
        }
        if (split) {
            y << "  - {from: maker/raw, to: maker/floor}\n  - {from: maker/floor, to: maker/fin}\n";
        }
        for (int r = 1; r <= retailers; ++r) y << "  - {from: maker/" << fin << ", to: r" << r << "/main, carrier: maker}\n";

        Case c;
        c.system = build_topology(y.str());

        Scenario& sc = c.scenario;
        sc.seed = seed_ * 7919 + static_cast<std::uint64_t>(pick(0, 1 << 20));
        sc.horizon = 1000;
        sc.quoted_lead_time = pick(10, 60);
        sc.default_lead_time = TickDistribution::constant(pick(0, 2));
        Recipe product{"product", "maker", {}};
        for (int s = 1; s <= suppliers; ++s) {
            const auto item = "part" + std::to_string(s);
            product.inputs[item] = pick(1, 3);
            sc.bom.push_back({item, "s" + std::to_string(s), {}});
            sc.capacities.push_back({{"s" + std::to_string(s), "main"}, Rational(pick(1, 4), pick(1, 2))});
            sc.lead_times.push_back({{"s" + std::to_string(s), "main"}, {"maker", raw}, dist(1, 6)});
        }
        sc.bom.push_back(product);
        sc.capacities.push_back({{"maker", floor}, Rational(pick(1, 3), pick(1, 3))});
        for (int r = 1; r <= retailers; ++r) {
            const auto id = "r" + std::to_string(r);
            DemandSpec d;
            d.member = id;
            d.item = "product";
            d.rate = Rational(1, pick(6, 20));
            d.quantity = dist(1, 3);
            d.delivery_lead_time = dist(0, 3);
            sc.demand.push_back(d);
            sc.lead_times.push_back({{"maker", fin}, {id, "main"}, dist(1, 5)});
            if (pick(0, 2) > 0) sc.return_rates[id] = Rational(1, pick(10, 40));
        }
        for (const char* p : {"sM1.1", "sD1.1", "sS1.1"}) {
            if (pick(0, 1)) sc.process_times.push_back({p, std::nullopt, Rational(pick(0, 2))});
        }
        for (const char* p : {"sM1.3", "sD1.12", "sS1.2", "sDR1.3"}) {
            sc.unit_costs.push_back({p, std::nullopt, Rational(pick(0, 12), pick(1, 4))});
        }
        if (carrier) sc.unit_costs.push_back({"sD1.12", std::string("carrier"), Rational(pick(1, 6), 2)});

        switch (pick(0, 4)) {
        case 0: {
            const Tick s = pick(100, 700);
            sc.disruptions.push_back({DisruptionKind::MemberOutage, "maker", s, s + pick(20, 150), Rational(1)});
            break;
        }
        case 1: {
            const Tick s = pick(100, 700);
            sc.disruptions.push_back({DisruptionKind::CapacityDrop, "maker/" + floor, s, s + pick(50, 200), Rational(1, 2)});
            break;
        }
        case 2: {
            const Tick s = pick(0, 500);
            sc.disruptions.push_back({DisruptionKind::LeadTimeInflation, "maker", s, s + pick(50, 300), Rational(1)});
            break;
        }
        case 3: {
            const Tick s = pick(0, 500);
            sc.disruptions.push_back({DisruptionKind::DemandSurge, "r1", s, s + pick(50, 300), Rational(1)});
            break;
        }
        default: break;
        }
        return c;
    }

private:
    std::int64_t pick(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
    TickDistribution dist(std::int64_t lo, std::int64_t hi) {
        const auto a = pick(lo, hi);
        return pick(0, 1) ? TickDistribution::constant(a) : TickDistribution::uniform(a, std::max(a, pick(lo, hi)));
    }

    std::mt19937_64 rng_;
    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// oracles

/// Single pass over the raw log: pairs Start/Complete of the scope process
/// per (module, block, order, item) and evaluates the metric definition.
inline MetricValue metric_oracle(const EventLog& log, const std::string& member, const MetricDef& def, Tick t0, Tick t1,
                                 Tick quoted_lead_time) {
    using Key = std::tuple<std::string, BlockKind, std::string, std::string>;
    std::map<Key, Tick> open;
    std::map<std::string, Tick> first_seen;
    MetricValue out{def.code, t0, t1, std::nullopt, 0};
    Rational sum{0};
    std::int64_t hits = 0;
    for (const auto& e : log) {
        if (e.member != member) continue;
        if (!first_seen.count(e.payload.order_ref)) first_seen[e.payload.order_ref] = e.time;
        if (e.process != def.scope) continue;
        const Key key{e.module, e.block, e.payload.order_ref, e.payload.item};
        if (e.phase == Phase::Start) {
            open[key] = e.time;
            continue;
        }
        const Tick start = open.at(key);
        open.erase(key);
        if (def.formula_kind == FormulaKind::Utilization) {
            const Tick lo = start > t0 ? start : t0;
            const Tick hi = e.time < t1 ? e.time : t1;
            if (hi > lo) {
                sum += Rational(hi - lo);
                ++out.sample_count;
            }
            continue;
        }
        if (e.time < t0 || e.time >= t1) continue;
        ++out.sample_count;
        if (def.formula_kind == FormulaKind::CycleTime) sum += Rational(e.time - start);
        if (def.formula_kind == FormulaKind::Cost) sum += e.payload.unit_cost * Rational(e.payload.quantity);
        if (def.formula_kind == FormulaKind::Ratio && e.time - first_seen.at(e.payload.order_ref) <= quoted_lead_time) ++hits;
    }
    switch (def.formula_kind) {
    case FormulaKind::CycleTime:
        if (out.sample_count) out.value = sum / Rational(out.sample_count);
        break;
    case FormulaKind::Ratio:
        if (out.sample_count) out.value = Rational(hits, out.sample_count);
        break;
    case FormulaKind::Cost: out.value = sum; break;
    case FormulaKind::Utilization: out.value = sum / Rational(t1 - t0); break;
    }
    return out;
}

/// Empty string when the log conserves material: per member and item, over
/// every prefix, units leaving (distribute / return-upstream starts, BOM
/// consumption at make starts) never exceed units that arrived
/// (obtain / make / return-from-downstream completions).
inline std::string conservation_violation(const SupplyChainSystem& system, const Scenario& sc, const EventLog& log) {
    std::map<std::pair<std::string, std::string>, std::int64_t> stock;
    std::map<std::string, const Block*> blocks;
    for (const auto& m : system.members) {
        for (const auto& mod : m.modules) {
            for (const auto& b : mod.blocks) blocks[m.id + "/" + mod.id + "/" + std::string(to_string(b.kind))] = &b;
        }
    }
    std::set<std::tuple<std::string, std::string, std::string, std::string>> started;
    for (const auto& e : log) {
        const auto* b = blocks.at(e.member + "/" + e.module + "/" + std::string(to_string(e.block)));
        const bool first = e.process == b->processes.front();
        const bool last = e.process == b->processes.back();
        if (e.phase == Phase::Start && first) {
            const auto tag = std::make_tuple(e.member, e.module + std::string(to_string(e.block)), e.payload.order_ref, e.payload.item);
            if (!started.insert(tag).second) continue;
            if (e.block == BlockKind::B2_Make) {
                if (const auto* r = sc.recipe_for(e.payload.item)) {
                    for (const auto& [input, units] : r->inputs) stock[{e.member, input}] -= units * e.payload.quantity;
                }
            } else if (e.block == BlockKind::B3_Distribute || e.block == BlockKind::B4_ReturnToUpstream) {
                stock[{e.member, e.payload.item}] -= e.payload.quantity;
            }
        }
        if (e.phase == Phase::Complete && last) {
            if (e.block == BlockKind::B1_Obtain || e.block == BlockKind::B2_Make ||
                e.block == BlockKind::B5_ReturnFromDownstream) {
                stock[{e.member, e.payload.item}] += e.payload.quantity;
            }
            started.erase(std::make_tuple(e.member, e.module + std::string(to_string(e.block)), e.payload.order_ref,
                                          e.payload.item));
        }
        for (const auto& [key, level] : stock) {
            if (level < 0) {
                return "seq " + std::to_string(e.seq) + ": " + key.first + " holds " + std::to_string(level) + " of " +
                       key.second;
            }
        }
    }
    return {};
}

/// Empty string when, for every order and member, the first obtain start is
/// not after the first make start, which is not after the first distribute
/// start; and every Complete follows its Start.
inline std::string causality_violation(const EventLog& log) {
    std::map<std::pair<std::string, std::string>, std::map<BlockKind, Tick>> first_start;
    std::map<std::tuple<std::string, std::string, BlockKind, std::string, std::string, std::string>, Tick> open;
    Tick last = 0;
    for (const auto& e : log) {
        if (e.time < last) return "time goes backwards at seq " + std::to_string(e.seq);
        last = e.time;
        const auto key = std::make_tuple(e.member, e.module, e.block, e.process, e.payload.order_ref, e.payload.item);
        if (e.phase == Phase::Start) {
            first_start[{e.payload.order_ref, e.member}].emplace(e.block, e.time);
            open.emplace(key, e.time);
        } else {
            auto it = open.find(key);
            if (it == open.end()) return "Complete without Start at seq " + std::to_string(e.seq);
            if (it->second > e.time) return "Complete before Start at seq " + std::to_string(e.seq);
            open.erase(it);
        }
    }
    for (const auto& [key, starts] : first_start) {
        auto at = [&](BlockKind k) -> std::optional<Tick> {
            auto it = starts.find(k);
            return it == starts.end() ? std::nullopt : std::optional<Tick>(it->second);
        };
        const auto b1 = at(BlockKind::B1_Obtain), b2 = at(BlockKind::B2_Make), b3 = at(BlockKind::B3_Distribute);
        if ((b1 && b2 && *b1 > *b2) || (b2 && b3 && *b2 > *b3) || (b1 && b3 && *b1 > *b3)) {
            return "order " + key.first + " at " + key.second + " starts out of B1/B2/B3 order";
        }
    }
    return {};
}

inline EventLog member_slice(const EventLog& log, const std::string& member) {
    EventFilter f;
    f.member = member;
    return replay(log, f);
}

} // namespace scdt::testing

#endif // SCDT_TESTS_SUPPORT_HPP
