#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace scdt;
using namespace scdt::testing;

namespace {

std::string single_member(const std::string& role, const std::string& kind) {
    return "members:\n  - id: m\n    role: " + role + "\n    modules:\n      - id: main\n        blocks:\n"
           "          - {id: b, kind: " + kind + ", processes: [p]}\n";
}

SupplyChainSystem with_extra_flow(const std::string& flow) {
    auto text = slurp(fixture("topology.yaml"));
    text += "  - " + flow + "\n";
    return build_topology(text);
}

} // namespace

TEST_CASE("case study builds into six members and eight modules") {
    const auto sys = load_topology_file(fixture("topology.yaml"));
    CHECK(sys.members.size() == 6);
    CHECK(sys.module_count() == 8);
    CHECK(sys.find_member("manufactory")->modules.size() == 3);
    for (const char* id : {"supplier1", "supplier2", "transport", "retailer1", "retailer2"}) {
        CHECK(sys.find_member(id)->modules.size() == 1);
    }
    CHECK_FALSE(sys.goal.empty());
}

TEST_CASE("case study validates with its catalog") {
    const auto sys = load_topology_file(fixture("topology.yaml"));
    const auto report = validate_topology(sys, case_catalog().get());
    CHECK(report.valid());
    CHECK(report.violations.empty());
}

TEST_CASE("block structure matches the golden dump") {
    const auto sys = load_topology_file(fixture("topology.yaml"));
    CHECK(block_structure(sys) == slurp(source_path("tests/golden_structure.txt")));
}

TEST_CASE("manufactory modules carry the figure's block split") {
    const auto sys = load_topology_file(fixture("topology.yaml"));
    const auto* m = sys.find_member("manufactory");
    auto kinds = [&](const char* mod) {
        std::set<BlockKind> out;
        for (const auto& b : m->find_module(mod)->blocks) out.insert(b.kind);
        return out;
    };
    CHECK(kinds("raw-warehouse") == std::set<BlockKind>{BlockKind::B1_Obtain, BlockKind::B4_ReturnToUpstream});
    CHECK(kinds("shop-floor") == std::set<BlockKind>{BlockKind::B2_Make});
    CHECK(kinds("finished-warehouse") ==
          std::set<BlockKind>{BlockKind::B3_Distribute, BlockKind::B5_ReturnFromDownstream});
}

TEST_CASE("build errors") {
    auto code_of = [](const std::string& text) {
        try {
            build_topology(text);
        } catch (const Error& e) {
            return e.code();
        }
        return std::string("none");
    };
    CHECK(code_of("members: []\n") == "topology.NoMembers");
    CHECK(code_of(slurp(fixture("topology.yaml")) + "  - {from: supplier3/main, to: manufactory/raw-warehouse}\n") ==
          "topology.UnknownReference");
    CHECK(code_of(single_member("Supplier", "B2") + single_member("Supplier", "B3").substr(9)) == "topology.DuplicateId");
    CHECK(code_of("members: [unclosed\n") == "topology.ParseError");
}

TEST_CASE("material flow without any carrier is TRANSPORT_REQUIRED") {
    const auto sys = with_extra_flow("{from: supplier2/main, to: retailer1/main}");
    const auto report = validate_topology(sys);
    CHECK_FALSE(report.valid());
    CHECK(report.has("TRANSPORT_REQUIRED"));
}

TEST_CASE("carrier that cannot transport is rejected") {
    const auto sys = with_extra_flow("{from: supplier2/main, to: retailer1/main, carrier: supplier1}");
    CHECK(validate_topology(sys).has("CARRIER_INCAPABLE"));
}

TEST_CASE("role to block table agrees with brute-force enumeration") {
    const std::map<std::string, std::set<std::string>> allowed{
        {"Supplier", {"B2", "B3", "B5"}},
        {"Manufacturer", {"B1", "B2", "B3", "B4", "B5"}},
        {"Transport", {"B1", "B3"}},
        {"Retailer", {"B1", "B3", "B4", "B5"}},
        {"Customer", {"B1", "B4"}},
    };
    for (const auto& [role, kinds] : allowed) {
        for (const char* kind : {"B1", "B2", "B3", "B4", "B5"}) {
            const auto report = validate_topology(build_topology(single_member(role, kind)));
            CAPTURE(role);
            CAPTURE(kind);
            CHECK(report.has("BLOCK_ROLE_MISMATCH") == !kinds.count(kind));
        }
    }
}

TEST_CASE("unknown process and process of another block kind") {
    const auto cat = case_catalog();
    auto sys = build_topology(single_member("Supplier", "B2"));
    CHECK(validate_topology(sys, cat.get()).has("UNKNOWN_PROCESS"));
    sys.members[0].modules[0].blocks[0].processes = {"sD1.1"};
    CHECK(validate_topology(sys, cat.get()).has("PROCESS_BLOCK_MISMATCH"));
    sys.members[0].modules[0].blocks[0].processes = {"sM1.1"};
    CHECK(validate_topology(sys, cat.get()).valid());
}

TEST_CASE("system without flows is valid but flagged") {
    const auto two = build_topology(single_member("Supplier", "B2") +
                                    "  - id: n\n    role: Retailer\n    modules:\n      - id: main\n        blocks:\n"
                                    "          - {id: b, kind: B1, processes: [p]}\n");
    const auto report = validate_topology(two);
    CHECK(report.valid());
    CHECK(report.has("DISCONNECTED"));
}

TEST_CASE("decompose_member") {
    MemberSpec maker{"manufactory", Role::Manufacturer, true, Fulfillment::MTS,
                     {"obtain", "store-raw", "make", "store-finished", "distribute", "returns"}};
    const auto m = decompose_member(maker);
    REQUIRE(m.modules.size() == 3);
    auto kinds_of = [&](const char* id) {
        std::set<BlockKind> out;
        for (const auto& b : m.find_module(id)->blocks) out.insert(b.kind);
        return out;
    };
    CHECK(kinds_of("raw-warehouse") == std::set<BlockKind>{BlockKind::B1_Obtain, BlockKind::B4_ReturnToUpstream});
    CHECK(kinds_of("shop-floor") == std::set<BlockKind>{BlockKind::B2_Make});
    CHECK(kinds_of("finished-warehouse") ==
          std::set<BlockKind>{BlockKind::B3_Distribute, BlockKind::B5_ReturnFromDownstream});

    MemberSpec supplier{"s", Role::Supplier, false, Fulfillment::MTS, {"make", "distribute", "return-in"}};
    const auto s = decompose_member(supplier);
    REQUIRE(s.modules.size() == 1);
    std::set<BlockKind> sk;
    for (const auto& b : s.modules[0].blocks) sk.insert(b.kind);
    CHECK(sk == std::set<BlockKind>{BlockKind::B2_Make, BlockKind::B3_Distribute, BlockKind::B5_ReturnFromDownstream});

    MemberSpec empty{"e", Role::Supplier, false, Fulfillment::MTS, {}};
    CHECK_THROWS_WITH_AS(decompose_member(empty), doctest::Contains("UnknownFunction"), Error);
    MemberSpec odd{"e", Role::Supplier, false, Fulfillment::MTS, {"juggle"}};
    CHECK_THROWS_AS(decompose_member(odd), Error);
}

TEST_CASE("decompose_member is idempotent") {
    const std::vector<std::string> functions{"obtain", "make", "distribute", "returns", "return-out",
                                             "return-in", "store-raw", "store-finished"};
    for (unsigned mask = 1; mask < (1u << functions.size()); ++mask) {
        MemberSpec spec{"x", Role::Manufacturer, false, Fulfillment::MTO, {}};
        for (std::size_t i = 0; i < functions.size(); ++i) {
            if (mask & (1u << i)) spec.functions.insert(functions[i]);
        }
        Member once;
        try {
            once = decompose_member(spec);
        } catch (const Error&) {
            continue;
        }
        CHECK(decompose_member(member_spec_of(once)) == once);
    }
}

TEST_CASE("single-block system dumps to three lines") {
    const auto sys = build_topology(single_member("Supplier", "B2"));
    const auto dump = block_structure(sys);
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 3);
}

TEST_CASE("block structure ignores declaration order") {
    const auto sys = load_topology_file(fixture("topology.yaml"));
    const auto golden = block_structure(sys);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        auto copy = sys;
        std::shuffle(copy.members.begin(), copy.members.end(), rng);
        std::shuffle(copy.flows.begin(), copy.flows.end(), rng);
        for (auto& m : copy.members) {
            std::shuffle(m.modules.begin(), m.modules.end(), rng);
            for (auto& mod : m.modules) std::shuffle(mod.blocks.begin(), mod.blocks.end(), rng);
        }
        CHECK(block_structure(copy) == golden);
    }
}

TEST_CASE("block structure separates distinct generated systems") {
    std::set<std::string> dumps;
    std::set<std::string> sources;
    CaseGenerator gen(77);
    for (int i = 0; i < 40; ++i) {
        const auto c = gen.next();
        const auto dump = block_structure(c.system);
        std::ostringstream key;
        for (const auto& m : c.system.members) key << m.id << m.modules.size() << ";";
        key << c.system.flows.size();
        if (sources.insert(key.str()).second) CHECK(dumps.insert(dump).second);
    }
}

TEST_CASE("validation never throws on mutated documents") {
    const auto base = slurp(fixture("topology.yaml"));
    std::mt19937_64 rng(11);
    const std::string alphabet = "abcB123:-{}[], \n/";
    int built = 0;
    for (int i = 0; i < 300; ++i) {
        auto text = base;
        const int edits = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < edits; ++k) {
            const auto pos = rng() % text.size();
            switch (rng() % 3) {
            case 0: text.erase(pos, 1 + rng() % 8); break;
            case 1: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
            default: text[pos] = alphabet[rng() % alphabet.size()]; break;
            }
        }
        SupplyChainSystem sys;
        try {
            sys = build_topology(text);
        } catch (const Error&) {
            continue;
        }
        ++built;
        CHECK_NOTHROW(validate_topology(sys, case_catalog().get()));
    }
    CHECK(built > 0);
}
