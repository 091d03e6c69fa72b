#ifndef SCDT_EMULATOR_HPP
#define SCDT_EMULATOR_HPP

#include "scdt/block_kind.hpp"
#include "scdt/core.hpp"
#include "scdt/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scdt {

enum class Phase { Start, Complete };

std::string_view to_string(Phase phase) noexcept;

struct Payload {
    std::string item;
    std::int64_t quantity = 0;
    Rational unit_cost{0};
    std::string order_ref;

    bool operator==(const Payload&) const = default;
};

struct ActivityEvent {
    std::uint64_t seq = 0;
    std::string member;
    std::string module;
    BlockKind block = BlockKind::B1_Obtain;
    std::string process;
    Phase phase = Phase::Start;
    Tick time = 0;
    Payload payload;

    bool operator==(const ActivityEvent&) const = default;
};

/// Append-only, ordered by (time, seq): seq strictly increasing, time nondecreasing.
///
/// Export format: one event per line, tab-separated
/// `seq member module block process phase time item quantity unit_cost order_ref`,
/// block as B1..B5, unit_cost as "p/q".
class EventLog {
public:
    /// Errors: emulator.LogOrder when the ordering invariant would break.
    void append(ActivityEvent event);

    const std::vector<ActivityEvent>& events() const noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    auto begin() const noexcept { return events_.begin(); }
    auto end() const noexcept { return events_.end(); }

    std::string to_tsv() const;
    /// Errors: emulator.ParseError, emulator.LogOrder.
    static EventLog from_tsv(const std::string& text);
    std::uint64_t hash() const;

    bool operator==(const EventLog&) const = default;

private:
    std::vector<ActivityEvent> events_;
};

std::string event_to_tsv(const ActivityEvent& event);

/// A discretized tick (or quantity) distribution.
struct TickDistribution {
    std::int64_t lo = 0;
    std::int64_t hi = 0; ///< lo == hi means constant

    static TickDistribution constant(std::int64_t v) { return {v, v}; }
    static TickDistribution uniform(std::int64_t lo, std::int64_t hi) { return {lo, hi}; }
    bool operator==(const TickDistribution&) const = default;
};

/// Customer demand arriving at one member.
/// Either Bernoulli-per-tick arrivals with probability `rate`, or one arrival
/// every `period` ticks starting at `offset`.
struct DemandSpec {
    std::string member;
    std::string item;
    std::optional<Rational> rate;
    std::optional<Tick> period;
    Tick offset = 0;
    TickDistribution quantity = TickDistribution::constant(1);
    TickDistribution delivery_lead_time = TickDistribution::constant(0);

    bool operator==(const DemandSpec&) const = default;
};

/// `inputs` are units consumed per output unit. No inputs: a raw item.
struct Recipe {
    std::string item;
    std::string made_by;
    std::map<std::string, std::int64_t> inputs;

    bool operator==(const Recipe&) const = default;
};

/// Items bought from outside the modelled system.
struct ExternalSupply {
    std::string item;
    TickDistribution lead_time = TickDistribution::constant(0);

    bool operator==(const ExternalSupply&) const = default;
};

/// Single-server capacity of a make block, in units per tick.
struct CapacitySpec {
    EndpointRef at;
    Rational units_per_tick{1};

    bool operator==(const CapacitySpec&) const = default;
};

struct LeadTimeSpec {
    EndpointRef from;
    EndpointRef to;
    TickDistribution ticks = TickDistribution::constant(1);

    bool operator==(const LeadTimeSpec&) const = default;
};

/// Per-process parameter; a member-specific entry overrides the global one.
struct ProcessParam {
    std::string process;
    std::optional<std::string> member;
    Rational value{0};

    bool operator==(const ProcessParam&) const = default;
};

enum class DisruptionKind { MemberOutage, CapacityDrop, LeadTimeInflation, DemandSurge };

std::string_view to_string(DisruptionKind kind) noexcept;
std::optional<DisruptionKind> parse_disruption_kind(std::string_view text) noexcept;

/// Window is [start, end).
///  - MemberOutage: the target member performs no Start/Complete in the window; work is deferred to `end`.
///  - CapacityDrop: target ("member" or "member/module") capacity scaled by (1 - magnitude).
///  - LeadTimeInflation: shipments carried by the target start-in-window take ceil(lead * (1 + magnitude)).
///  - DemandSurge: arrival probability at the target scaled by (1 + magnitude), capped at 1.
struct Disruption {
    DisruptionKind kind = DisruptionKind::MemberOutage;
    std::string target;
    Tick start = 0;
    Tick end = 0;
    Rational magnitude{1};

    bool active(Tick t) const noexcept { return t >= start && t < end; }
    bool operator==(const Disruption&) const = default;
};

struct Scenario {
    std::uint64_t seed = 0;
    Tick horizon = 1000;
    /// Orders completing within this many ticks of first sight count as on time.
    Tick quoted_lead_time = 1000;
    /// When set, an arrival finding this many open orders at its member is lost.
    std::optional<std::int64_t> lost_sales_backlog;
    TickDistribution default_lead_time = TickDistribution::constant(1);
    std::vector<Recipe> bom;
    std::vector<ExternalSupply> external;
    std::vector<DemandSpec> demand;
    std::vector<CapacitySpec> capacities;
    std::vector<LeadTimeSpec> lead_times;
    std::vector<ProcessParam> process_times;
    std::vector<ProcessParam> unit_costs;
    std::map<std::string, Rational> return_rates;
    std::vector<Disruption> disruptions;

    const Recipe* recipe_for(std::string_view item) const;
    const ExternalSupply* external_for(std::string_view item) const;
    std::optional<Rational> capacity_of(const EndpointRef& at) const;
    Tick process_time(std::string_view member, std::string_view process) const;
    Rational unit_cost(std::string_view member, std::string_view process) const;

    bool operator==(const Scenario&) const = default;
};

/// YAML scenario document. Errors: emulator.ParseError.
Scenario parse_scenario(const std::string& document);
Scenario load_scenario_file(const std::string& path);

/// Errors: emulator.BadScenario, emulator.CyclicBOM, emulator.WindowOutOfRange.
void validate_scenario(const Scenario& scenario);

/// Deterministic discrete-event emulation of the physical supply chain.
/// Errors: emulator.InfeasibleBOM, emulator.MissingBlock, emulator.NoMaterialFlow
/// plus everything validate_scenario raises.
EventLog run_scenario(const SupplyChainSystem& system, const Scenario& scenario);

/// Errors: emulator.WindowOutOfRange, emulator.BadScenario (negative magnitude,
/// capacity drop above 1).
Scenario inject_disruption(const Scenario& scenario, const Disruption& disruption);

/// Conjunction of optional constraints; `[start, end)` for time.
struct EventFilter {
    std::optional<std::string> member;
    std::optional<std::string> module;
    std::optional<BlockKind> block;
    std::optional<std::string> process;
    std::optional<Tick> start;
    std::optional<Tick> end;
    bool unsatisfiable = false;

    bool matches(const ActivityEvent& event) const;
    friend EventFilter operator&&(const EventFilter& lhs, const EventFilter& rhs);
};

EventLog replay(const EventLog& log, const EventFilter& filter);

} // namespace scdt

#endif // SCDT_EMULATOR_HPP
