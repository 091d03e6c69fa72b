#ifndef SCDT_BUS_HPP
#define SCDT_BUS_HPP

#include "scdt/core.hpp"
#include "scdt/patterns.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace scdt {

/// `attribute=value -> destination`, matched against message attributes.
struct RouteRule {
    std::string attribute;
    std::string value;
    std::string destination;

    bool operator==(const RouteRule&) const = default;
};

/// Errors: bus.BadPatternConfig.
RouteRule parse_route_rule(std::string_view text);

struct PatternConfig {
    PatternKind pattern = PatternKind::PublishSubscribe;
    std::set<ExchangeType> exchanges{ExchangeType::Inform, ExchangeType::Sync};
    bool reliability = true;
    std::vector<std::string> topics;          ///< PublishSubscribe
    std::optional<std::string> store;         ///< Blackboard, CollaborativeVirtualEnvironment
    std::optional<std::string> service;       ///< SOA, RemoteFacade, RemoteProcessInvocation: serving member
    std::optional<std::vector<RouteRule>> rules; ///< DynamicRouter; may be an empty list
    Tick period = 0;                          ///< DataWarehouse, BatchDataSynchronization
    std::optional<std::string> controller;    ///< member whose writes win under Control

    bool operator==(const PatternConfig&) const = default;
};

/// Errors: bus.BadPatternConfig.
PatternConfig parse_pattern_config(const YAML::Node& node);

struct Outage {
    std::string member;
    Tick start = 0;
    Tick end = 0;

    bool operator==(const Outage&) const = default;
};

struct NetworkModel {
    Tick default_latency = 1;
    Tick hub_latency = 1;
    std::map<std::pair<std::string, std::string>, Tick> latency; ///< directed (from, to)
    Rational drop_probability{0};
    std::vector<Outage> outages;
    std::uint64_t seed = 0;

    Tick link(const std::string& from, const std::string& to) const;
    bool down(const std::string& member, Tick t) const;

    bool operator==(const NetworkModel&) const = default;
};

/// Errors: bus.BadNetwork.
NetworkModel parse_network(const YAML::Node& node);

struct BusMessage {
    std::uint64_t id = 0;
    std::string source;
    std::string topic;
    std::optional<std::string> destination;
    std::map<std::string, std::string> attributes;
    std::string body;
    std::uint64_t attestation = 0;
    Tick time = 0;
};

/// FNV-1a 64 over source, a newline, and body.
std::uint64_t attest(const std::string& source, const std::string& body);
BusMessage make_message(std::uint64_t id, std::string source, std::string topic, std::string body, Tick time);

enum class Outcome { Delivered, Dropped, FailedNotified };
enum class FailureCause { None, Network, Endpoint, Attestation, NoRoute };

std::string_view to_string(Outcome v) noexcept;
std::string_view to_string(FailureCause v) noexcept;

struct TraceEntry {
    std::uint64_t msg_id = 0;
    std::string kind; ///< publish, sync-push, sync-pull, propose, commit
    std::string source;
    std::string destination;
    int hops = 0;
    int transfers = 0;
    Tick enqueue = 0;
    std::optional<Tick> deliver;
    Tick path_latency = 0;
    Outcome outcome = Outcome::Delivered;
    FailureCause cause = FailureCause::None;
    bool notified = false;

    bool operator==(const TraceEntry&) const = default;
};

/// `msg_id kind source destination hops transfers enqueue deliver|- path_latency outcome cause notified`
std::string trace_to_tsv(const TraceEntry& entry);

/// Last-writer-wins register. The winner of a merge is the larger
/// (controller write, lamport, writer, value); `version` only detects conflicts.
struct VersionedValue {
    std::string value;
    std::map<std::string, std::uint64_t> version; ///< version vector
    std::uint64_t lamport = 0;
    std::string writer;

    bool operator==(const VersionedValue&) const = default;
};

using SharedState = std::map<std::string, VersionedValue>;

struct Endpoint {
    std::string member;
    std::set<std::string> subscriptions;
    SharedState state;
    std::vector<BusMessage> inbox;
};

/// Simulated message bus for one integration pattern.
///
/// Recipients and hop counts per pattern:
///  - PublishSubscribe: topic subscribers other than the source, via a broker (2 hops);
///  - Blackboard, CollaborativeVirtualEnvironment: write to and read from the store (2 hops);
///  - SOA, RemoteFacade, RemoteProcessInvocation: request to the service member, or from it to
///    the named destination (1 hop, 2 transfers counting the reply);
///  - CanonicalDataModel, DynamicRouter: via the translator / router (2 hops);
///  - DataWarehouse, BatchDataSynchronization: via the warehouse (2 hops), delivered at the next
///    multiple of `period`.
/// Path latency is link(source, destination) + (hops - 1) * hub_latency.
class Bus {
public:
    const PatternConfig& config() const noexcept { return config_; }
    const NetworkModel& network() const noexcept { return network_; }
    const std::map<std::string, Endpoint>& endpoints() const noexcept { return endpoints_; }
    std::size_t endpoint_count() const noexcept { return endpoints_.size(); }
    const Endpoint& endpoint(const std::string& member) const;
    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
    const std::vector<BusMessage>& dead_letters() const noexcept { return dead_letters_; }
    const SharedState& hub_state() const noexcept { return hub_; }
    std::uint64_t attestations_passed() const noexcept { return attest_pass_; }
    std::uint64_t attestations_failed() const noexcept { return attest_fail_; }
    std::uint64_t conflicts() const noexcept { return conflicts_; }

    /// Errors: bus.AttestationFailure (after dead-lettering the message).
    std::vector<TraceEntry> publish(const BusMessage& message);

    /// Errors: bus.PatternUnsupported when Sync is not configured.
    std::vector<TraceEntry> sync_round(Tick time);

    /// Errors: bus.PatternUnsupported unless DynamicRouter; bus.NoMatchingRule.
    std::set<std::string> route(const BusMessage& message) const;

    /// Local write at a member's endpoint; bumps that member's version counter.
    void update(const std::string& member, const std::string& key, const std::string& value);

    /// Two-phase propose/commit of one key among all endpoints. Commits only
    /// when every proposal is delivered. Errors: bus.PatternUnsupported.
    bool negotiate(const std::string& proposer, const std::string& key, const std::string& value, Tick time);

    /// The next delivery to this member fails.
    void inject_endpoint_failure(const std::string& member);

    /// Standard reconfiguration script: registers a member and returns the
    /// number of configuration entries it touched.
    std::size_t add_member(const std::string& member);

    /// Errors: bus.PatternUnsupported.
    friend Bus open_bus(const std::vector<std::string>& members, const PatternConfig& config,
                        const NetworkModel& network);

private:
    Bus() = default;

    struct Leg {
        std::string destination;
        int hops = 0;
        int transfers = 0;
    };

    TraceEntry attempt(const std::string& kind, const BusMessage& message, const Leg& leg);
    std::string hub_name() const;
    bool merge_into(SharedState& target, const SharedState& incoming);
    void require(ExchangeType exchange) const;
    std::uint64_t next_id() { return ++message_counter_; }

    PatternConfig config_;
    NetworkModel network_;
    std::map<std::string, Endpoint> endpoints_;
    SharedState hub_;
    std::vector<TraceEntry> trace_;
    std::vector<BusMessage> dead_letters_;
    std::map<std::string, int> pending_failures_;
    std::uint64_t attempts_ = 0;
    std::uint64_t message_counter_ = 1ull << 40;
    std::uint64_t attest_pass_ = 0;
    std::uint64_t attest_fail_ = 0;
    std::uint64_t conflicts_ = 0;
};

/// Errors: bus.BadPatternConfig.
Bus open_bus(const std::vector<std::string>& members, const PatternConfig& config, const NetworkModel& network);

/// Serialized state body: `key=value` lines.
std::string encode_state(const SharedState& state);

} // namespace scdt

#endif // SCDT_BUS_HPP
