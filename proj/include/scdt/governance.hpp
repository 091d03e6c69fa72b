#ifndef SCDT_GOVERNANCE_HPP
#define SCDT_GOVERNANCE_HPP

#include "scdt/bus.hpp"
#include "scdt/patterns.hpp"
#include "scdt/subdt.hpp"
#include "scdt/topology.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scdt {

/// SoS features A..E: Autonomy, Belonging, Connectivity, Diversity, Emergence.
inline constexpr std::string_view kSosFeatures = "ABCDE";
inline constexpr int kPrincipleCount = 5;

std::string_view sos_feature_name(char feature);
std::string_view principle_name(int principle);

/// Verbatim cell text of the supply chain SoS matrix. Errors: sos_governance.UnknownCellKey.
const std::string& sos_cell_text(char feature, int principle);

struct CellKey {
    char feature = 'A';
    int principle = 1;

    auto operator<=>(const CellKey&) const = default;
    std::string str() const { return std::string(1, feature) + std::to_string(principle); }
};

/// Parses "B4" (feature B, principle 4). Errors: sos_governance.UnknownCellKey.
CellKey parse_cell_key(std::string_view text);

enum class CellStatus { Satisfied, Missing };

struct SosCell {
    CellKey key;
    std::string text;
    std::optional<std::string> evidence;
    CellStatus status = CellStatus::Missing;
};

struct SosAssessment {
    std::vector<SosCell> cells; ///< 25 cells, features A..E then principles 1..5

    std::size_t satisfied() const;
    Rational score() const; ///< satisfied / 25
    std::vector<SosCell> missing() const;
    std::string render() const;
};

struct IntegrationFeature {
    IntegrationLevel level = IntegrationLevel::BusinessProcess;
    ExchangeType exchange = ExchangeType::Sync;
    DataSharing data_sharing = DataSharing::Shared;
    ControlMode control = ControlMode::Autonomous;

    bool operator==(const IntegrationFeature&) const = default;
};

enum class Quadrant { SharedMemoryIS, TraditionalIS, DataCentric, AgentBased };

std::string_view to_string(Quadrant q) noexcept;
/// The cell text, e.g. "Information System with Shared Memory".
std::string_view quadrant_label(Quadrant q) noexcept;

struct InjectedFailure {
    std::string member;
    Tick time = 0;

    bool operator==(const InjectedFailure&) const = default;
};

/// Governance file: declared features, the chosen pattern, network model,
/// SoS evidence and integration run settings.
///
/// Cells that are also checked mechanically:
///  - C3 "Develop reliable connectivity": satisfied when the pattern's reliability flag is on;
///  - B1 "Set common goal": satisfied when the topology declares a goal.
struct GovernanceConfig {
    IntegrationFeature feature;
    PatternConfig pattern;
    NetworkModel network;
    std::map<CellKey, std::string> evidence;
    Tick sync_period = 100;
    std::vector<InjectedFailure> failures;
};

/// Errors: sos_governance.ParseError, sos_governance.UnknownCellKey, bus.BadPatternConfig.
GovernanceConfig parse_governance(const std::string& document);
GovernanceConfig load_governance_file(const std::string& path);

/// Errors: sos_governance.UnknownCellKey.
SosAssessment assess_sos(const SupplyChainSystem& system, const GovernanceConfig& config);

Quadrant classify_quadrant(DataSharing data, ControlMode control) noexcept;
inline Quadrant classify_quadrant(const IntegrationFeature& f) noexcept {
    return classify_quadrant(f.data_sharing, f.control);
}

/// Template config for a pattern: exchanges = {exchange}; member-independent
/// parameters filled with defaults (topics, store, empty rule list, period 10).
PatternConfig pattern_template(PatternKind kind, ExchangeType exchange);

/// Table rows admitting both the level and the exchange type, in table order.
std::vector<PatternConfig> select_patterns(const IntegrationFeature& feature);

struct QualityInputs {
    std::vector<TraceEntry> traces;
    std::vector<SharedState> states; ///< one per twin endpoint
    std::uint64_t attestations_passed = 0;
    std::uint64_t attestations_failed = 0;
    std::size_t manageability = 0;
    std::optional<Rational> scalability;
};

/// All fractions in [0,1]; absent when the denominator is 0.
///  - reliability: notified / non-delivered entries
///  - mean_hops, mean_transfers: over delivered entries
///  - availability: 1 - endpoint-caused failures / delivery attempts (dead letters excluded)
///  - consistency: keys with one value at every endpoint / all keys
///  - security: attestation pass rate
struct QualityReport {
    std::optional<Rational> reliability;
    std::optional<Rational> mean_hops;
    std::optional<Rational> mean_transfers;
    std::optional<Rational> availability;
    std::optional<Rational> scalability;
    std::size_t manageability = 0;
    std::optional<Rational> consistency;
    std::optional<Rational> security;
    bool empty_trace = false;

    /// `key=value` lines; absent values print as "absent".
    std::string to_text() const;
};

QualityReport evaluate_quality(const QualityInputs& inputs);

/// Success rate with every member over success rate with two, from a fixed
/// probe workload (`rounds` messages per member), clipped to [0, 1].
std::optional<Rational> scalability_probe(const std::vector<std::string>& members, const PatternConfig& config,
                                          const NetworkModel& network, int rounds = 20);

/// Traces, endpoint states and counters of a bus, plus the manageability
/// count of adding one member and the scalability probe.
QualityInputs quality_inputs(const Bus& bus);

/// The composite twin: one bus endpoint per sub-twin plus metric rollups.
class SCDTwin {
public:
    Bus& bus() noexcept { return bus_; }
    const Bus& bus() const noexcept { return bus_; }
    const IntegrationFeature& feature() const noexcept { return feature_; }
    const std::vector<const SubDigitalTwin*>& twins() const noexcept { return twins_; }

    /// Per metric code over every member that defines it: Cost summed,
    /// other kinds pooled by sample_count.
    std::vector<MetricValue> rollups(Tick t0, Tick t1) const;

    friend SCDTwin integrate(const std::vector<const SubDigitalTwin*>& twins, const PatternConfig& config,
                             const NetworkModel& network, const IntegrationFeature& feature);

private:
    SCDTwin(Bus bus, IntegrationFeature feature, std::vector<const SubDigitalTwin*> twins)
        : bus_(std::move(bus)), feature_(feature), twins_(std::move(twins)) {}

    Bus bus_;
    IntegrationFeature feature_;
    std::vector<const SubDigitalTwin*> twins_;
};

/// Twins are borrowed and must outlive the result.
/// Errors: sos_governance.PatternFeatureMismatch, sos_governance.DuplicateMember, bus.BadPatternConfig.
SCDTwin integrate(const std::vector<const SubDigitalTwin*>& twins, const PatternConfig& config,
                  const NetworkModel& network, const IntegrationFeature& feature);

/// Pools metric values of one code: sum for Cost, sample-weighted mean otherwise.
MetricValue rollup(const std::vector<MetricValue>& values, FormulaKind kind);

} // namespace scdt

#endif // SCDT_GOVERNANCE_HPP
