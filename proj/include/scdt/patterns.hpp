#ifndef SCDT_PATTERNS_HPP
#define SCDT_PATTERNS_HPP

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace scdt {

enum class IntegrationLevel { Data, Service, BusinessProcess };
enum class ExchangeType { Inform, Sync, Control, Negotiation };
enum class DataSharing { Shared, Isolated };
enum class ControlMode { Hierarchical, Autonomous };

enum class PatternKind {
    ServiceOrientedArchitecture,
    PublishSubscribe,
    CanonicalDataModel,
    DynamicRouter,
    Blackboard,
    DataWarehouse,
    CollaborativeVirtualEnvironment,
    RemoteFacade,
    RemoteProcessInvocation,
    BatchDataSynchronization,
};

inline constexpr std::array<IntegrationLevel, 3> kAllLevels{IntegrationLevel::Data, IntegrationLevel::Service,
                                                            IntegrationLevel::BusinessProcess};
inline constexpr std::array<ExchangeType, 4> kAllExchanges{ExchangeType::Inform, ExchangeType::Sync,
                                                           ExchangeType::Control, ExchangeType::Negotiation};

std::string_view to_string(IntegrationLevel v) noexcept;
std::string_view to_string(ExchangeType v) noexcept;
std::string_view to_string(DataSharing v) noexcept;
std::string_view to_string(ControlMode v) noexcept;
std::string_view to_string(PatternKind v) noexcept;

std::optional<IntegrationLevel> parse_integration_level(std::string_view text) noexcept;
std::optional<ExchangeType> parse_exchange_type(std::string_view text) noexcept;
std::optional<DataSharing> parse_data_sharing(std::string_view text) noexcept;
std::optional<ControlMode> parse_control_mode(std::string_view text) noexcept;
/// Accepts the enum spelling or the table's display name.
std::optional<PatternKind> parse_pattern_kind(std::string_view text) noexcept;

/// One row of the integration pattern table.
struct PatternRow {
    PatternKind kind;
    std::string name; ///< display name, e.g. "Publish-Subscribe"
    std::set<IntegrationLevel> levels;
    std::set<ExchangeType> exchanges;
    std::string defined_by;

    bool operator==(const PatternRow&) const = default;
};

/// The ten rows in table order.
const std::vector<PatternRow>& pattern_table();
const PatternRow& pattern_row(PatternKind kind);

/// Parses the shipped table file: a header line, then
/// `Pattern<TAB>Integration Level<TAB>Information Exchange Type<TAB>Defined by`
/// with '/'-separated cells. Errors: patterns.ParseError.
std::vector<PatternRow> parse_pattern_table(const std::string& text);

} // namespace scdt

#endif // SCDT_PATTERNS_HPP
