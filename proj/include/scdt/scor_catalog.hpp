#ifndef SCDT_SCOR_CATALOG_HPP
#define SCDT_SCOR_CATALOG_HPP

#include "scdt/block_kind.hpp"
#include "scdt/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scdt {

struct ScorProcess {
    std::string code;
    int level = 1;
    std::string description;
    std::optional<std::string> parent;
    BlockKind block_kind = BlockKind::B1_Obtain;
    std::optional<Fulfillment> fulfillment;

    bool operator==(const ScorProcess&) const = default;
};

struct Practice {
    std::string code;
    std::string name;

    bool operator==(const Practice&) const = default;
};

enum class FormulaKind { CycleTime, Cost, Ratio, Utilization };

std::string_view to_string(FormulaKind kind) noexcept;
std::optional<FormulaKind> parse_formula_kind(std::string_view text) noexcept;

/// Name-based assignment used when a metric is only named:
/// "cycle time" -> CycleTime, "cost" -> Cost, "utilisation"/"utilization" -> Utilization,
/// anything else (percentages, rates) -> Ratio. Case-insensitive.
FormulaKind infer_formula_kind(std::string_view metric_name);

struct MetricDef {
    std::string code;
    std::string name;
    FormulaKind formula_kind = FormulaKind::Ratio;
    std::string scope; ///< process code

    bool operator==(const MetricDef&) const = default;
};

/// Immutable after load.
///
/// File format (schema 1): UTF-8 lines, tab-separated fields, '#' comments.
///
///     schema   1
///     process  <code> <level> <block> <fulfillment|-> <parent|-> <description>
///     practice <code> <name>
///     metric   <code> <formula_kind> <scope process> <name>
///     link     <process code> <practice code>
///
/// `link` order within a process is preserved.
class Catalog {
public:
    static constexpr int kSchemaVersion = 1;

    Catalog() = default;

    /// Errors: scor_catalog.ParseError, scor_catalog.DuplicateCode,
    /// scor_catalog.DanglingReference, scor_catalog.LevelMismatch.
    static Catalog parse(const std::string& text);
    static Catalog load_file(const std::string& path);

    const ScorProcess* find_process(std::string_view code) const;
    const MetricDef* find_metric(std::string_view code) const;

    /// Errors: scor_catalog.NotFound.
    const ScorProcess& lookup_process(std::string_view code) const;

    /// Level-3 processes with this block kind whose fulfillment is `mode` or unset.
    std::vector<ScorProcess> processes_for_block(BlockKind kind, Fulfillment mode) const;

    /// Errors: scor_catalog.NotFound for an unknown process.
    std::vector<Practice> practices_for_process(std::string_view code) const;
    std::vector<MetricDef> metrics_for_process(std::string_view code) const;

    std::size_t process_count() const { return processes_.size(); }
    std::size_t practice_count() const { return practices_.size(); }
    std::size_t metric_count() const { return metrics_.size(); }
    bool empty() const { return processes_.empty() && practices_.empty() && metrics_.empty(); }

    const std::map<std::string, ScorProcess, NaturalLess>& processes() const { return processes_; }
    const std::map<std::string, MetricDef, NaturalLess>& metrics() const { return metrics_; }

    /// Canonical text: header comment, schema line, then processes, practices,
    /// metrics and links, each sorted by code (links grouped by process, order kept).
    std::string serialize() const;

private:
    std::map<std::string, ScorProcess, NaturalLess> processes_;
    std::map<std::string, Practice, NaturalLess> practices_;
    std::map<std::string, MetricDef, NaturalLess> metrics_;
    std::map<std::string, std::vector<std::string>, NaturalLess> links_;
};

} // namespace scdt

#endif // SCDT_SCOR_CATALOG_HPP
