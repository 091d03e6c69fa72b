#ifndef SCDT_SUBDT_HPP
#define SCDT_SUBDT_HPP

#include "scdt/emulator.hpp"
#include "scdt/scor_catalog.hpp"
#include "scdt/topology.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scdt {

enum class DropPolicy { Reject, Quarantine };

std::string_view to_string(DropPolicy policy) noexcept;

struct ChannelConfig {
    std::size_t capacity = 1 << 16; ///< buffered events before a forced release
    Tick max_delay = 0;             ///< reorder tolerance in ticks
    Tick dedup_window = 1000;       ///< seqs are remembered this many ticks behind the newest event
    DropPolicy policy = DropPolicy::Reject;
};

enum class AnomalyKind { Late, OrphanComplete, NegativeInventory, DuplicateStart };

std::string_view to_string(AnomalyKind kind) noexcept;

struct Anomaly {
    AnomalyKind kind;
    ActivityEvent event;
};

/// Pre-processing between the physical feed and the virtual state:
/// drops duplicate seqs, restores (time, seq) order within `max_delay`.
///
/// An event is released once the newest time seen exceeds its time by more
/// than `max_delay`, or when the buffer overflows. Events arriving behind the
/// last released one are late and handed back to the caller.
class InfoChannel {
public:
    explicit InfoChannel(ChannelConfig config = {}) : config_(config) {}

    struct Output {
        std::vector<ActivityEvent> released;
        std::vector<ActivityEvent> late;
    };

    Output push(const ActivityEvent& event);
    std::vector<ActivityEvent> flush();

    const ChannelConfig& config() const noexcept { return config_; }
    std::size_t buffered() const noexcept { return buffer_.size(); }
    std::uint64_t duplicates() const noexcept { return duplicates_; }

private:
    using Key = std::pair<Tick, std::uint64_t>;

    ChannelConfig config_;
    std::map<Key, ActivityEvent> buffer_;
    std::map<std::uint64_t, Tick> seen_;
    std::optional<Tick> max_seen_;
    std::optional<Key> last_released_;
    std::uint64_t duplicates_ = 0;
};

struct CompletedPair {
    std::string order_ref;
    std::string item;
    Tick start = 0;
    Tick complete = 0;
    std::int64_t quantity = 0;
    Rational unit_cost{0};
    Tick first_seen = 0; ///< first time the member saw this order
};

struct ProcessState {
    std::map<std::pair<std::string, std::string>, Tick> in_flight; ///< (order_ref, item) -> start
    std::vector<CompletedPair> completed;
    Rational cycle_total{0};
    Rational cost{0};
};

/// Virtual image of one block: processes keyed by code.
struct VirtualBlockState {
    std::string module;
    BlockKind kind = BlockKind::B1_Obtain;
    std::map<std::string, ProcessState> processes;
};

using StateSummary = std::map<std::string, std::string>;

/// Applies events to virtual state. Inventory is kept per member and item:
///  - B1 / B2 / B5: the block's last process Complete adds the quantity
///    (B2 first Start consumes BOM inputs),
///  - B3 / B4: the block's first process Start removes the quantity.
class StateMachine {
public:
    StateMachine(const Member& member, const Scenario& model, DropPolicy policy);

    enum class Result { Applied, Orphan, Negative, DuplicateStart };

    Result apply(const ActivityEvent& event);

    const std::map<std::string, VirtualBlockState>& blocks() const noexcept { return blocks_; }
    const std::map<std::string, std::int64_t>& inventory() const noexcept { return inventory_; }
    std::uint64_t orphans() const noexcept { return orphans_; }
    std::uint64_t completed_pairs() const noexcept { return completed_pairs_; }

private:
    const Member* member_;
    const Scenario* model_;
    DropPolicy policy_;
    std::map<std::string, VirtualBlockState> blocks_;
    std::map<std::string, std::int64_t> inventory_;
    std::map<std::string, Tick> first_seen_;
    std::uint64_t orphans_ = 0;
    std::uint64_t completed_pairs_ = 0;
};

struct MetricValue {
    std::string code;
    Tick t0 = 0;
    Tick t1 = 0;
    std::optional<Rational> value; ///< absent for CycleTime/Ratio without samples
    std::int64_t sample_count = 0;

    bool operator==(const MetricValue&) const = default;
};

/// Metric export record: member, code, window, value ("p/q" or "absent"), sample_count.
std::string metric_to_tsv(const std::string& member, const MetricValue& value);

/// Demand estimator used by the virtual model.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    /// Arrival probability per tick given the arrival times observed before `now`.
    virtual Rational rate(const std::vector<Tick>& arrivals, Tick now) const = 0;
};

/// Mean arrivals per tick over the last `buckets * width` ticks.
class MovingAverageForecaster : public Forecaster {
public:
    MovingAverageForecaster(int buckets = 10, Tick width = 10) : buckets_(buckets), width_(width) {}
    Rational rate(const std::vector<Tick>& arrivals, Tick now) const override;

private:
    int buckets_;
    Tick width_;
};

struct Perturbation {
    Rational demand{1};
    Rational capacity{1};
    Rational lead_time{1};

    bool identity() const { return demand == Rational(1) && capacity == Rational(1) && lead_time == Rational(1); }
};

/// Fitted single-member model: the system and scenario that what_if runs.
struct VirtualModel {
    SupplyChainSystem system;
    Scenario scenario;
};

struct Prediction {
    std::string tag = "predicted";
    std::vector<MetricValue> metrics;
};

class SubDigitalTwin {
public:
    /// `model` supplies the configured parameters (BOM, capacities, process times,
    /// unit costs, quoted lead time, horizon, seed); demand and lead times are estimated.
    SubDigitalTwin(Member member, std::shared_ptr<const Catalog> catalog, Scenario model, ChannelConfig channel = {});

    const std::string& member_id() const noexcept { return member_.id; }
    const Member& member() const noexcept { return member_; }
    const Scenario& model_parameters() const noexcept { return model_; }
    const Catalog& catalog() const noexcept { return *catalog_; }

    /// Errors: subdt.ForeignEvent.
    void ingest(const ActivityEvent& event);
    void ingest(const EventLog& log);
    /// Releases everything still buffered in the channel.
    void flush();

    /// Events applied so far, in application order.
    const std::vector<ActivityEvent>& journal() const noexcept { return journal_; }
    const std::vector<Anomaly>& quarantine() const noexcept { return quarantine_; }
    std::uint64_t rejected() const noexcept { return rejected_; }
    std::uint64_t duplicates() const noexcept { return channel_.duplicates(); }
    const StateMachine& state() const noexcept { return state_; }
    std::optional<Tick> last_time() const noexcept { return last_time_; }

    /// Metric codes whose scope process is attached to one of the member's blocks.
    std::vector<std::string> applicable_metrics() const;

    /// Errors: subdt.MetricNotApplicable.
    MetricValue compute_metric(const std::string& code, Tick t0, Tick t1) const;

    /// Fold of the journal up to and including `t`; zero counters are omitted.
    StateSummary snapshot(Tick t) const;

    bool warm() const;
    /// Errors: subdt.ModelNotWarm.
    VirtualModel fit(const Perturbation& perturbation, Tick horizon, const Forecaster& forecaster) const;
    VirtualModel fit(const Perturbation& perturbation, Tick horizon) const;
    /// Errors: subdt.ModelNotWarm, plus emulator errors from the forward run.
    Prediction what_if(const Perturbation& perturbation, Tick horizon) const;

    /// Same as snapshot on a twin with a lossless channel fed `events`.
    StateSummary fold(const std::vector<ActivityEvent>& events, Tick t) const;

private:
    void apply(const ActivityEvent& event);

    Member member_;
    std::shared_ptr<const Catalog> catalog_;
    Scenario model_;
    InfoChannel channel_;
    StateMachine state_;
    std::vector<ActivityEvent> journal_;
    std::vector<Anomaly> quarantine_;
    std::uint64_t rejected_ = 0;
    std::optional<Tick> last_time_;
};

/// 1 - matched keys / union of keys between the twin's snapshot and a
/// ground-truth fold of `slice` (the twin's own member events), both at the
/// slice's last time. 0 for an empty union.
Rational divergence(const SubDigitalTwin& twin, const EventLog& slice);

/// Keys present in both summaries with equal values.
std::size_t matched_keys(const StateSummary& a, const StateSummary& b);

} // namespace scdt

#endif // SCDT_SUBDT_HPP
