#include "scdt/subdt.hpp"

#include <algorithm>
#include <limits>

namespace scdt {

std::string_view to_string(DropPolicy policy) noexcept {
    return policy == DropPolicy::Reject ? "Reject" : "Quarantine";
}

std::string_view to_string(AnomalyKind kind) noexcept {
    switch (kind) {
    case AnomalyKind::Late: return "Late";
    case AnomalyKind::OrphanComplete: return "OrphanComplete";
    case AnomalyKind::NegativeInventory: return "NegativeInventory";
    case AnomalyKind::DuplicateStart: return "DuplicateStart";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& msg) {
    throw Error(ErrorKind::Domain, "subdt." + code, msg);
}

Tick round_half_up(const Rational& r) {
    const Rational shifted = r + Rational(1, 2);
    auto q = shifted.numerator() / shifted.denominator();
    if (shifted.numerator() < 0 && q * shifted.denominator() != shifted.numerator()) --q;
    return q;
}

std::string block_path(const std::string& module, BlockKind kind) {
    return module + "/" + std::string(to_string(kind));
}

} // namespace

// ---------------------------------------------------------------------------
// InfoChannel

InfoChannel::Output InfoChannel::push(const ActivityEvent& event) {
    Output out;
    max_seen_ = std::max(max_seen_.value_or(event.time), event.time);
    std::erase_if(seen_, [&](const auto& kv) { return kv.second < *max_seen_ - config_.dedup_window; });
    if (seen_.count(event.seq)) {
        ++duplicates_;
        return out;
    }
    seen_.emplace(event.seq, event.time);

    const Key key{event.time, event.seq};
    if (last_released_ && key < *last_released_) {
        out.late.push_back(event);
        return out;
    }
    buffer_.emplace(key, event);
    while (!buffer_.empty()) {
        auto first = buffer_.begin();
        const bool overdue = *max_seen_ - first->first.first > config_.max_delay;
        if (!overdue && buffer_.size() <= config_.capacity) break;
        last_released_ = first->first;
        out.released.push_back(std::move(first->second));
        buffer_.erase(first);
    }
    return out;
}

std::vector<ActivityEvent> InfoChannel::flush() {
    std::vector<ActivityEvent> out;
    for (auto& [key, e] : buffer_) {
        last_released_ = key;
        out.push_back(std::move(e));
    }
    buffer_.clear();
    return out;
}

// ---------------------------------------------------------------------------
// StateMachine

StateMachine::StateMachine(const Member& member, const Scenario& model, DropPolicy policy)
    : member_(&member), model_(&model), policy_(policy) {}

StateMachine::Result StateMachine::apply(const ActivityEvent& e) {
    const Block* block = nullptr;
    if (const auto* mod = member_->find_module(e.module)) block = mod->find_block(e.block);
    const bool first = block && !block->processes.empty() && block->processes.front() == e.process;
    const bool last = block && !block->processes.empty() && block->processes.back() == e.process;

    const auto path = block_path(e.module, e.block);
    auto& bs = blocks_[path];
    bs.module = e.module;
    bs.kind = e.block;
    auto& ps = bs.processes[e.process];
    const std::pair<std::string, std::string> pair_key{e.payload.order_ref, e.payload.item};

    std::map<std::string, std::int64_t> delta;
    if (e.phase == Phase::Start && first) {
        switch (e.block) {
        case BlockKind::B2_Make:
            if (const auto* r = model_->recipe_for(e.payload.item)) {
                for (const auto& [input, units] : r->inputs) delta[input] -= units * e.payload.quantity;
            }
            break;
        case BlockKind::B3_Distribute:
        case BlockKind::B4_ReturnToUpstream: delta[e.payload.item] -= e.payload.quantity; break;
        default: break;
        }
    }
    if (e.phase == Phase::Complete && last &&
        (e.block == BlockKind::B1_Obtain || e.block == BlockKind::B2_Make ||
         e.block == BlockKind::B5_ReturnFromDownstream)) {
        delta[e.payload.item] += e.payload.quantity;
    }

    if (e.phase == Phase::Start) {
        if (ps.in_flight.count(pair_key)) return Result::DuplicateStart;
    } else if (!ps.in_flight.count(pair_key)) {
        ++orphans_;
        return Result::Orphan;
    }
    bool negative = false;
    for (const auto& [item, d] : delta) {
        auto it = inventory_.find(item);
        if ((it == inventory_.end() ? 0 : it->second) + d < 0) negative = true;
    }
    if (negative && policy_ == DropPolicy::Reject) return Result::Negative;

    for (const auto& [item, d] : delta) inventory_[item] += d;
    first_seen_.emplace(e.payload.order_ref, e.time);
    if (e.phase == Phase::Start) {
        ps.in_flight.emplace(pair_key, e.time);
    } else {
        auto it = ps.in_flight.find(pair_key);
        CompletedPair pair{e.payload.order_ref, e.payload.item, it->second, e.time, e.payload.quantity,
                           e.payload.unit_cost, first_seen_.at(e.payload.order_ref)};
        ps.in_flight.erase(it);
        ps.cycle_total += Rational(pair.complete - pair.start);
        ps.cost += Rational(pair.quantity) * pair.unit_cost;
        ps.completed.push_back(std::move(pair));
        ++completed_pairs_;
    }
    return negative ? Result::Negative : Result::Applied;
}

// ---------------------------------------------------------------------------
// metrics

namespace {

MetricValue evaluate(const StateMachine& state, const MetricDef& def, Tick t0, Tick t1, Tick quoted_lead_time) {
    MetricValue mv{def.code, t0, t1, std::nullopt, 0};
    Rational sum{0};
    std::int64_t hits = 0;
    for (const auto& [path, bs] : state.blocks()) {
        auto it = bs.processes.find(def.scope);
        if (it == bs.processes.end()) continue;
        for (const auto& p : it->second.completed) {
            if (def.formula_kind == FormulaKind::Utilization) {
                const Tick lo = std::max(p.start, t0);
                const Tick hi = std::min(p.complete, t1);
                if (hi > lo) {
                    sum += Rational(hi - lo);
                    ++mv.sample_count;
                }
                continue;
            }
            if (p.complete < t0 || p.complete >= t1) continue;
            ++mv.sample_count;
            switch (def.formula_kind) {
            case FormulaKind::CycleTime: sum += Rational(p.complete - p.start); break;
            case FormulaKind::Cost: sum += Rational(p.quantity) * p.unit_cost; break;
            case FormulaKind::Ratio:
                if (p.complete - p.first_seen <= quoted_lead_time) ++hits;
                break;
            case FormulaKind::Utilization: break;
            }
        }
    }
    switch (def.formula_kind) {
    case FormulaKind::CycleTime:
        if (mv.sample_count > 0) mv.value = sum / Rational(mv.sample_count);
        break;
    case FormulaKind::Ratio:
        if (mv.sample_count > 0) mv.value = Rational(hits, mv.sample_count);
        break;
    case FormulaKind::Cost: mv.value = sum; break;
    case FormulaKind::Utilization:
        if (t1 > t0) mv.value = sum / Rational(t1 - t0);
        break;
    }
    return mv;
}

StateSummary summarize(const StateMachine& state, const std::vector<const MetricDef*>& metrics, Tick t,
                       Tick quoted_lead_time) {
    StateSummary out;
    for (const auto& [item, level] : state.inventory()) {
        if (level != 0) out["inventory/" + item] = std::to_string(level);
    }
    for (const auto& [path, bs] : state.blocks()) {
        for (const auto& [code, ps] : bs.processes) {
            const auto suffix = path + "/" + code;
            if (!ps.in_flight.empty()) out["in_flight/" + suffix] = std::to_string(ps.in_flight.size());
            if (!ps.completed.empty()) {
                out["completed/" + suffix] = std::to_string(ps.completed.size());
                out["cycle_total/" + suffix] = format_fraction(ps.cycle_total);
            }
            if (ps.cost != Rational(0)) out["cost/" + suffix] = format_fraction(ps.cost);
        }
    }
    for (const auto* def : metrics) {
        auto mv = evaluate(state, *def, 0, t + 1, quoted_lead_time);
        if (mv.value && (mv.sample_count > 0)) out["metric/" + def->code] = format_fraction(*mv.value);
    }
    return out;
}

} // namespace

std::string metric_to_tsv(const std::string& member, const MetricValue& v) {
    return member + "\t" + v.code + "\t[" + std::to_string(v.t0) + "," + std::to_string(v.t1) + ")\t" +
           (v.value ? format_fraction(*v.value) : std::string("absent")) + "\t" + std::to_string(v.sample_count);
}

Rational MovingAverageForecaster::rate(const std::vector<Tick>& arrivals, Tick now) const {
    const Tick span = std::min<Tick>(static_cast<Tick>(buckets_) * width_, now);
    if (span <= 0) return Rational(0);
    const auto count = std::count_if(arrivals.begin(), arrivals.end(),
                                     [&](Tick t) { return t >= now - span && t < now; });
    return Rational(static_cast<std::int64_t>(count), span);
}

// ---------------------------------------------------------------------------
// SubDigitalTwin

SubDigitalTwin::SubDigitalTwin(Member member, std::shared_ptr<const Catalog> catalog, Scenario model,
                               ChannelConfig channel)
    : member_(std::move(member)), catalog_(std::move(catalog)), model_(std::move(model)), channel_(channel),
      state_(member_, model_, channel.policy) {
    if (!catalog_) catalog_ = std::make_shared<Catalog>();
}

void SubDigitalTwin::ingest(const ActivityEvent& event) {
    if (event.member != member_.id) {
        fail("ForeignEvent", "event for '" + event.member + "' offered to twin '" + member_.id + "'");
    }
    auto out = channel_.push(event);
    for (auto& late : out.late) {
        if (channel_.config().policy == DropPolicy::Quarantine) {
            quarantine_.push_back({AnomalyKind::Late, std::move(late)});
        } else {
            ++rejected_;
        }
    }
    for (const auto& e : out.released) apply(e);
}

void SubDigitalTwin::ingest(const EventLog& log) {
    for (const auto& e : log) ingest(e);
}

void SubDigitalTwin::flush() {
    for (const auto& e : channel_.flush()) apply(e);
}

void SubDigitalTwin::apply(const ActivityEvent& e) {
    switch (state_.apply(e)) {
    case StateMachine::Result::Applied:
        journal_.push_back(e);
        last_time_ = e.time;
        return;
    case StateMachine::Result::Orphan: quarantine_.push_back({AnomalyKind::OrphanComplete, e}); return;
    case StateMachine::Result::DuplicateStart:
        if (channel_.config().policy == DropPolicy::Quarantine) quarantine_.push_back({AnomalyKind::DuplicateStart, e});
        else ++rejected_;
        return;
    case StateMachine::Result::Negative:
        if (channel_.config().policy == DropPolicy::Quarantine) {
            quarantine_.push_back({AnomalyKind::NegativeInventory, e});
            journal_.push_back(e);
            last_time_ = e.time;
        } else {
            ++rejected_;
        }
        return;
    }
}

std::vector<std::string> SubDigitalTwin::applicable_metrics() const {
    std::set<std::string> attached;
    for (const auto& mod : member_.modules) {
        for (const auto& b : mod.blocks) attached.insert(b.processes.begin(), b.processes.end());
    }
    std::vector<std::string> out;
    for (const auto& [code, def] : catalog_->metrics()) {
        if (attached.count(def.scope)) out.push_back(code);
    }
    return out;
}

MetricValue SubDigitalTwin::compute_metric(const std::string& code, Tick t0, Tick t1) const {
    const auto* def = catalog_->find_metric(code);
    const auto codes = applicable_metrics();
    if (!def || std::find(codes.begin(), codes.end(), code) == codes.end()) {
        fail("MetricNotApplicable", "metric '" + code + "' does not apply to member '" + member_.id + "'");
    }
    return evaluate(state_, *def, t0, t1, model_.quoted_lead_time);
}

StateSummary SubDigitalTwin::snapshot(Tick t) const {
    StateMachine sm(member_, model_, channel_.config().policy);
    for (const auto& e : journal_) {
        if (e.time > t) break;
        sm.apply(e);
    }
    std::vector<const MetricDef*> defs;
    for (const auto& code : applicable_metrics()) defs.push_back(catalog_->find_metric(code));
    auto out = summarize(sm, defs, t, model_.quoted_lead_time);
    const auto orphans = std::count_if(quarantine_.begin(), quarantine_.end(), [&](const Anomaly& a) {
        return a.kind == AnomalyKind::OrphanComplete && a.event.time <= t;
    });
    if (orphans > 0) out["orphans"] = std::to_string(orphans);
    return out;
}

StateSummary SubDigitalTwin::fold(const std::vector<ActivityEvent>& events, Tick t) const {
    SubDigitalTwin truth(member_, catalog_, model_, ChannelConfig{std::max<std::size_t>(events.size(), 1), 0,
                                                                  std::numeric_limits<Tick>::max() / 4,
                                                                  channel_.config().policy});
    for (const auto& e : events) {
        if (e.member == member_.id) truth.ingest(e);
    }
    truth.flush();
    return truth.snapshot(t);
}

bool SubDigitalTwin::warm() const {
    if (state_.completed_pairs() >= 100) return true;
    return last_time_ && *last_time_ * 10 >= model_.horizon;
}

VirtualModel SubDigitalTwin::fit(const Perturbation& k, Tick horizon) const {
    return fit(k, horizon, MovingAverageForecaster{});
}

VirtualModel SubDigitalTwin::fit(const Perturbation& k, Tick horizon, const Forecaster& forecaster) const {
    if (!warm()) {
        fail("ModelNotWarm", "twin '" + member_.id + "' has " + std::to_string(state_.completed_pairs()) +
                                 " completed pairs and no data past horizon/10");
    }
    if (k.demand < 0 || k.capacity <= 0 || k.lead_time < 0) {
        fail("BadPerturbation", "factors must be positive (demand and lead time may be 0)");
    }

    // Order arrivals: first sight of each order at this member.
    std::map<std::string, Tick> first_sight;
    std::map<std::string, std::int64_t> b3_items;
    for (const auto& e : journal_) {
        first_sight.emplace(e.payload.order_ref, e.time);
        if (e.block == BlockKind::B3_Distribute) ++b3_items[e.payload.item];
    }
    std::vector<Tick> arrivals;
    for (const auto& [ref, t] : first_sight) arrivals.push_back(t);
    std::sort(arrivals.begin(), arrivals.end());

    std::string item;
    std::int64_t best = -1;
    for (const auto& [name, n] : b3_items) {
        if (n > best) {
            best = n;
            item = name;
        }
    }
    if (item.empty()) fail("ModelNotWarm", "twin '" + member_.id + "' has not observed any distribution");

    // Mean pair durations of a block kind's core process, optionally for one item.
    auto core_mean = [&](BlockKind kind, const std::optional<std::string>& only) -> std::optional<Rational> {
        Rational sum{0};
        std::int64_t n = 0;
        for (const auto& mod : member_.modules) {
            const auto* b = mod.find_block(kind);
            if (!b || b->processes.empty()) continue;
            auto bs = state_.blocks().find(block_path(mod.id, kind));
            if (bs == state_.blocks().end()) continue;
            auto ps = bs->second.processes.find(b->processes[b->core_index()]);
            if (ps == bs->second.processes.end()) continue;
            for (const auto& p : ps->second.completed) {
                if (only && p.item != *only) continue;
                sum += Rational(p.complete - p.start);
                ++n;
            }
        }
        if (n == 0) return std::nullopt;
        return sum / Rational(n);
    };
    auto scaled = [&](const Rational& v) { return round_half_up(v * k.lead_time); };

    Rational qty_sum{0};
    std::int64_t qty_n = 0;
    for (const auto& e : journal_) {
        if (e.block == BlockKind::B3_Distribute && e.phase == Phase::Start && e.payload.item == item) {
            const auto* mod = member_.find_module(e.module);
            const auto* b = mod ? mod->find_block(e.block) : nullptr;
            if (b && !b->processes.empty() && b->processes.front() == e.process) {
                qty_sum += Rational(e.payload.quantity);
                ++qty_n;
            }
        }
    }
    const std::int64_t quantity = qty_n ? std::max<Tick>(1, round_half_up(qty_sum / Rational(qty_n))) : 1;

    VirtualModel vm;
    vm.system.members.push_back(member_);
    vm.system.members.back().role.self_transport = true;
    vm.system.goal = "virtual model of " + member_.id;

    Scenario& sc = vm.scenario;
    sc.seed = model_.seed;
    sc.horizon = horizon;
    sc.quoted_lead_time = model_.quoted_lead_time;
    sc.lost_sales_backlog = model_.lost_sales_backlog;
    sc.default_lead_time = TickDistribution::constant(0);

    std::set<std::string> external;
    const auto* recipe = model_.recipe_for(item);
    if (recipe && recipe->made_by == member_.id) {
        sc.bom.push_back(*recipe);
        for (const auto& [input, units] : recipe->inputs) external.insert(input);
    } else {
        external.insert(item);
    }
    const auto any_b1 = core_mean(BlockKind::B1_Obtain, std::nullopt);
    for (const auto& ext : external) {
        auto lead = core_mean(BlockKind::B1_Obtain, ext);
        if (!lead) lead = any_b1;
        sc.external.push_back({ext, TickDistribution::constant(scaled(lead.value_or(Rational(0))))});
    }

    DemandSpec d;
    d.member = member_.id;
    d.item = item;
    d.rate = std::min(Rational(1), forecaster.rate(arrivals, last_time_.value_or(0) + 1) * k.demand);
    d.quantity = TickDistribution::constant(quantity);
    d.delivery_lead_time =
        TickDistribution::constant(scaled(core_mean(BlockKind::B3_Distribute, item).value_or(Rational(0))));
    sc.demand.push_back(d);

    for (const auto& c : model_.capacities) {
        if (c.at.member == member_.id) sc.capacities.push_back({c.at, c.units_per_tick * k.capacity});
    }
    for (const auto& p : model_.process_times) {
        if (!p.member || *p.member == member_.id) sc.process_times.push_back(p);
    }
    for (const auto& p : model_.unit_costs) {
        if (!p.member || *p.member == member_.id) sc.unit_costs.push_back(p);
    }
    return vm;
}

Prediction SubDigitalTwin::what_if(const Perturbation& perturbation, Tick horizon) const {
    const auto vm = fit(perturbation, horizon);
    const auto log = run_scenario(vm.system, vm.scenario);
    SubDigitalTwin forward(vm.system.members.front(), catalog_, vm.scenario, ChannelConfig{});
    forward.ingest(log);
    forward.flush();
    Prediction out;
    for (const auto& code : forward.applicable_metrics()) out.metrics.push_back(forward.compute_metric(code, 0, horizon));
    return out;
}

std::size_t matched_keys(const StateSummary& a, const StateSummary& b) {
    std::size_t n = 0;
    for (const auto& [key, value] : a) {
        auto it = b.find(key);
        if (it != b.end() && it->second == value) ++n;
    }
    return n;
}

Rational divergence(const SubDigitalTwin& twin, const EventLog& slice) {
    Tick t = twin.last_time().value_or(0);
    std::vector<ActivityEvent> own;
    for (const auto& e : slice) {
        if (e.member != twin.member_id()) continue;
        own.push_back(e);
        t = std::max(t, e.time);
    }
    const auto mine = twin.snapshot(t);
    const auto truth = twin.fold(own, t);
    std::set<std::string> keys;
    for (const auto& [k, v] : mine) keys.insert(k);
    for (const auto& [k, v] : truth) keys.insert(k);
    if (keys.empty()) return Rational(0);
    return Rational(1) - Rational(static_cast<std::int64_t>(matched_keys(mine, truth)),
                                  static_cast<std::int64_t>(keys.size()));
}

} // namespace scdt
