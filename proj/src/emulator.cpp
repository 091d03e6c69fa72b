#include "scdt/emulator.hpp"

#include "scdt/rng.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <queue>
#include <sstream>

namespace scdt {

std::string_view to_string(Phase phase) noexcept { return phase == Phase::Start ? "Start" : "Complete"; }

// ---------------------------------------------------------------------------
// EventLog

void EventLog::append(ActivityEvent event) {
    if (!events_.empty()) {
        const auto& last = events_.back();
        if (event.seq <= last.seq || event.time < last.time) {
            throw Error(ErrorKind::Domain, "emulator.LogOrder",
                        "event seq " + std::to_string(event.seq) + " at t=" + std::to_string(event.time) +
                            " breaks (time, seq) order");
        }
    }
    events_.push_back(std::move(event));
}

std::string event_to_tsv(const ActivityEvent& e) {
    std::string out;
    out.reserve(96);
    out += std::to_string(e.seq);
    out += '\t';
    out += e.member;
    out += '\t';
    out += e.module;
    out += '\t';
    out += to_string(e.block);
    out += '\t';
    out += e.process;
    out += '\t';
    out += to_string(e.phase);
    out += '\t';
    out += std::to_string(e.time);
    out += '\t';
    out += e.payload.item;
    out += '\t';
    out += std::to_string(e.payload.quantity);
    out += '\t';
    out += format_fraction(e.payload.unit_cost);
    out += '\t';
    out += e.payload.order_ref;
    return out;
}

std::string EventLog::to_tsv() const {
    std::string out;
    for (const auto& e : events_) {
        out += event_to_tsv(e);
        out += '\n';
    }
    return out;
}

EventLog EventLog::from_tsv(const std::string& text) {
    EventLog log;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto perr = [&](const std::string& msg) {
        throw Error(ErrorKind::Parse, "emulator.ParseError", "event line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 11) perr("expected 11 fields, got " + std::to_string(f.size()));
        ActivityEvent e;
        try {
            e.seq = std::stoull(f[0]);
            e.time = std::stoll(f[6]);
            e.payload.quantity = std::stoll(f[8]);
        } catch (...) {
            perr("bad integer field");
        }
        e.member = f[1];
        e.module = f[2];
        auto kind = parse_block_kind(f[3]);
        if (!kind) perr("bad block '" + f[3] + "'");
        e.block = *kind;
        e.process = f[4];
        if (f[5] == "Start") e.phase = Phase::Start;
        else if (f[5] == "Complete") e.phase = Phase::Complete;
        else perr("bad phase '" + f[5] + "'");
        e.payload.item = f[7];
        try {
            e.payload.unit_cost = parse_rational(f[9]);
        } catch (const Error&) {
            perr("bad unit cost '" + f[9] + "'");
        }
        e.payload.order_ref = f[10];
        log.append(std::move(e));
    }
    return log;
}

std::uint64_t EventLog::hash() const { return fnv1a64(to_tsv()); }

// ---------------------------------------------------------------------------
// replay

bool EventFilter::matches(const ActivityEvent& e) const {
    if (unsatisfiable) return false;
    if (member && e.member != *member) return false;
    if (module && e.module != *module) return false;
    if (block && e.block != *block) return false;
    if (process && e.process != *process) return false;
    if (start && e.time < *start) return false;
    if (end && e.time >= *end) return false;
    return true;
}

namespace {

template <typename T>
std::optional<T> meet(const std::optional<T>& a, const std::optional<T>& b, bool& unsat) {
    if (a && b && *a != *b) unsat = true;
    return a ? a : b;
}

} // namespace

EventFilter operator&&(const EventFilter& lhs, const EventFilter& rhs) {
    EventFilter out;
    out.unsatisfiable = lhs.unsatisfiable || rhs.unsatisfiable;
    out.member = meet(lhs.member, rhs.member, out.unsatisfiable);
    out.module = meet(lhs.module, rhs.module, out.unsatisfiable);
    out.block = meet(lhs.block, rhs.block, out.unsatisfiable);
    out.process = meet(lhs.process, rhs.process, out.unsatisfiable);
    if (lhs.start && rhs.start) out.start = std::max(*lhs.start, *rhs.start);
    else out.start = lhs.start ? lhs.start : rhs.start;
    if (lhs.end && rhs.end) out.end = std::min(*lhs.end, *rhs.end);
    else out.end = lhs.end ? lhs.end : rhs.end;
    return out;
}

EventLog replay(const EventLog& log, const EventFilter& filter) {
    EventLog out;
    for (const auto& e : log) {
        if (filter.matches(e)) out.append(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// engine

namespace {

using Cont = std::function<void(Tick)>;

struct JobCtx {
    const Member* member = nullptr;
    const ModuleNode* module = nullptr;
    const Block* block = nullptr;
    std::string item;
    std::int64_t quantity = 0;
    std::string order;
};

struct BlockTimes {
    Tick core_end = 0;
    Tick job_end = 0;
};

class Engine {
public:
    Engine(const SupplyChainSystem& system, const Scenario& scenario) : sys_(system), sc_(scenario) {}

    EventLog run();

private:
    struct Action {
        Tick time;
        std::string member;
        std::uint64_t order;
        std::function<void()> fn;
    };
    struct ActionAfter {
        bool operator()(const Action& a, const Action& b) const {
            return std::tie(a.time, a.member, a.order) > std::tie(b.time, b.member, b.order);
        }
    };
    struct PendingEvent {
        ActivityEvent event;
        std::uint64_t gen;
    };
    struct QueuedJob {
        JobCtx ctx;
        Cont cont;
    };
    struct Server {
        Rational capacity{1};
        bool busy = false;
        std::deque<QueuedJob> queue;
    };

    void schedule(Tick t, const std::string& member, std::function<void()> fn) {
        agenda_.push(Action{t, member, next_action_++, std::move(fn)});
    }

    [[noreturn]] void fail(const std::string& code, const std::string& msg) const {
        throw Error(ErrorKind::Domain, "emulator." + code, msg);
    }

    const Member& member(std::string_view id) const {
        const auto* m = sys_.find_member(id);
        if (!m) fail("InfeasibleBOM", "member '" + std::string(id) + "' is not in the topology");
        return *m;
    }

    JobCtx context(const Member& m, BlockKind kind, const std::string& item, std::int64_t qty,
                   const std::string& order) const {
        const auto* mod = m.module_with(kind);
        if (!mod) fail("MissingBlock", "member '" + m.id + "' has no " + std::string(to_string(kind)) + " block");
        return JobCtx{&m, mod, mod->find_block(kind), item, qty, order};
    }

    Tick adjust(const std::string& member, Tick t) const {
        bool moved = true;
        while (moved) {
            moved = false;
            for (const auto& d : sc_.disruptions) {
                if (d.kind == DisruptionKind::MemberOutage && d.target == member && d.active(t)) {
                    t = d.end;
                    moved = true;
                }
            }
        }
        return t;
    }

    static Tick draw(const TickDistribution& d, const CounterRng& rng, std::uint64_t counter) {
        return d.lo == d.hi ? d.lo : rng.uniform(d.lo, d.hi, counter);
    }

    CounterRng stream(const std::string& entity, const std::string& purpose) const {
        return CounterRng::stream(sc_.seed, entity, purpose);
    }

    void emit(const JobCtx& ctx, const std::string& process, Phase phase, Tick time) {
        ActivityEvent e;
        e.member = ctx.member->id;
        e.module = ctx.module->id;
        e.block = ctx.block->kind;
        e.process = process;
        e.phase = phase;
        e.time = time;
        e.payload = Payload{ctx.item, ctx.quantity, sc_.unit_cost(ctx.member->id, process), ctx.order};
        pending_.push_back(PendingEvent{std::move(e), next_gen_++});
    }

    /// Runs the processes before the core step from `start`; returns the core start.
    Tick pre_core(const JobCtx& ctx, Tick start) {
        const auto& id = ctx.member->id;
        Tick cursor = adjust(id, start);
        const auto& procs = ctx.block->processes;
        const auto core = ctx.block->core_index();
        for (std::size_t i = 0; i < procs.size() && i < core; ++i) {
            const Tick st = adjust(id, cursor);
            const Tick en = adjust(id, st + sc_.process_time(id, procs[i]));
            emit(ctx, procs[i], Phase::Start, st);
            emit(ctx, procs[i], Phase::Complete, en);
            cursor = en;
        }
        return adjust(id, cursor);
    }

    /// Emits the core step over [core_start, max(core_start, nominal_end)) and the rest of the block.
    BlockTimes finish(const JobCtx& ctx, Tick core_start, Tick nominal_end) {
        const auto& id = ctx.member->id;
        const auto& procs = ctx.block->processes;
        const auto core = ctx.block->core_index();
        const Tick cs = adjust(id, core_start);
        const Tick ce = adjust(id, std::max(cs, nominal_end));
        if (procs.empty()) return {ce, ce};
        emit(ctx, procs[core], Phase::Start, cs);
        emit(ctx, procs[core], Phase::Complete, ce);
        Tick cursor = ce;
        for (std::size_t i = core + 1; i < procs.size(); ++i) {
            const Tick st = adjust(id, cursor);
            const Tick en = adjust(id, st + sc_.process_time(id, procs[i]));
            emit(ctx, procs[i], Phase::Start, st);
            emit(ctx, procs[i], Phase::Complete, en);
            cursor = en;
        }
        return {ce, cursor};
    }

    Tick core_process_time(const JobCtx& ctx) const {
        if (ctx.block->processes.empty()) return 0;
        return sc_.process_time(ctx.member->id, ctx.block->processes[ctx.block->core_index()]);
    }

    void on_order(const DemandSpec& d, std::uint64_t index, Tick t);
    void acquire(const Member& m, const std::string& item, std::int64_t qty, const std::string& order, Tick a,
                 Cont cont);
    void obtain(const Member& m, const std::string& item, std::int64_t qty, const std::string& order, Tick a,
                Cont cont);
    void make(const Member& m, const std::string& item, std::int64_t qty, const std::string& order, Tick admission,
              Cont cont);
    void start_next(const std::string& server_key, Tick now);
    void ship(const Member& src, const Member& dst, const ModuleNode& dst_module, const std::string& item,
              std::int64_t qty, const std::string& order, Tick ready, Cont on_arrival);
    void sell(const Member& m, const DemandSpec& d, std::int64_t qty, const std::string& order, std::uint64_t index,
              Tick have_at);
    void customer_return(const Member& m, const std::string& item, std::int64_t qty, const std::string& order,
                         std::uint64_t index, Tick t);

    const FlowLink& material_flow(const Member& src, const ModuleNode& src_module, const Member& dst,
                                  const ModuleNode& dst_module) const;
    TickDistribution lead_spec(const FlowLink& flow) const;
    Tick inflate(Tick lead, const std::string& carrier, Tick at) const;
    void check_feasible() const;

    const SupplyChainSystem& sys_;
    const Scenario& sc_;
    std::priority_queue<Action, std::vector<Action>, ActionAfter> agenda_;
    std::uint64_t next_action_ = 0;
    std::uint64_t next_gen_ = 0;
    std::vector<PendingEvent> pending_;
    std::map<std::string, Server> servers_;
    std::map<std::string, std::uint64_t> counters_;
    std::map<std::string, std::int64_t> open_orders_;
};

void Engine::check_feasible() const {
    std::function<void(const std::string&, const std::string&)> check = [&](const std::string& item,
                                                                             const std::string& who) {
        const auto* r = sc_.recipe_for(item);
        if (r && sys_.find_member(r->made_by)) {
            const auto& maker = *sys_.find_member(r->made_by);
            if (!maker.module_with(BlockKind::B2_Make)) {
                fail("InfeasibleBOM", "member '" + maker.id + "' makes '" + item + "' but has no B2 block");
            }
            for (const auto& [input, units] : r->inputs) check(input, maker.id);
            return;
        }
        if (sc_.external_for(item)) return;
        fail("InfeasibleBOM", "item '" + item + "' needed by '" + who + "' is neither produced nor supplied");
    };
    for (const auto& d : sc_.demand) {
        member(d.member);
        check(d.item, d.member);
    }
}

void Engine::on_order(const DemandSpec& d, std::uint64_t index, Tick t) {
    const auto& m = member(d.member);
    const auto qty = draw(d.quantity, stream(m.id, "quantity:" + d.item), index);
    const auto order = m.id + ":" + d.item + ":" + std::to_string(index);
    auto& open = open_orders_[m.id];
    if (sc_.lost_sales_backlog && open >= *sc_.lost_sales_backlog) return;
    ++open;
    acquire(m, d.item, qty, order, t, [this, &m, &d, qty, order, index](Tick have_at) {
        sell(m, d, qty, order, index, have_at);
    });
}

void Engine::acquire(const Member& m, const std::string& item, std::int64_t qty, const std::string& order, Tick a,
                     Cont cont) {
    const auto* recipe = sc_.recipe_for(item);
    if (!(recipe && recipe->made_by == m.id)) {
        obtain(m, item, qty, order, a, std::move(cont));
        return;
    }
    if (recipe->inputs.empty()) {
        schedule(a, m.id, [this, &m, item, qty, order, a, cont] { make(m, item, qty, order, a, cont); });
        return;
    }
    struct Join {
        std::size_t left;
        Tick ready;
    };
    auto join = std::make_shared<Join>(Join{recipe->inputs.size(), a});
    for (const auto& [input, units] : recipe->inputs) {
        obtain(m, input, qty * units, order, a, [this, &m, item, qty, order, cont, join](Tick got) {
            join->ready = std::max(join->ready, got);
            if (--join->left == 0) {
                const Tick ready = join->ready;
                schedule(ready, m.id, [this, &m, item, qty, order, ready, cont] { make(m, item, qty, order, ready, cont); });
            }
        });
    }
}

void Engine::obtain(const Member& m, const std::string& item, std::int64_t qty, const std::string& order, Tick a,
                    Cont cont) {
    const auto ctx = context(m, BlockKind::B1_Obtain, item, qty, order);
    const Tick s = adjust(m.id, a);
    const Tick cs = pre_core(ctx, s);
    auto arrive = [this, ctx, cs, cont](Tick arrival) {
        const auto times = finish(ctx, cs, arrival);
        schedule(times.job_end, ctx.member->id, [cont, end = times.job_end] { cont(end); });
    };
    const auto* recipe = sc_.recipe_for(item);
    if (recipe && recipe->made_by != m.id && sys_.find_member(recipe->made_by)) {
        const auto& upstream = *sys_.find_member(recipe->made_by);
        const auto* dst_module = ctx.module;
        acquire(upstream, item, qty, order, s, [this, &upstream, &m, dst_module, item, qty, order, arrive](Tick ready) {
            ship(upstream, m, *dst_module, item, qty, order, ready, arrive);
        });
        return;
    }
    const auto* ext = sc_.external_for(item);
    if (!ext) fail("InfeasibleBOM", "item '" + item + "' has no producer and no external supply");
    const auto key = "external:" + m.id + ":" + item;
    const Tick lead = draw(ext->lead_time, stream(m.id, "external:" + item), counters_[key]++);
    arrive(s + lead);
}

void Engine::make(const Member& m, const std::string& item, std::int64_t qty, const std::string& order,
                  Tick admission, Cont cont) {
    auto ctx = context(m, BlockKind::B2_Make, item, qty, order);
    const auto cap = sc_.capacity_of({m.id, ctx.module->id});
    if (!cap) {
        const Tick cs = pre_core(ctx, admission);
        const auto times = finish(ctx, cs, cs + core_process_time(ctx));
        schedule(times.job_end, m.id, [cont, end = times.job_end] { cont(end); });
        return;
    }
    const auto key = m.id + "/" + ctx.module->id;
    auto& server = servers_[key];
    server.capacity = *cap;
    server.queue.push_back(QueuedJob{std::move(ctx), std::move(cont)});
    if (!server.busy) start_next(key, admission);
}

void Engine::start_next(const std::string& key, Tick now) {
    auto& server = servers_[key];
    if (server.queue.empty()) {
        server.busy = false;
        return;
    }
    server.busy = true;
    auto job = std::move(server.queue.front());
    server.queue.pop_front();
    const auto& ctx = job.ctx;
    const auto& id = ctx.member->id;
    Tick cs = pre_core(ctx, now);
    Rational capacity = server.capacity;
    for (bool moved = true; moved;) {
        moved = false;
        capacity = server.capacity;
        for (const auto& d : sc_.disruptions) {
            if (d.kind != DisruptionKind::CapacityDrop || !d.active(cs)) continue;
            if (d.target != id && d.target != key) continue;
            capacity *= (Rational(1) - d.magnitude);
        }
        if (capacity <= 0) {
            Tick resume = cs;
            for (const auto& d : sc_.disruptions) {
                if (d.kind == DisruptionKind::CapacityDrop && d.active(cs) && (d.target == id || d.target == key) &&
                    d.magnitude >= 1) {
                    resume = std::max(resume, d.end);
                }
            }
            cs = adjust(id, resume);
            moved = true;
        }
    }
    const Tick duration = ceil_nonneg(Rational(ctx.quantity) / capacity);
    const auto times = finish(ctx, cs, cs + duration);
    schedule(times.job_end, id, [this, key, cont = job.cont, end = times.job_end] {
        cont(end);
        start_next(key, end);
    });
}

const FlowLink& Engine::material_flow(const Member& src, const ModuleNode& src_module, const Member& dst,
                                      const ModuleNode& dst_module) const {
    const FlowLink* fallback = nullptr;
    for (const auto& f : sys_.flows) {
        if (f.flow != FlowKind::Material) continue;
        if (f.from.member == src.id && f.to.member == dst.id) {
            if (f.from.module == src_module.id && f.to.module == dst_module.id) return f;
            if (!fallback) fallback = &f;
        }
    }
    if (!fallback) fail("NoMaterialFlow", "no material flow from '" + src.id + "' to '" + dst.id + "'");
    return *fallback;
}

TickDistribution Engine::lead_spec(const FlowLink& flow) const {
    for (const auto& l : sc_.lead_times) {
        if (l.from == flow.from && l.to == flow.to) return l.ticks;
    }
    return sc_.default_lead_time;
}

Tick Engine::inflate(Tick lead, const std::string& carrier, Tick at) const {
    for (const auto& d : sc_.disruptions) {
        if (d.kind == DisruptionKind::LeadTimeInflation && d.target == carrier && d.active(at)) {
            lead = ceil_nonneg(Rational(lead) * (Rational(1) + d.magnitude));
        }
    }
    return lead;
}

void Engine::ship(const Member& src, const Member& dst, const ModuleNode& dst_module, const std::string& item,
                  std::int64_t qty, const std::string& order, Tick ready, Cont on_arrival) {
    const auto ctx = context(src, BlockKind::B3_Distribute, item, qty, order);
    const auto& flow = material_flow(src, *ctx.module, dst, dst_module);
    const auto carrier_id = sys_.effective_carrier(flow).value_or(src.id);
    const Tick cs = pre_core(ctx, ready);

    const auto flow_key = flow.from.str() + ">" + flow.to.str();
    Tick lead = draw(lead_spec(flow), stream(src.id, "lead:" + flow_key), counters_["lead:" + flow_key]++);

    Tick arrival = 0;
    if (carrier_id != src.id && carrier_id != dst.id) {
        const auto& carrier = member(carrier_id);
        const Tick pickup = adjust(carrier_id, cs);
        Tick depart = pickup;
        if (carrier.module_with(BlockKind::B1_Obtain)) {
            const auto c1 = context(carrier, BlockKind::B1_Obtain, item, qty, order);
            const Tick c1cs = pre_core(c1, pickup);
            depart = finish(c1, c1cs, c1cs + core_process_time(c1)).job_end;
        }
        lead = inflate(lead, carrier_id, depart);
        if (carrier.module_with(BlockKind::B3_Distribute)) {
            const auto c3 = context(carrier, BlockKind::B3_Distribute, item, qty, order);
            const Tick c3cs = pre_core(c3, depart);
            arrival = finish(c3, c3cs, adjust(carrier_id, c3cs + lead)).core_end;
        } else {
            arrival = adjust(carrier_id, depart + lead);
        }
    } else {
        lead = inflate(lead, carrier_id, cs);
        arrival = adjust(carrier_id, cs + lead);
    }
    finish(ctx, cs, arrival);
    on_arrival(arrival);
}

void Engine::sell(const Member& m, const DemandSpec& d, std::int64_t qty, const std::string& order,
                  std::uint64_t index, Tick have_at) {
    const auto ctx = context(m, BlockKind::B3_Distribute, d.item, qty, order);
    const Tick cs = pre_core(ctx, have_at);
    const Tick lead = draw(d.delivery_lead_time, stream(m.id, "delivery:" + d.item), index);
    const auto times = finish(ctx, cs, cs + lead);
    schedule(times.job_end, m.id, [this, &m, item = d.item, qty, order, index, end = times.job_end] {
        --open_orders_[m.id];
        auto rate = sc_.return_rates.find(m.id);
        if (rate == sc_.return_rates.end() || rate->second <= 0) return;
        if (stream(m.id, "return:" + item).bernoulli(rate->second, index)) {
            customer_return(m, item, qty, order, index, end);
        }
    });
}

void Engine::customer_return(const Member& m, const std::string& item, std::int64_t qty, const std::string& order,
                             std::uint64_t index, Tick t) {
    if (!m.module_with(BlockKind::B5_ReturnFromDownstream)) return;
    const auto in = context(m, BlockKind::B5_ReturnFromDownstream, item, qty, order);
    const Tick ics = pre_core(in, t);
    const Tick received = finish(in, ics, ics + core_process_time(in)).job_end;

    const auto* recipe = sc_.recipe_for(item);
    if (!recipe || recipe->made_by == m.id) return;
    const auto* upstream = sys_.find_member(recipe->made_by);
    if (!upstream || !m.module_with(BlockKind::B4_ReturnToUpstream) ||
        !upstream->module_with(BlockKind::B5_ReturnFromDownstream) || !upstream->module_with(BlockKind::B3_Distribute) ||
        !m.module_with(BlockKind::B1_Obtain)) {
        return;
    }
    const auto& flow = material_flow(*upstream, *upstream->module_with(BlockKind::B3_Distribute), m,
                                     *m.module_with(BlockKind::B1_Obtain));
    const auto carrier_id = sys_.effective_carrier(flow).value_or(upstream->id);
    const auto out = context(m, BlockKind::B4_ReturnToUpstream, item, qty, order);
    const Tick ocs = pre_core(out, received);
    const auto flow_key = flow.from.str() + ">" + flow.to.str();
    const Tick lead = inflate(draw(lead_spec(flow), stream(m.id, "return-lead:" + flow_key), index), carrier_id, ocs);
    const Tick arrival = adjust(carrier_id, ocs + lead);
    finish(out, ocs, arrival);

    const auto back = context(*upstream, BlockKind::B5_ReturnFromDownstream, item, qty, order);
    const Tick bcs = pre_core(back, arrival);
    finish(back, bcs, bcs + core_process_time(back));
}

EventLog Engine::run() {
    validate_scenario(sc_);
    check_feasible();

    for (const auto& d : sc_.demand) {
        const auto& m = member(d.member);
        const auto arrivals = stream(m.id, "demand:" + d.item);
        std::uint64_t index = 0;
        for (Tick t = 0; t < sc_.horizon; ++t) {
            bool arrive = false;
            if (d.period) {
                arrive = t >= d.offset && (t - d.offset) % *d.period == 0;
            } else {
                Rational rate = *d.rate;
                for (const auto& dis : sc_.disruptions) {
                    if (dis.kind == DisruptionKind::DemandSurge && dis.target == m.id && dis.active(t)) {
                        rate *= (Rational(1) + dis.magnitude);
                    }
                }
                arrive = arrivals.bernoulli(std::min(rate, Rational(1)), static_cast<std::uint64_t>(t));
            }
            if (!arrive) continue;
            const auto k = index++;
            schedule(t, m.id, [this, &d, k, t] { on_order(d, k, t); });
        }
    }

    while (!agenda_.empty()) {
        auto action = agenda_.top();
        agenda_.pop();
        action.fn();
    }

    std::stable_sort(pending_.begin(), pending_.end(), [](const PendingEvent& a, const PendingEvent& b) {
        return std::tie(a.event.time, a.event.member, a.gen) < std::tie(b.event.time, b.event.member, b.gen);
    });
    EventLog log;
    std::uint64_t seq = 0;
    for (auto& p : pending_) {
        if (p.event.time >= sc_.horizon) continue;
        p.event.seq = seq++;
        log.append(std::move(p.event));
    }
    return log;
}

} // namespace

EventLog run_scenario(const SupplyChainSystem& system, const Scenario& scenario) {
    Engine engine(system, scenario);
    return engine.run();
}

} // namespace scdt
