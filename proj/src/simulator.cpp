#include "dcg/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcg::sim {

std::size_t payload_scalar_count(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ScalarShare>) {
                return 1;
            } else if constexpr (std::is_same_v<T, StateShare>) {
                return static_cast<std::size_t>(p.dims);
            } else if constexpr (std::is_same_v<T, PartialVectorShare>) {
                std::size_t count = 0;
                for (const auto& pv : p.columns) count += pv.known_count();
                return count;
            } else {
                return p.entries.size() + p.rhs.size();
            }
        },
        payload);
}

void Outbox::send(int to, Payload payload) {
    if (!std::binary_search(neighbors_->begin(), neighbors_->end(), to)) {
        throw NonNeighborSend("agent " + std::to_string(sender_) + " addressed non-neighbor " +
                              std::to_string(to));
    }
    sink_->push_back({to, Message{sender_, std::move(payload)}});
}

void Outbox::broadcast(const Payload& payload) {
    for (int to : *neighbors_) sink_->push_back({to, Message{sender_, payload}});
}

std::size_t RunTrace::total_messages() const {
    std::size_t total = 0;
    for (const auto& report : rounds) total += report.messages_sent;
    return total;
}

std::uint64_t RunTrace::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix_u64 = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    auto mix_d = [&](double v) { mix_u64(std::bit_cast<std::uint64_t>(v)); };

    mix_u64(rounds.size());
    for (const auto& report : rounds) {
        mix_u64(static_cast<std::uint64_t>(report.round));
        mix_u64(report.messages_sent);
        mix_u64(report.bytes_modeled);
        std::uint64_t halted_bits = 0;
        for (std::size_t i = 0; i < report.per_agent_halted.size(); ++i) {
            halted_bits = halted_bits * 31 + (report.per_agent_halted[i] ? 1 : 0);
        }
        mix_u64(halted_bits);
    }
    for (double v : residual_sq_history) mix_d(v);
    for (double v : mse_history) mix_d(v);
    for (const auto& est : final_estimates) {
        mix_u64(est.size());
        for (double v : est) mix_d(v);
    }
    mix_u64(hit_max_rounds ? 1 : 0);
    return h;
}

namespace {

// Estimate snapshot cadence for trail plots: every round early on, then a
// power-of-two stride so long runs keep a bounded number of samples.
bool snapshot_due(int round) {
    if (round <= 128) return true;
    int stride = 1;
    while (stride * 256 < round) stride <<= 1;
    return round % stride == 0;
}

double agent_component(const Agent& agent, std::size_t column) {
    const auto est = agent.estimate();
    return column < est.size() ? est[column] : 0.0;
}

void record_metrics(const TraceProbe& probe,
                    const std::vector<std::unique_ptr<Agent>>& agents, RunTrace& trace) {
    double residual_sq = 0.0;
    double mse = 0.0;
    if (probe.system) {
        const auto& sys = *probe.system;
        const std::size_t k = sys.a.rows();
        const std::size_t d = sys.b.cols();
        lin::DenseVector x(k);
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t i = 0; i < k; ++i) {
                x[i] = agent_component(*agents[sys.row_agents[i]], c);
            }
            const lin::DenseVector ax = lin::matvec(sys.a, x);
            for (std::size_t i = 0; i < k; ++i) {
                const double r = ax[i] - sys.b(i, c);
                residual_sq += r * r;
            }
            if (probe.ground_truth) {
                for (std::size_t i = 0; i < k; ++i) {
                    const double e = x[i] - (*probe.ground_truth)(i, c);
                    mse += e * e;
                }
            }
        }
        if (probe.ground_truth && k > 0) mse /= static_cast<double>(k);
    }
    trace.residual_sq_history.push_back(residual_sq);
    trace.mse_history.push_back(mse);
}

void record_snapshot(const std::vector<std::unique_ptr<Agent>>& agents, int round,
                     RunTrace& trace) {
    std::vector<std::vector<double>> estimates;
    estimates.reserve(agents.size());
    for (const auto& agent : agents) {
        const auto est = agent->estimate();
        estimates.emplace_back(est.begin(), est.end());
    }
    trace.estimate_snapshots.emplace_back(round, std::move(estimates));
}

void finalize_trace(const std::vector<std::unique_ptr<Agent>>& agents, RunTrace& trace) {
    trace.final_estimates.reserve(agents.size());
    for (const auto& agent : agents) {
        const auto est = agent->estimate();
        trace.final_estimates.emplace_back(est.begin(), est.end());
    }
}

}  // namespace

RunTrace run_synchronous(const std::vector<std::unique_ptr<Agent>>& agents,
                         const net::Network& net, int max_rounds, const TraceProbe& probe,
                         const EngineOptions& options) {
    const int n = net.n();
    if (static_cast<int>(agents.size()) != n) {
        throw std::invalid_argument("run_synchronous: one behavior per agent required");
    }
    if (max_rounds < 1) throw std::invalid_argument("run_synchronous: max_rounds < 1");

    std::vector<std::vector<Message>> inbox_cur(n), inbox_next(n);
    std::vector<std::vector<OutMessage>> outboxes(n);

    RunTrace trace;
    bool stopped = false;

    auto step_agent = [&](int i, int round) {
        outboxes[i].clear();
        if (!agents[i]->halted()) {
            Outbox out(i, net.neighbors(i), outboxes[i]);
            agents[i]->on_round(round, std::span<const Message>(inbox_cur[i]), out);
        }
        inbox_cur[i].clear();
    };

    for (int round = 1; round <= max_rounds; ++round) {
        if (options.step_mode == StepMode::serial) {
            for (int i = 0; i < n; ++i) step_agent(i, round);
        } else {
            // Within-round steps read only (own state, inbox); they are
            // independent and may run concurrently. Routing below stays in
            // ascending id order, so the trace is identical to serial mode.
            std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 8)
            for (int i = 0; i < n; ++i) {
                try {
                    step_agent(i, round);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
            for (int i = 0; i < n; ++i) {
                if (errors[i]) std::rethrow_exception(errors[i]);
            }
        }

        RoundReport report;
        report.round = round;
        report.per_agent_halted.resize(n);
        for (int sender = 0; sender < n; ++sender) {
            for (auto& out : outboxes[sender]) {
                report.messages_sent += 1;
                report.bytes_modeled += 8 * payload_scalar_count(out.msg.payload);
                inbox_next[out.to].push_back(std::move(out.msg));
            }
            outboxes[sender].clear();
            report.per_agent_halted[sender] = agents[sender]->halted();
        }
        const bool all_halted =
            std::all_of(report.per_agent_halted.begin(), report.per_agent_halted.end(),
                        [](bool halted) { return halted; });
        trace.rounds.push_back(std::move(report));
        record_metrics(probe, agents, trace);
        if (probe.record_estimates && snapshot_due(round)) record_snapshot(agents, round, trace);

        if (probe.halt_epsilon && trace.residual_sq_history.back() < *probe.halt_epsilon) {
            stopped = true;
        }
        if (all_halted) stopped = true;
        if (stopped) break;
        std::swap(inbox_cur, inbox_next);
    }

    if (!stopped) trace.hit_max_rounds = true;
    if (probe.record_estimates &&
        (trace.estimate_snapshots.empty() ||
         trace.estimate_snapshots.back().first != trace.total_rounds())) {
        record_snapshot(agents, trace.total_rounds(), trace);
    }
    finalize_trace(agents, trace);
    return trace;
}

RunTrace sequential_sweep(const std::vector<std::unique_ptr<Agent>>& agents,
                          const net::Network& net, int max_sweeps, const TraceProbe& probe) {
    const int n = net.n();
    if (static_cast<int>(agents.size()) != n) {
        throw std::invalid_argument("sequential_sweep: one behavior per agent required");
    }
    if (max_sweeps < 1) throw std::invalid_argument("sequential_sweep: max_sweeps < 1");

    std::vector<std::vector<Message>> pending(n);
    std::vector<OutMessage> outbox;

    RunTrace trace;
    bool stopped = false;

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        RoundReport report;
        report.round = sweep;
        report.per_agent_halted.resize(n);
        for (int i = 0; i < n; ++i) {
            if (agents[i]->halted()) {
                pending[i].clear();
                continue;
            }
            std::stable_sort(pending[i].begin(), pending[i].end(),
                             [](const Message& a, const Message& b) { return a.sender < b.sender; });
            outbox.clear();
            Outbox out(i, net.neighbors(i), outbox);
            agents[i]->on_round(sweep, std::span<const Message>(pending[i]), out);
            pending[i].clear();
            // Immediate delivery: later agents in this sweep see these
            // messages; earlier agents pick them up next sweep.
            for (auto& om : outbox) {
                report.messages_sent += 1;
                report.bytes_modeled += 8 * payload_scalar_count(om.msg.payload);
                pending[om.to].push_back(std::move(om.msg));
            }
        }
        for (int i = 0; i < n; ++i) report.per_agent_halted[i] = agents[i]->halted();
        const bool all_halted =
            std::all_of(report.per_agent_halted.begin(), report.per_agent_halted.end(),
                        [](bool halted) { return halted; });
        trace.rounds.push_back(std::move(report));
        record_metrics(probe, agents, trace);
        if (probe.record_estimates && snapshot_due(sweep)) record_snapshot(agents, sweep, trace);

        if (probe.halt_epsilon && trace.residual_sq_history.back() < *probe.halt_epsilon) {
            stopped = true;
        }
        if (all_halted) stopped = true;
        if (stopped) break;
    }

    if (!stopped) trace.hit_max_rounds = true;
    finalize_trace(agents, trace);
    return trace;
}

}  // namespace dcg::sim
