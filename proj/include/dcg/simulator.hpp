#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "dcg/linalg.hpp"
#include "dcg/network.hpp"
#include "dcg/partial_vector.hpp"

namespace dcg::sim {

// ---- message payloads ----

struct ScalarShare {
    int index;
    double value;
};

// Broadcast of an agent's current estimate (up to 3 spatial components).
struct StateShare {
    std::array<double, 3> estimate{};
    int dims = 0;
};

// One gossip share: the sender's current partial vectors, one per solution
// column, batched into a single message.
struct PartialVectorShare {
    std::vector<PartialVector> columns;
};

// One agent's system row (and right-hand-side entries) for the assembly
// protocols.
struct RowShare {
    int owner = -1;
    std::vector<std::pair<int, double>> entries;  // (column, value), sorted
    std::vector<double> rhs;
};

using Payload = std::variant<ScalarShare, StateShare, PartialVectorShare, RowShare>;

struct Message {
    int sender;
    Payload payload;
};

// Number of modeled real scalars in a payload (8 bytes each; index overhead
// is ignored).
std::size_t payload_scalar_count(const Payload& payload);

// ---- agent interface ----

struct OutMessage {
    int to;
    Message msg;
};

class Outbox {
  public:
    Outbox(int sender, const std::vector<int>& neighbors, std::vector<OutMessage>& sink)
        : sender_(sender), neighbors_(&neighbors), sink_(&sink) {}

    void send(int to, Payload payload);
    void broadcast(const Payload& payload);

  private:
    int sender_;
    const std::vector<int>* neighbors_;
    std::vector<OutMessage>* sink_;
};

// A per-round behavior. The engine is the only caller; an agent sees nothing
// but its own state and its inbox.
class Agent {
  public:
    virtual ~Agent() = default;

    // inbox holds the messages addressed to this agent in the previous round,
    // sorted by sender id.
    virtual void on_round(int round, std::span<const Message> inbox, Outbox& out) = 0;

    virtual bool halted() const = 0;

    // Current estimate for trace recording; empty when the agent has none.
    virtual std::span<const double> estimate() const { return {}; }
};

// ---- traces ----

struct RoundReport {
    int round = 0;
    std::size_t messages_sent = 0;
    std::size_t bytes_modeled = 0;
    std::vector<bool> per_agent_halted;
};

struct RunTrace {
    std::vector<RoundReport> rounds;
    std::vector<double> residual_sq_history;
    std::vector<double> mse_history;
    std::vector<std::vector<double>> final_estimates;
    bool hit_max_rounds = false;
    // Sparse per-round estimate snapshots (round, per-agent estimates); only
    // filled when TraceProbe::record_estimates is set.
    std::vector<std::pair<int, std::vector<std::vector<double>>>> estimate_snapshots;

    int total_rounds() const { return static_cast<int>(rounds.size()); }
    std::size_t total_messages() const;
    double final_residual_sq() const { return residual_sq_history.back(); }
    double final_mse() const { return mse_history.back(); }
    std::uint64_t hash() const;
};

// Central metrics recorder. It may own the dense system being solved (a
// harness-side oracle); agents never see it.
struct TraceProbe {
    struct System {
        lin::DenseMatrix a;        // k x k
        lin::DenseMatrix b;        // k x d
        std::vector<int> row_agents;  // row i of the system belongs to this agent
    };
    std::optional<System> system;
    // Ground truth per system row (same row order as System::row_agents).
    std::optional<lin::DenseMatrix> ground_truth;
    // Central stop: end the run once residual_sq drops below this.
    std::optional<double> halt_epsilon;
    bool record_estimates = false;
};

// ---- engines ----

enum class StepMode {
    serial,  // reference schedule
    openmp,  // within-round agent steps in parallel; trace is identical
};

struct EngineOptions {
    StepMode step_mode = StepMode::serial;
};

// Deterministic synchronous rounds: each round every non-halted agent
// receives the messages sent to it in the previous round (sorted by sender),
// steps, and sends to neighbors only. Ends when all agents halt, the probe's
// central stop fires, or max_rounds elapses (reported in the trace).
RunTrace run_synchronous(const std::vector<std::unique_ptr<Agent>>& agents,
                         const net::Network& net, int max_rounds, const TraceProbe& probe = {},
                         const EngineOptions& options = {});

// Gauss-Seidel fidelity mode: within each sweep agents are activated one at a
// time in ascending id order and outboxes are delivered immediately, so an
// agent sees lower-id updates from the current sweep.
RunTrace sequential_sweep(const std::vector<std::unique_ptr<Agent>>& agents,
                          const net::Network& net, int max_sweeps, const TraceProbe& probe = {});

}  // namespace dcg::sim
