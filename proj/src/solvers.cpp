#include "dcg/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

namespace dcg::solve {

double RowSlice::coefficient(int col) const {
    auto it = std::lower_bound(coefficients.begin(), coefficients.end(), col,
                               [](const auto& entry, int key) { return entry.first < key; });
    return (it != coefficients.end() && it->first == col) ? it->second : 0.0;
}

void RowSlice::validate_against(const net::Network& net) const {
    for (const auto& [col, val] : coefficients) {
        if (val == 0.0 || col == owner) continue;
        if (!net.has_edge(owner, col)) {
            throw SparsityViolation("row " + std::to_string(owner) + " has nonzero at column " +
                                    std::to_string(col) + " outside the neighbor pattern");
        }
    }
}

double default_epsilon(const lin::DenseMatrix& b) {
    double worst = 0.0;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        double s = 0.0;
        for (std::size_t i = 0; i < b.rows(); ++i) s += b(i, c) * b(i, c);
        worst = std::max(worst, s);
    }
    return 1e-10 * (1.0 + worst);
}

net::Network system_graph(const std::vector<RowSlice>& rows, int n) {
    std::vector<std::vector<int>> adjacency(n);
    auto link = [&adjacency](int i, int j) {
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
    };
    for (const auto& row : rows) {
        for (const auto& [col, val] : row.coefficients) {
            if (val != 0.0 && col != row.owner) link(row.owner, col);
        }
    }
    for (auto& nbrs : adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return net::Network(n, 2, std::move(adjacency), std::nullopt, 0.0);
}

// ---- protocol steps ----

double dcg_update_residual(const RowSlice& row, std::size_t column, double own_estimate,
                           const std::map<int, double>& neighbor_estimates) {
    double r = -row.rhs[column];
    for (const auto& [col, val] : row.coefficients) {
        if (col == row.owner) {
            r += val * own_estimate;
            continue;
        }
        auto it = neighbor_estimates.find(col);
        if (it == neighbor_estimates.end()) {
            throw MissingNeighborState("residual of agent " + std::to_string(row.owner) +
                                       " needs the estimate of column " + std::to_string(col));
        }
        r += val * it->second;
    }
    return r;
}

double dcg_update_residual(const RowSlice& row, std::size_t column,
                           std::span<const double> estimates) {
    double r = -row.rhs[column];
    for (const auto& [col, val] : row.coefficients) {
        if (static_cast<std::size_t>(col) >= estimates.size()) {
            throw MissingNeighborState("residual of agent " + std::to_string(row.owner) +
                                       " needs the estimate of column " + std::to_string(col));
        }
        r += val * estimates[static_cast<std::size_t>(col)];
    }
    return r;
}

bool dcg_check_residual(const PartialVector& r_full, double epsilon) {
    if (!r_full.complete()) throw Incomplete("residual check on an incomplete vector");
    return r_full.sum_sq() < epsilon;
}

double dcg_update_direction(double r_i, double sum_r_sq, double sum_r_prev_sq, double d_prev_i) {
    if (sum_r_prev_sq == 0.0) {
        throw ZeroPrevResidual("previous residual is exactly zero; the run should have halted");
    }
    return -r_i + (sum_r_sq / sum_r_prev_sq) * d_prev_i;
}

double dcg_update_step(const PartialVector& d_full, const PartialVector& r_full,
                       const PartialVector& t_full) {
    const double numer = dot_complete(d_full, r_full);
    const double denom = dot_complete(d_full, t_full);
    if (std::abs(denom) < 1e-300) {
        throw ZeroCurvature("step size denominator vanished; system not positive definite "
                            "along the search direction");
    }
    return -numer / denom;
}

// ---- SyncTask ----

SyncTask::SyncTask(std::vector<PartialVector> initial, int horizon)
    : columns_(std::move(initial)), horizon_(horizon) {}

void SyncTask::share(sim::Outbox& out) const {
    out.broadcast(sim::PartialVectorShare{columns_});
}

void SyncTask::absorb(const sim::PartialVectorShare& share) {
    if (share.columns.size() != columns_.size()) {
        throw InconsistentShare("sync share with mismatched column count");
    }
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        columns_[c].merge_in_place(share.columns[c]);
    }
}

const std::vector<PartialVector>& SyncTask::completed_columns() const {
    for (const auto& column : columns_) {
        if (!column.complete()) {
            throw Incomplete("vector synchronization ended with " +
                             std::to_string(column.length() - column.known_count()) +
                             " unknown indices; horizon too small or network disconnected");
        }
    }
    return columns_;
}

// ---- DcgAgent ----

DcgAgent::DcgAgent(RowSlice row, int system_index, std::size_t system_size, std::size_t dims,
                   SolverConfig config, int horizon)
    : row_(std::move(row)),
      index_(system_index),
      size_(system_size),
      dims_(dims),
      config_(config),
      horizon_(horizon) {
    if (dims_ == 0 || dims_ > 3) throw std::invalid_argument("DcgAgent: dims must be 1..3");
    if (row_.rhs.size() != dims_) throw std::invalid_argument("DcgAgent: rhs size != dims");
    if (!(config_.epsilon > 0.0)) throw std::invalid_argument("DcgAgent: epsilon must be > 0");
    if (config_.t_max < 1) throw std::invalid_argument("DcgAgent: t_max must be >= 1");
    r_i_.assign(dims_, 0.0);
    r_prev_i_.assign(dims_, 0.0);
    d_prev_i_.assign(dims_, 0.0);
    d_i_.assign(dims_, 0.0);
    sum_r_sq_.assign(dims_, 0.0);
    sum_r_prev_sq_.assign(dims_, 0.0);
    r_full_.assign(dims_, PartialVector(size_));
    d_full_pv_.assign(dims_, PartialVector(size_));
    d_dense_.assign(dims_, std::vector<double>(size_, 0.0));
    estimates_.assign(dims_, std::vector<double>(size_, 0.0));
    frozen_.assign(dims_, false);
    iteration_log_.resize(dims_);
    // Line-1 initialization: estimate 0, direction 0, residual -b.
    for (std::size_t c = 0; c < dims_; ++c) r_prev_i_[c] = -row_.rhs[c];
}

void DcgAgent::on_round(int /*round*/, std::span<const sim::Message> inbox, sim::Outbox& out) {
    if (!started_) {
        started_ = true;
        start_iteration(out);
        return;
    }
    for (const auto& msg : inbox) {
        if (const auto* share = std::get_if<sim::PartialVectorShare>(&msg.payload)) {
            task_.absorb(*share);
        }
    }
    task_.advance_round();
    if (!task_.finished()) {
        task_.share(out);
        return;
    }
    dispatch(out);
}

void DcgAgent::start_iteration(sim::Outbox& out) {
    std::vector<PartialVector> columns;
    columns.reserve(dims_);
    for (std::size_t c = 0; c < dims_; ++c) {
        r_i_[c] = dcg_update_residual(row_, c, estimates_[c]);
        columns.push_back(PartialVector::single(size_, index_, r_i_[c]));
    }
    phase_ = Phase::sync_r;
    begin_task(std::move(columns), out);
}

void DcgAgent::begin_task(std::vector<PartialVector> columns, sim::Outbox& out) {
    task_ = SyncTask(std::move(columns), horizon_);
    ++syncs_started_;
    task_.share(out);
}

void DcgAgent::compute_directions() {
    for (std::size_t c = 0; c < dims_; ++c) {
        if (frozen_[c]) {
            d_i_[c] = 0.0;
            continue;
        }
        // At t = 1 the previous direction is zero, so the correction term
        // vanishes no matter what sum r(0)^2 is.
        d_i_[c] = t_ == 1 ? -r_i_[c]
                          : dcg_update_direction(r_i_[c], sum_r_sq_[c], sum_r_prev_sq_[c],
                                                 d_prev_i_[c]);
    }
}

void DcgAgent::dispatch(sim::Outbox& out) {
    switch (phase_) {
        case Phase::sync_r: {
            r_full_ = task_.completed_columns();
            bool all_below = true;
            for (std::size_t c = 0; c < dims_; ++c) {
                sum_r_sq_[c] = r_full_[c].sum_sq();
                if (!(sum_r_sq_[c] < config_.epsilon)) all_below = false;
            }
            if (all_below) {
                halted_ = true;
                converged_ = true;
                return;
            }
            for (std::size_t c = 0; c < dims_; ++c) {
                if (sum_r_sq_[c] < config_.epsilon) frozen_[c] = true;
            }
            if (config_.strict_sync) {
                std::vector<PartialVector> columns;
                columns.reserve(dims_);
                for (std::size_t c = 0; c < dims_; ++c) {
                    columns.push_back(PartialVector::single(size_, index_, r_prev_i_[c]));
                }
                phase_ = Phase::sync_r_prev;
                begin_task(std::move(columns), out);
            } else {
                compute_directions();
                std::vector<PartialVector> columns;
                columns.reserve(dims_);
                for (std::size_t c = 0; c < dims_; ++c) {
                    columns.push_back(PartialVector::single(size_, index_, d_i_[c]));
                }
                phase_ = Phase::sync_d;
                begin_task(std::move(columns), out);
            }
            return;
        }
        case Phase::sync_r_prev: {
            const auto& columns = task_.completed_columns();
            for (std::size_t c = 0; c < dims_; ++c) sum_r_prev_sq_[c] = columns[c].sum_sq();
            compute_directions();
            std::vector<PartialVector> next;
            next.reserve(dims_);
            for (std::size_t c = 0; c < dims_; ++c) {
                next.push_back(PartialVector::single(size_, index_, d_i_[c]));
            }
            phase_ = Phase::sync_d;
            begin_task(std::move(next), out);
            return;
        }
        case Phase::sync_d: {
            const auto& columns = task_.completed_columns();
            std::vector<PartialVector> t_columns;
            t_columns.reserve(dims_);
            for (std::size_t c = 0; c < dims_; ++c) {
                d_full_pv_[c] = columns[c];
                d_dense_[c] = columns[c].to_dense();
                // T_i = (A d)_i over the row's support, self term included.
                double t_i = 0.0;
                for (const auto& [col, val] : row_.coefficients) {
                    t_i += val * d_dense_[c][static_cast<std::size_t>(col)];
                }
                t_columns.push_back(PartialVector::single(size_, index_, t_i));
            }
            phase_ = Phase::sync_t;
            begin_task(std::move(t_columns), out);
            return;
        }
        case Phase::sync_t: {
            const auto& t_columns = task_.completed_columns();
            for (std::size_t c = 0; c < dims_; ++c) {
                if (frozen_[c]) continue;
                const double alpha = dcg_update_step(d_full_pv_[c], r_full_[c], t_columns[c]);
                iteration_log_[c].push_back({t_, alpha, sum_r_sq_[c]});
                auto& est = estimates_[c];
                const auto& dir = d_dense_[c];
                for (std::size_t j = 0; j < size_; ++j) est[j] += alpha * dir[j];
            }
            for (std::size_t c = 0; c < dims_; ++c) {
                own_estimate_[c] = estimates_[c][static_cast<std::size_t>(index_)];
                r_prev_i_[c] = r_i_[c];
                d_prev_i_[c] = d_i_[c];
                sum_r_prev_sq_[c] = sum_r_sq_[c];
            }
            iterations_run_ = t_;
            ++t_;
            if (t_ > config_.t_max) {
                halted_ = true;
                hit_cap_ = true;
                return;
            }
            start_iteration(out);
            return;
        }
    }
}

// ---- SyncRelayAgent ----

SyncRelayAgent::SyncRelayAgent(std::size_t system_size, std::size_t dims, SolverConfig config,
                               int horizon)
    : size_(system_size), dims_(dims), config_(config), horizon_(horizon) {}

SyncRelayAgent::Phase SyncRelayAgent::next_phase() const {
    switch (phase_) {
        case Phase::sync_r:
            return config_.strict_sync ? Phase::sync_r_prev : Phase::sync_d;
        case Phase::sync_r_prev:
            return Phase::sync_d;
        case Phase::sync_d:
            return Phase::sync_t;
        case Phase::sync_t:
            return Phase::sync_r;
    }
    return Phase::sync_r;
}

void SyncRelayAgent::begin_task(sim::Outbox& /*out*/, bool /*initial*/) {
    task_ = SyncTask(std::vector<PartialVector>(dims_, PartialVector(size_)), horizon_);
    // Nothing to contribute; forwarding starts once shares arrive.
}

void SyncRelayAgent::on_round(int /*round*/, std::span<const sim::Message> inbox,
                              sim::Outbox& out) {
    if (!started_) {
        started_ = true;
        begin_task(out, true);
        return;
    }
    for (const auto& msg : inbox) {
        if (const auto* share = std::get_if<sim::PartialVectorShare>(&msg.payload)) {
            task_.absorb(*share);
        }
    }
    task_.advance_round();
    if (!task_.finished()) {
        bool have_content = false;
        for (const auto& column : task_.columns()) {
            if (column.known_count() > 0) have_content = true;
        }
        if (have_content) task_.share(out);
        return;
    }
    // Mirror the solvers' phase transition so halting lands on the same round.
    if (phase_ == Phase::sync_r) {
        const auto& columns = task_.completed_columns();
        bool all_below = true;
        for (const auto& column : columns) {
            if (!(column.sum_sq() < config_.epsilon)) all_below = false;
        }
        if (all_below) {
            halted_ = true;
            return;
        }
    } else if (phase_ == Phase::sync_t) {
        ++t_;
        if (t_ > config_.t_max) {
            halted_ = true;
            return;
        }
    }
    phase_ = next_phase();
    begin_task(out, false);
}

// ---- stationary baselines ----

namespace {

void absorb_state_shares(std::span<const sim::Message> inbox,
                         std::map<int, std::array<double, 3>>& cache) {
    for (const auto& msg : inbox) {
        if (const auto* share = std::get_if<sim::StateShare>(&msg.payload)) {
            cache[msg.sender] = share->estimate;
        }
    }
}

double cached_component(const std::map<int, std::array<double, 3>>& cache, int id,
                        std::size_t column) {
    auto it = cache.find(id);
    return it == cache.end() ? 0.0 : it->second[column];
}

void check_divergence(const std::array<double, 3>& estimate, std::size_t dims) {
    double sq = 0.0;
    for (std::size_t c = 0; c < dims; ++c) sq += estimate[c] * estimate[c];
    if (sq > 1e24) {
        throw DivergenceDetected("estimate norm exceeded 1e12; iteration matrix has "
                                 "spectral radius >= 1");
    }
}

}  // namespace

JacobiAgent::JacobiAgent(RowSlice row, std::size_t dims) : row_(std::move(row)), dims_(dims) {
    diag_ = row_.diagonal();
    if (diag_ == 0.0) {
        throw ZeroDiagonal("jacobi agent " + std::to_string(row_.owner) + ": zero diagonal");
    }
}

void JacobiAgent::on_round(int /*round*/, std::span<const sim::Message> inbox, sim::Outbox& out) {
    absorb_state_shares(inbox, neighbor_estimates_);
    std::array<double, 3> next{};
    for (std::size_t c = 0; c < dims_; ++c) {
        double s = row_.rhs[c];
        for (const auto& [col, val] : row_.coefficients) {
            if (col == row_.owner) continue;
            s -= val * cached_component(neighbor_estimates_, col, c);
        }
        next[c] = s / diag_;
    }
    estimate_ = next;
    check_divergence(estimate_, dims_);
    out.broadcast(sim::StateShare{estimate_, static_cast<int>(dims_)});
}

RichardsonAgent::RichardsonAgent(RowSlice row, std::size_t dims, double omega)
    : row_(std::move(row)), dims_(dims), omega_(omega) {
    if (!(omega_ > 0.0)) throw std::invalid_argument("richardson agent: omega must be > 0");
}

void RichardsonAgent::on_round(int /*round*/, std::span<const sim::Message> inbox,
                               sim::Outbox& out) {
    absorb_state_shares(inbox, neighbor_estimates_);
    std::array<double, 3> next{};
    for (std::size_t c = 0; c < dims_; ++c) {
        double s = row_.rhs[c];
        for (const auto& [col, val] : row_.coefficients) {
            s -= val * (col == row_.owner ? estimate_[c]
                                          : cached_component(neighbor_estimates_, col, c));
        }
        next[c] = estimate_[c] + omega_ * s;
    }
    estimate_ = next;
    check_divergence(estimate_, dims_);
    out.broadcast(sim::StateShare{estimate_, static_cast<int>(dims_)});
}

GaussSeidelAgent::GaussSeidelAgent(RowSlice row, std::size_t dims)
    : row_(std::move(row)), dims_(dims) {
    diag_ = row_.diagonal();
    if (diag_ == 0.0) {
        throw ZeroDiagonal("gauss-seidel agent " + std::to_string(row_.owner) +
                           ": zero diagonal");
    }
}

void GaussSeidelAgent::on_round(int /*round*/, std::span<const sim::Message> inbox,
                                sim::Outbox& out) {
    absorb_state_shares(inbox, neighbor_estimates_);
    std::array<double, 3> next{};
    for (std::size_t c = 0; c < dims_; ++c) {
        double s = row_.rhs[c];
        for (const auto& [col, val] : row_.coefficients) {
            if (col == row_.owner) continue;
            s -= val * cached_component(neighbor_estimates_, col, c);
        }
        next[c] = s / diag_;
    }
    estimate_ = next;
    out.broadcast(sim::StateShare{estimate_, static_cast<int>(dims_)});
}

}  // namespace dcg::solve
