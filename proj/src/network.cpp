#include "dcg/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "dcg/rng.hpp"

namespace dcg::net {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

Network::Network(int n, int dim, std::vector<std::vector<int>> adjacency,
                 std::optional<std::vector<double>> positions, double reception_range)
    : n_(n),
      dim_(dim),
      reception_range_(reception_range),
      adjacency_(std::move(adjacency)),
      positions_(std::move(positions)) {
    if (n_ < 0 || (dim_ != 2 && dim_ != 3)) {
        throw std::invalid_argument("Network: bad n or dim");
    }
    if (static_cast<int>(adjacency_.size()) != n_) {
        throw std::invalid_argument("Network: adjacency size != n");
    }
    for (int i = 0; i < n_; ++i) {
        auto& nbrs = adjacency_[i];
        std::sort(nbrs.begin(), nbrs.end());
        for (int j : nbrs) {
            if (j < 0 || j >= n_) throw std::invalid_argument("Network: neighbor id out of range");
            if (j == i) throw std::invalid_argument("Network: self-loop");
        }
        if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) {
            throw std::invalid_argument("Network: duplicate neighbor");
        }
    }
    for (int i = 0; i < n_; ++i) {
        for (int j : adjacency_[i]) {
            if (!std::binary_search(adjacency_[j].begin(), adjacency_[j].end(), i)) {
                throw std::invalid_argument("Network: adjacency not symmetric");
            }
        }
    }
    if (positions_) {
        if (positions_->size() != static_cast<std::size_t>(n_) * dim_) {
            throw std::invalid_argument("Network: positions size != n * dim");
        }
        // Edge set must match the reception-range rule within 1e-12.
        for (int i = 0; i < n_; ++i) {
            for (int j = i + 1; j < n_; ++j) {
                const double d = distance(position(i), position(j));
                const bool edge = has_edge(i, j);
                if (edge && d > reception_range_ + 1e-12) {
                    throw std::invalid_argument("Network: edge beyond reception range");
                }
                if (!edge && d <= reception_range_ - 1e-12) {
                    throw std::invalid_argument("Network: missing in-range edge");
                }
            }
        }
    }
}

bool Network::has_edge(int i, int j) const {
    const auto& nbrs = adjacency_[i];
    return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::span<const double> Network::position(int agent) const {
    if (!positions_) throw std::logic_error("Network: no positions");
    return {positions_->data() + static_cast<std::size_t>(agent) * dim_,
            static_cast<std::size_t>(dim_)};
}

std::size_t Network::edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& nbrs : adjacency_) deg_sum += nbrs.size();
    return deg_sum / 2;
}

std::uint64_t Network::adjacency_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(n_));
    for (const auto& nbrs : adjacency_) {
        mix(nbrs.size());
        for (int j : nbrs) mix(static_cast<std::uint64_t>(j));
    }
    return h;
}

std::string Network::to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    j["dim"] = dim_;
    j["reception_range"] = reception_range_;
    j["adjacency"] = adjacency_;
    if (positions_) {
        nlohmann::json pos = nlohmann::json::array();
        for (int i = 0; i < n_; ++i) {
            const auto p = position(i);
            pos.push_back(std::vector<double>(p.begin(), p.end()));
        }
        j["positions"] = pos;
    } else {
        j["positions"] = nullptr;
    }
    return j.dump(2) + "\n";
}

Network Network::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const int dim = j.at("dim").get<int>();
    const double range = j.at("reception_range").get<double>();
    auto adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
    std::optional<std::vector<double>> positions;
    if (!j.at("positions").is_null()) {
        std::vector<double> flat;
        for (const auto& p : j.at("positions")) {
            for (const auto& c : p) flat.push_back(c.get<double>());
        }
        positions = std::move(flat);
    }
    return Network(n, dim, std::move(adjacency), std::move(positions), range);
}

Network generate_geometric_network(int n, int dim, double reception_range, std::uint64_t seed) {
    if (n < dim + 2) throw std::invalid_argument("generate_geometric_network: n too small");
    if (!(reception_range > 0.0)) {
        throw std::invalid_argument("generate_geometric_network: range must be positive");
    }
    Rng rng(seed);
    std::vector<double> positions(static_cast<std::size_t>(n) * dim);
    for (double& c : positions) c = rng.uniform01();

    std::vector<std::vector<int>> adjacency(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = distance({positions.data() + static_cast<std::size_t>(i) * dim,
                                       static_cast<std::size_t>(dim)},
                                      {positions.data() + static_cast<std::size_t>(j) * dim,
                                       static_cast<std::size_t>(dim)});
            if (d <= reception_range) {
                adjacency[i].push_back(j);
                adjacency[j].push_back(i);
            }
        }
    }
    return Network(n, dim, std::move(adjacency), std::move(positions), reception_range);
}

namespace {

// BFS hop distances from `source`; unreachable nodes stay at -1.
std::vector<int> bfs_hops(const Network& net, int source) {
    std::vector<int> dist(net.n(), -1);
    std::queue<int> queue;
    dist[source] = 0;
    queue.push(source);
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        for (int v : net.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push(v);
            }
        }
    }
    return dist;
}

}  // namespace

bool is_connected(const Network& net) {
    if (net.n() <= 1) return true;
    const auto dist = bfs_hops(net, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

HopDiameter hop_diameter(const Network& net) {
    if (!is_connected(net)) throw Disconnected("hop_diameter: network is disconnected");
    int h = 0;
    for (int s = 0; s < net.n(); ++s) {
        const auto dist = bfs_hops(net, s);
        for (int d : dist) h = std::max(h, d);
    }
    return {h};
}

}  // namespace dcg::net
