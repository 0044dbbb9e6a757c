#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcg/errors.hpp"

namespace dcg::net {

// Undirected communication graph over n agents, optionally embedded in the
// unit hypercube. When positions are present the edge set must be exactly the
// reception-range (unit-disk) rule.
class Network {
  public:
    Network(int n, int dim, std::vector<std::vector<int>> adjacency,
            std::optional<std::vector<double>> positions, double reception_range);

    int n() const { return n_; }
    int dim() const { return dim_; }
    double reception_range() const { return reception_range_; }

    const std::vector<int>& neighbors(int agent) const { return adjacency_[agent]; }
    const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
    bool has_edge(int i, int j) const;

    bool has_positions() const { return positions_.has_value(); }
    std::span<const double> position(int agent) const;

    std::size_t edge_count() const;

    // FNV-1a over the adjacency lists; used by determinism checks.
    std::uint64_t adjacency_hash() const;

    std::string to_json() const;
    static Network from_json(const std::string& text);

  private:
    int n_;
    int dim_;
    double reception_range_;
    std::vector<std::vector<int>> adjacency_;       // sorted neighbor ids per agent
    std::optional<std::vector<double>> positions_;  // flat, n * dim
};

struct HopDiameter {
    int h = 0;
};

// n points uniform i.i.d. in [0,1]^dim from a seeded generator; edges by the
// range rule. Identical arguments give an identical network.
Network generate_geometric_network(int n, int dim, double reception_range, std::uint64_t seed);

bool is_connected(const Network& net);

// Exact eccentricity maximum via BFS from every node. Throws Disconnected.
HopDiameter hop_diameter(const Network& net);

}  // namespace dcg::net
