#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dcg/errors.hpp"

namespace dcg {

// A length-n vector with a known subset of entries, the unit of the vector
// synchronization gossip. Entries are kept sorted by index so that merges are
// linear and full-vector sums are evaluated in one fixed index order at every
// agent (global scalars then agree bitwise across the network).
class PartialVector {
  public:
    PartialVector() = default;
    explicit PartialVector(std::size_t length) : length_(length) {}

    static PartialVector single(std::size_t length, int index, double value) {
        PartialVector pv(length);
        pv.set(index, value);
        return pv;
    }

    std::size_t length() const { return length_; }
    std::size_t known_count() const { return known_.size(); }
    bool complete() const { return known_.size() == length_; }

    const std::vector<std::pair<int, double>>& known() const { return known_; }

    void set(int index, double value) {
        if (index < 0 || static_cast<std::size_t>(index) >= length_) {
            throw std::invalid_argument("PartialVector: index out of range");
        }
        if (!std::isfinite(value)) {
            throw std::invalid_argument("PartialVector: non-finite value");
        }
        auto it = lower_bound(index);
        if (it != known_.end() && it->first == index) {
            it->second = value;
        } else {
            known_.insert(it, {index, value});
        }
    }

    bool has(int index) const {
        auto it = lower_bound(index);
        return it != known_.end() && it->first == index;
    }

    double at(int index) const {
        auto it = lower_bound(index);
        if (it == known_.end() || it->first != index) {
            throw Incomplete("PartialVector: index " + std::to_string(index) + " unknown");
        }
        return it->second;
    }

    // Union of known entries. Overlapping indices must agree within 1e-9;
    // this vector's value is kept.
    void merge_in_place(const PartialVector& other) {
        if (other.length_ != length_) {
            throw std::invalid_argument("PartialVector: merge length mismatch");
        }
        std::vector<std::pair<int, double>> merged;
        merged.reserve(std::min(length_, known_.size() + other.known_.size()));
        auto a = known_.begin();
        auto b = other.known_.begin();
        while (a != known_.end() || b != other.known_.end()) {
            if (b == other.known_.end() || (a != known_.end() && a->first < b->first)) {
                merged.push_back(*a++);
            } else if (a == known_.end() || b->first < a->first) {
                merged.push_back(*b++);
            } else {
                if (std::abs(a->second - b->second) > 1e-9) {
                    throw InconsistentShare("PartialVector: conflicting values at index " +
                                            std::to_string(a->first));
                }
                merged.push_back(*a);
                ++a;
                ++b;
            }
        }
        known_ = std::move(merged);
    }

    // Sum of squares over known entries, ascending index order.
    double sum_sq() const {
        double s = 0.0;
        for (const auto& [idx, v] : known_) s += v * v;
        return s;
    }

    std::vector<double> to_dense() const {
        if (!complete()) throw Incomplete("PartialVector: not complete");
        std::vector<double> dense(length_);
        for (const auto& [idx, v] : known_) dense[static_cast<std::size_t>(idx)] = v;
        return dense;
    }

    bool operator==(const PartialVector& other) const = default;

  private:
    std::vector<std::pair<int, double>>::const_iterator lower_bound(int index) const {
        return std::lower_bound(known_.begin(), known_.end(), index,
                                [](const auto& entry, int key) { return entry.first < key; });
    }
    std::vector<std::pair<int, double>>::iterator lower_bound(int index) {
        return std::lower_bound(known_.begin(), known_.end(), index,
                                [](const auto& entry, int key) { return entry.first < key; });
    }

    std::size_t length_ = 0;
    std::vector<std::pair<int, double>> known_;
};

inline PartialVector merge(const PartialVector& a, const PartialVector& b) {
    PartialVector out = a;
    out.merge_in_place(b);
    return out;
}

// Dot product of two complete vectors of equal length, ascending index order.
inline double dot_complete(const PartialVector& a, const PartialVector& b) {
    if (a.length() != b.length()) {
        throw std::invalid_argument("dot_complete: length mismatch");
    }
    if (!a.complete() || !b.complete()) throw Incomplete("dot_complete: vectors not complete");
    double s = 0.0;
    const auto& ka = a.known();
    const auto& kb = b.known();
    for (std::size_t i = 0; i < ka.size(); ++i) s += ka[i].second * kb[i].second;
    return s;
}

}  // namespace dcg
