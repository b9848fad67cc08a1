#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "jetfield/core.hpp"

namespace jetfield {

// Index slot taxonomy. Temporal slots range over p, spatial over n, and
// vertical-pair slots over the joint (i, alpha) range of size n*p. A
// vertical pair mirrors the paired jet indices: an *upper* pair carries
// (i upper, alpha lower) like the vertical frame label of x^i_alpha, while a
// *lower* pair carries (i lower, alpha upper). Contraction of an upper pair
// with a lower pair therefore sums both sub-indices at once.
enum class SlotKind : std::uint8_t { Temporal, Spatial, VerticalPair };
enum class Variance : std::uint8_t { Upper, Lower };

struct IndexSlot {
    SlotKind kind;
    Variance variance;

    bool operator==(const IndexSlot&) const = default;
};

inline int slot_extent(const Dims& d, SlotKind k) {
    switch (k) {
        case SlotKind::Temporal: return d.p;
        case SlotKind::Spatial: return d.n;
        case SlotKind::VerticalPair: return d.n * d.p;
    }
    return 0;
}

// Flattened vertical-pair index for (i, alpha).
inline int vpair_index(const Dims& d, int i, int a) { return i * d.p + a; }

// Dense numeric tensor with typed slots, stored row-major in slot order.
// Value semantics; operations allocate fresh results.
class DTensor {
  public:
    DTensor() = default;
    DTensor(const Dims& dims, std::vector<IndexSlot> slots);

    static DTensor scalar(const Dims& dims, double v);

    const Dims& dims() const { return dims_; }
    const std::vector<IndexSlot>& slots() const { return slots_; }
    int rank() const { return static_cast<int>(slots_.size()); }
    int extent(int slot) const { return slot_extent(dims_, slots_[static_cast<size_t>(slot)].kind); }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double& at(std::span<const int> idx);
    double at(std::span<const int> idx) const;
    double& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
    double at(std::initializer_list<int> idx) const {
        return at(std::span<const int>(idx.begin(), idx.size()));
    }

    // Largest absolute entry (0 for rank-0 empty data is impossible: scalars
    // hold one entry).
    double max_abs() const;

    bool same_shape(const DTensor& other) const {
        return dims_ == other.dims_ && slots_ == other.slots_;
    }

  private:
    size_t offset(std::span<const int> idx) const;

    Dims dims_;
    std::vector<IndexSlot> slots_;
    std::vector<double> data_;
};

// --- arithmetic -------------------------------------------------------------

DTensor add(const DTensor& a, const DTensor& b);
DTensor sub(const DTensor& a, const DTensor& b);
DTensor scale(const DTensor& a, double s);

// --- einstein machinery -------------------------------------------------------

// Contract slot `slot_a` of `a` against slot `slot_b` of `b`. The slots must
// share the same kind and have opposite variance. Remaining slots are ordered
// a-then-b. Rank-0 results hold a single scalar entry.
DTensor contract(const DTensor& a, int slot_a, const DTensor& b, int slot_b);

// Trace two slots of one tensor against each other (same kind, opposite
// variance). Remaining slots keep their relative order.
DTensor trace(const DTensor& a, int s1, int s2);

// (1/2)(T[... i ... j ...] - T[... j ... i ...]) over two slots of equal kind
// and variance. Idempotent.
DTensor antisymmetrize_pair(const DTensor& a, int s1, int s2);

// T[s1 s2 s3] + T[s2 s3 s1] + T[s3 s1 s2] over three slots of equal kind and
// variance (cyclic relabeling of the designated slots).
DTensor cyclic_sum(const DTensor& a, int s1, int s2, int s3);

// Largest absolute entry of (a - b); shapes must match.
double max_abs_diff(const DTensor& a, const DTensor& b);

}  // namespace jetfield
