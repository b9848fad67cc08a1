#include "jetfield/dtensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace jetfield {

namespace {

size_t total_size(const Dims& d, const std::vector<IndexSlot>& slots) {
    size_t total = 1;
    for (const auto& s : slots) total *= static_cast<size_t>(slot_extent(d, s.kind));
    return total;
}

[[noreturn]] void slot_error(const std::string& msg) { throw JetfieldError("tensor: " + msg); }

void check_slot(const DTensor& t, int s, const char* who) {
    if (s < 0 || s >= t.rank())
        slot_error(std::string(who) + ": slot index " + std::to_string(s) +
                   " out of range for rank " + std::to_string(t.rank()));
}

// Iterates all multi-indices of a tensor shape.
class IndexIter {
  public:
    // Rank-0 tensors yield exactly one (empty) multi-index.
    explicit IndexIter(const DTensor& t) : idx_(static_cast<size_t>(t.rank()), 0) {
        for (int s = 0; s < t.rank(); ++s) extents_.push_back(t.extent(s));
    }

    bool done() const { return done_; }
    std::span<const int> index() const { return idx_; }

    void next() {
        for (int s = static_cast<int>(idx_.size()) - 1; s >= 0; --s) {
            if (++idx_[static_cast<size_t>(s)] < extents_[static_cast<size_t>(s)]) return;
            idx_[static_cast<size_t>(s)] = 0;
        }
        done_ = true;
    }

  private:
    std::vector<int> idx_;
    std::vector<int> extents_;
    bool done_ = false;
};

}  // namespace

DTensor::DTensor(const Dims& dims, std::vector<IndexSlot> slots)
    : dims_(dims), slots_(std::move(slots)), data_(total_size(dims, slots_), 0.0) {
    validate_dims(dims_);
}

DTensor DTensor::scalar(const Dims& dims, double v) {
    DTensor t(dims, {});
    t.data_[0] = v;
    return t;
}

size_t DTensor::offset(std::span<const int> idx) const {
    if (idx.size() != slots_.size())
        slot_error("index rank " + std::to_string(idx.size()) + " does not match tensor rank " +
                   std::to_string(slots_.size()));
    size_t off = 0;
    for (size_t s = 0; s < slots_.size(); ++s) {
        const int ext = slot_extent(dims_, slots_[s].kind);
        const int k = idx[s];
        if (k < 0 || k >= ext)
            slot_error("index " + std::to_string(k) + " out of range [0," + std::to_string(ext) +
                       ") in slot " + std::to_string(s));
        off = off * static_cast<size_t>(ext) + static_cast<size_t>(k);
    }
    return off;
}

double& DTensor::at(std::span<const int> idx) { return data_[offset(idx)]; }
double DTensor::at(std::span<const int> idx) const { return data_[offset(idx)]; }

double DTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

DTensor add(const DTensor& a, const DTensor& b) {
    if (!a.same_shape(b)) slot_error("add: shape mismatch");
    DTensor out = a;
    for (size_t k = 0; k < out.data().size(); ++k) out.data()[k] += b.data()[k];
    return out;
}

DTensor sub(const DTensor& a, const DTensor& b) {
    if (!a.same_shape(b)) slot_error("sub: shape mismatch");
    DTensor out = a;
    for (size_t k = 0; k < out.data().size(); ++k) out.data()[k] -= b.data()[k];
    return out;
}

DTensor scale(const DTensor& a, double s) {
    DTensor out = a;
    for (double& v : out.data()) v *= s;
    return out;
}

namespace {
void check_contractible(const DTensor& a, int sa, const DTensor& b, int sb) {
    check_slot(a, sa, "contract");
    check_slot(b, sb, "contract");
    const IndexSlot& A = a.slots()[static_cast<size_t>(sa)];
    const IndexSlot& B = b.slots()[static_cast<size_t>(sb)];
    if (A.kind != B.kind) slot_error("contract: slot kinds differ");
    if (A.variance == B.variance) slot_error("contract: slots must have opposite variance");
    if (!(a.dims() == b.dims())) slot_error("contract: dimension mismatch");
}
}  // namespace

DTensor contract(const DTensor& a, int slot_a, const DTensor& b, int slot_b) {
    check_contractible(a, slot_a, b, slot_b);
    std::vector<IndexSlot> out_slots;
    for (int s = 0; s < a.rank(); ++s)
        if (s != slot_a) out_slots.push_back(a.slots()[static_cast<size_t>(s)]);
    for (int s = 0; s < b.rank(); ++s)
        if (s != slot_b) out_slots.push_back(b.slots()[static_cast<size_t>(s)]);
    DTensor out(a.dims(), std::move(out_slots));

    const int sum_ext = a.extent(slot_a);
    std::vector<int> ia(static_cast<size_t>(a.rank()));
    std::vector<int> ib(static_cast<size_t>(b.rank()));
    for (IndexIter it(out); !it.done(); it.next()) {
        const auto idx = it.index();
        size_t pos = 0;
        for (int s = 0; s < a.rank(); ++s)
            if (s != slot_a) ia[static_cast<size_t>(s)] = idx[pos++];
        for (int s = 0; s < b.rank(); ++s)
            if (s != slot_b) ib[static_cast<size_t>(s)] = idx[pos++];
        double acc = 0.0;
        for (int k = 0; k < sum_ext; ++k) {
            ia[static_cast<size_t>(slot_a)] = k;
            ib[static_cast<size_t>(slot_b)] = k;
            acc += a.at(ia) * b.at(ib);
        }
        out.at(idx) = acc;
    }
    return out;
}

DTensor trace(const DTensor& a, int s1, int s2) {
    check_slot(a, s1, "trace");
    check_slot(a, s2, "trace");
    if (s1 == s2) slot_error("trace: slots must differ");
    const IndexSlot& A = a.slots()[static_cast<size_t>(s1)];
    const IndexSlot& B = a.slots()[static_cast<size_t>(s2)];
    if (A.kind != B.kind) slot_error("trace: slot kinds differ");
    if (A.variance == B.variance) slot_error("trace: slots must have opposite variance");

    std::vector<IndexSlot> out_slots;
    for (int s = 0; s < a.rank(); ++s)
        if (s != s1 && s != s2) out_slots.push_back(a.slots()[static_cast<size_t>(s)]);
    DTensor out(a.dims(), std::move(out_slots));

    const int sum_ext = a.extent(s1);
    std::vector<int> ia(static_cast<size_t>(a.rank()));
    for (IndexIter it(out); !it.done(); it.next()) {
        const auto idx = it.index();
        size_t pos = 0;
        for (int s = 0; s < a.rank(); ++s)
            if (s != s1 && s != s2) ia[static_cast<size_t>(s)] = idx[pos++];
        double acc = 0.0;
        for (int k = 0; k < sum_ext; ++k) {
            ia[static_cast<size_t>(s1)] = k;
            ia[static_cast<size_t>(s2)] = k;
            acc += a.at(ia);
        }
        out.at(idx) = acc;
    }
    return out;
}

namespace {
void check_same_kind(const DTensor& a, int s1, int s2, const char* who) {
    check_slot(a, s1, who);
    check_slot(a, s2, who);
    const IndexSlot& A = a.slots()[static_cast<size_t>(s1)];
    const IndexSlot& B = a.slots()[static_cast<size_t>(s2)];
    if (!(A == B)) slot_error(std::string(who) + ": slots must share kind and variance");
}
}  // namespace

DTensor antisymmetrize_pair(const DTensor& a, int s1, int s2) {
    check_same_kind(a, s1, s2, "antisymmetrize_pair");
    if (s1 == s2) slot_error("antisymmetrize_pair: slots must differ");
    DTensor out(a.dims(), a.slots());
    std::vector<int> swapped(static_cast<size_t>(a.rank()));
    for (IndexIter it(a); !it.done(); it.next()) {
        const auto idx = it.index();
        std::copy(idx.begin(), idx.end(), swapped.begin());
        std::swap(swapped[static_cast<size_t>(s1)], swapped[static_cast<size_t>(s2)]);
        out.at(idx) = 0.5 * (a.at(idx) - a.at(swapped));
    }
    return out;
}

DTensor cyclic_sum(const DTensor& a, int s1, int s2, int s3) {
    check_same_kind(a, s1, s2, "cyclic_sum");
    check_same_kind(a, s1, s3, "cyclic_sum");
    if (s1 == s2 || s1 == s3 || s2 == s3) slot_error("cyclic_sum: slots must be distinct");
    DTensor out(a.dims(), a.slots());
    std::vector<int> rot(static_cast<size_t>(a.rank()));
    for (IndexIter it(a); !it.done(); it.next()) {
        const auto idx = it.index();
        // T(i,j,k) + T(j,k,i) + T(k,i,j) at designated slots (s1,s2,s3):
        // the second term reads a at (s1<-j, s2<-k, s3<-i), etc.
        std::copy(idx.begin(), idx.end(), rot.begin());
        double acc = a.at(idx);
        rot[static_cast<size_t>(s1)] = idx[static_cast<size_t>(s2)];
        rot[static_cast<size_t>(s2)] = idx[static_cast<size_t>(s3)];
        rot[static_cast<size_t>(s3)] = idx[static_cast<size_t>(s1)];
        acc += a.at(rot);
        rot[static_cast<size_t>(s1)] = idx[static_cast<size_t>(s3)];
        rot[static_cast<size_t>(s2)] = idx[static_cast<size_t>(s1)];
        rot[static_cast<size_t>(s3)] = idx[static_cast<size_t>(s2)];
        acc += a.at(rot);
        out.at(idx) = acc;
    }
    return out;
}

double max_abs_diff(const DTensor& a, const DTensor& b) {
    if (!a.same_shape(b)) slot_error("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t k = 0; k < a.data().size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

}  // namespace jetfield
