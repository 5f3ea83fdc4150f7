#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sqsolve/sq_matrix.hpp"

namespace sqsolve {

// =============================================================================
/// Sparse dual vector y in R^n, stored as an index -> value map.
///
/// Entries are kept in first-touch order, which makes every traversal (and
/// so every floating-point sum over the support) deterministic. Entries that
/// cancel to exactly 0.0 stay stored: `stored()` counts map entries and only
/// grows, `nnz()` counts entries whose value is nonzero.
///
class SparseIterate {
public:
    explicit SparseIterate(Index dimension);

    Index dimension() const noexcept { return static_cast<Index>(slot_.size()); }

    std::size_t stored() const noexcept { return indices_.size(); }
    std::size_t nnz() const noexcept;
    bool empty() const noexcept { return indices_.empty(); }

    /// y_r, or 0 if r is not stored. Throws std::out_of_range.
    double value(Index r) const;
    bool contains(Index r) const;

    /// y_r += delta, inserting r if needed.
    void add(Index r, double delta);
    /// y_r = v, inserting r if needed.
    void set(Index r, double v);

    std::span<const Index> indices() const noexcept { return indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::size_t iteration_count() const noexcept { return iterations_; }
    void mark_iteration() noexcept { ++iterations_; }

    /// Bumped on every mutation of the stored values.
    std::uint64_t version() const noexcept { return version_; }

    DenseVector to_dense() const;

    friend bool operator==(const SparseIterate& a, const SparseIterate& b);

private:
    std::size_t slot_for(Index r);

    std::vector<Index> indices_;
    std::vector<double> values_;
    std::vector<std::int64_t> slot_;
    std::size_t iterations_ = 0;
    std::uint64_t version_ = 0;
};

} // namespace sqsolve
