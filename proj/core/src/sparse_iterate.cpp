#include "sqsolve/sparse_iterate.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sqsolve {

SparseIterate::SparseIterate(Index dimension)
    : slot_(dimension, -1)
{}

std::size_t SparseIterate::nnz() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double SparseIterate::value(Index r) const
{
    if (r >= dimension()) throw std::out_of_range("index " + std::to_string(r) + " out of range");
    const auto s = slot_[r];
    return s < 0 ? 0.0 : values_[static_cast<std::size_t>(s)];
}

bool SparseIterate::contains(Index r) const
{
    return r < dimension() && slot_[r] >= 0;
}

std::size_t SparseIterate::slot_for(Index r)
{
    if (r >= dimension()) throw std::out_of_range("index " + std::to_string(r) + " out of range");
    if (slot_[r] < 0) {
        slot_[r] = static_cast<std::int64_t>(indices_.size());
        indices_.push_back(r);
        values_.push_back(0.0);
    }
    return static_cast<std::size_t>(slot_[r]);
}

void SparseIterate::add(Index r, double delta)
{
    values_[slot_for(r)] += delta;
    ++version_;
}

void SparseIterate::set(Index r, double v)
{
    values_[slot_for(r)] = v;
    ++version_;
}

DenseVector SparseIterate::to_dense() const
{
    DenseVector out = DenseVector::Zero(static_cast<Eigen::Index>(dimension()));
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        out(static_cast<Eigen::Index>(indices_[k])) = values_[k];
    }
    return out;
}

bool operator==(const SparseIterate& a, const SparseIterate& b)
{
    return a.indices_ == b.indices_ && a.values_ == b.values_ &&
           a.iterations_ == b.iterations_ && a.slot_.size() == b.slot_.size();
}

} // namespace sqsolve
