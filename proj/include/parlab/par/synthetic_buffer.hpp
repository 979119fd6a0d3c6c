#pragma once

#include <vector>

#include "parlab/numerics/matrix.hpp"
#include "parlab/numerics/rng.hpp"

namespace parlab {

/// Fixed-capacity FIFO of (state, action) pairs; the oldest entry is evicted first.
class SyntheticBuffer {
 public:
  SyntheticBuffer() = default;
  SyntheticBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  /// Appends every row of (states, actions) in order.
  void push(const Matrix& states, const Matrix& actions);

  /// i-th entry in insertion order (0 = oldest retained).
  std::span<const double> state(std::size_t i) const;
  std::span<const double> action(std::size_t i) const;

  /// n distinct logical positions drawn uniformly (partial Fisher-Yates).
  std::vector<std::size_t> sample_positions(std::size_t n, Rng& rng) const;

  void clear() { size_ = head_ = 0; }

 private:
  std::size_t slot(std::size_t i) const { return (head_ + capacity_ - size_ + i) % capacity_; }

  std::size_t capacity_ = 0;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  Matrix states_;
  Matrix actions_;
};

}  // namespace parlab
