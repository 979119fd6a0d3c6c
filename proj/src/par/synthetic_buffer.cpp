#include "parlab/par/synthetic_buffer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "parlab/errors.hpp"

namespace parlab {

SyntheticBuffer::SyntheticBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
    : capacity_(capacity), states_(capacity, state_dim), actions_(capacity, action_dim) {
  if (capacity == 0) throw std::invalid_argument("SyntheticBuffer: capacity must be positive");
}

void SyntheticBuffer::push(const Matrix& states, const Matrix& actions) {
  if (states.rows() != actions.rows() || states.cols() != states_.cols() ||
      actions.cols() != actions_.cols()) {
    throw DimensionError("SyntheticBuffer::push: states " + states.shape_string() + ", actions " +
                         actions.shape_string());
  }
  for (std::size_t r = 0; r < states.rows(); ++r) {
    std::copy(states.row(r).begin(), states.row(r).end(), states_.row(head_).begin());
    std::copy(actions.row(r).begin(), actions.row(r).end(), actions_.row(head_).begin());
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }
}

std::span<const double> SyntheticBuffer::state(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("SyntheticBuffer::state");
  return states_.row(slot(i));
}

std::span<const double> SyntheticBuffer::action(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("SyntheticBuffer::action");
  return actions_.row(slot(i));
}

std::vector<std::size_t> SyntheticBuffer::sample_positions(std::size_t n, Rng& rng) const {
  if (n > size_) throw std::invalid_argument("SyntheticBuffer: sample larger than buffer");
  std::vector<std::size_t> pos(size_);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(size_ - i);
    std::swap(pos[i], pos[j]);
  }
  pos.resize(n);
  return pos;
}

}  // namespace parlab
