#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace cotloop {

/// Fixed-capacity FIFO over the most recent composite-signal values.
/// Storage is a ring; linearize() copies the contents oldest-first.
class SignalWindow {
 public:
  explicit SignalWindow(std::size_t capacity) : buf_(capacity) { assert(capacity > 0); }

  void push(double z) {
    buf_[head_] = z;
    head_ = (head_ + 1) % buf_.size();
    if (size_ < buf_.size()) ++size_;
  }

  void clear() noexcept {
    head_ = 0;
    size_ = 0;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return buf_.size(); }
  bool full() const noexcept { return size_ == buf_.size(); }
  bool empty() const noexcept { return size_ == 0; }

  /// i = 0 is the oldest retained sample.
  double operator[](std::size_t i) const {
    assert(i < size_);
    const std::size_t start = (head_ + buf_.size() - size_) % buf_.size();
    return buf_[(start + i) % buf_.size()];
  }

  /// Writes the contents oldest-first into `out`, which must hold size() values.
  void linearize(std::span<double> out) const {
    assert(out.size() >= size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = (*this)[i];
  }

  std::vector<double> to_vector() const {
    std::vector<double> out(size_);
    linearize(out);
    return out;
  }

 private:
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace cotloop
