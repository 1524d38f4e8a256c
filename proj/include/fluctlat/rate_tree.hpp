#pragma once

#include <cstddef>
#include <vector>

namespace fluctlat {

/// Complete binary tree of partial rate sums.
///
/// Every internal node is recomputed from its children on update, so the
/// root never accumulates round-off from repeated add/subtract cycles.
class RateTree {
public:
  RateTree() = default;
  explicit RateTree(std::size_t channels);

  std::size_t size() const noexcept { return channels_; }
  double total() const noexcept { return nodes_.empty() ? 0.0 : nodes_[1]; }
  double rate(std::size_t channel) const { return nodes_[leaves_ + channel]; }

  void set(std::size_t channel, double rate);
  /// Channel whose cumulative interval contains target, 0 <= target < total().
  std::size_t find(double target) const;

private:
  std::size_t channels_ = 0;
  std::size_t leaves_ = 0;
  std::vector<double> nodes_;
};

}  // namespace fluctlat
