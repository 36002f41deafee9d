#include "nmc/state_space.hpp"

#include <unordered_set>

namespace nmc {

StateSpace::StateSpace(int size, std::vector<std::string> labels)
    : size_(size), labels_(std::move(labels)) {
  if (size_ < 2) {
    throw Error("StateSpace: size must be >= 2, got " + std::to_string(size_));
  }
  if (!labels_.empty()) {
    if (static_cast<int>(labels_.size()) != size_) {
      throw DimensionMismatch("StateSpace: " + std::to_string(labels_.size()) +
                              " labels for " + std::to_string(size_) + " states");
    }
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    if (static_cast<int>(seen.size()) != size_) {
      throw Error("StateSpace: labels must be distinct");
    }
  }
}

std::string StateSpace::label(int x) const {
  if (x < 0 || x >= size_) {
    throw Error("StateSpace: state " + std::to_string(x) + " out of range");
  }
  if (labels_.empty()) return std::to_string(x);
  return labels_[static_cast<std::size_t>(x)];
}

}  // namespace nmc
