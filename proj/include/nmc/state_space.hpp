#pragma once

#include <string>
#include <vector>

#include "nmc/errors.hpp"

namespace nmc {

/// Finite state space with dense integer states 0..size-1. Labels are cosmetic.
class StateSpace {
 public:
  explicit StateSpace(int size, std::vector<std::string> labels = {});

  int size() const { return size_; }
  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Label of state x, or its decimal index when no labels were given.
  std::string label(int x) const;

  friend bool operator==(const StateSpace& a, const StateSpace& b) {
    return a.size_ == b.size_ && a.labels_ == b.labels_;
  }

 private:
  int size_;
  std::vector<std::string> labels_;
};

}  // namespace nmc
