#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

/// Subset of a point set of at most 64 points, bit i = point i.
using Mask = std::uint64_t;

inline bool contains(Mask m, int i) { return (m >> i) & 1u; }
inline Mask bit(int i) { return Mask{1} << i; }
inline bool subset(Mask a, Mask b) { return (a & ~b) == 0; }
inline int popcount(Mask m) { return std::popcount(m); }

inline std::vector<int> members(Mask m) {
  std::vector<int> out;
  while (m) {
    out.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return out;
}

/// Base of every library error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: table shape, unknown ids, inconsistent lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A structure does not satisfy the precondition of an operation. The
/// witness lists the labels of the elements that exhibit the failure.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::vector<std::string> witness = {})
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<std::string>& witness() const { return witness_; }

 private:
  std::vector<std::string> witness_;
};

/// Cooperative cancellation for long exhaustive searches.
struct CancelToken {
  const std::atomic<bool>* flag = nullptr;
  bool cancelled() const { return flag && flag->load(std::memory_order_relaxed); }
};

/// Square operation table over {0..n-1}, row-major.
class Table {
 public:
  Table() = default;
  explicit Table(int n, int fill = 0) : n_(n), cells_(static_cast<std::size_t>(n) * n, fill) {}
  Table(int n, std::vector<int> cells) : n_(n), cells_(std::move(cells)) {
    if (cells_.size() != static_cast<std::size_t>(n) * n)
      throw ShapeError("table has " + std::to_string(cells_.size()) + " cells, expected " +
                       std::to_string(n * n));
    for (int c : cells_)
      if (c < 0 || c >= n) throw ShapeError("table entry " + std::to_string(c) + " out of range");
  }

  int size() const { return n_; }
  int operator()(int x, int y) const { return cells_[static_cast<std::size_t>(x) * n_ + y]; }
  int& at(int x, int y) { return cells_[static_cast<std::size_t>(x) * n_ + y]; }
  const std::vector<int>& cells() const { return cells_; }

  friend bool operator==(const Table&, const Table&) = default;

 private:
  int n_ = 0;
  std::vector<int> cells_;
};

/// Equivalence relation as class assignment; classes are numbered by first
/// occurrence so that equal relations compare equal.
struct Partition {
  std::vector<int> class_of;
  int count = 0;

  static Partition from_labels(const std::vector<int>& raw) {
    Partition p;
    p.class_of.assign(raw.size(), -1);
    std::vector<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto it = std::find_if(seen.begin(), seen.end(), [&](auto& s) { return s.first == raw[i]; });
      if (it == seen.end()) {
        seen.emplace_back(raw[i], p.count++);
        p.class_of[i] = p.count - 1;
      } else {
        p.class_of[i] = it->second;
      }
    }
    return p;
  }

  bool same(int x, int y) const { return class_of[x] == class_of[y]; }

  std::vector<std::vector<int>> classes() const {
    std::vector<std::vector<int>> out(count);
    for (std::size_t i = 0; i < class_of.size(); ++i) out[class_of[i]].push_back(static_cast<int>(i));
    return out;
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return true;
  }
  Partition partition() {
    std::vector<int> raw(parent_.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = find(static_cast<int>(i));
    return Partition::from_labels(raw);
  }

 private:
  std::vector<int> parent_;
};

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Labels "0", "1", ... for generated carriers.
inline std::vector<std::string> index_labels(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

}  // namespace spectral
