#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <utility>
#include <vector>

#include "illbes/errors.hpp"

namespace illbes {

// Finite multiset over an ordered element type. Counts are kept as a sorted
// (element, count) vector with no zero entries, so equal multisets compare
// equal and iteration order is canonical.
template <typename T>
class Multiset {
 public:
  using Entry = std::pair<T, std::size_t>;

  Multiset() = default;
  Multiset(std::initializer_list<T> items) {
    for (const T& t : items) insert(t);
  }
  static Multiset singleton(T t) {
    Multiset m;
    m.insert(std::move(t));
    return m;
  }

  void insert(const T& t, std::size_t n = 1) {
    if (n == 0) return;
    auto it = lower_bound(t);
    if (it != entries_.end() && it->first == t)
      it->second += n;
    else
      entries_.insert(it, {t, n});
  }

  // Removes one occurrence; returns false if absent.
  bool erase_one(const T& t) {
    auto it = lower_bound(t);
    if (it == entries_.end() || !(it->first == t)) return false;
    if (--it->second == 0) entries_.erase(it);
    return true;
  }

  std::size_t count(const T& t) const {
    auto it = lower_bound(t);
    return (it != entries_.end() && it->first == t) ? it->second : 0;
  }

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& [_, c] : entries_) s += c;
    return s;
  }
  bool empty() const { return entries_.empty(); }
  std::size_t distinct_size() const { return entries_.size(); }

  bool contains(const Multiset& sub) const {
    for (const auto& [t, c] : sub.entries_)
      if (count(t) < c) return false;
    return true;
  }

  Multiset united(const Multiset& other) const {
    Multiset r = *this;
    for (const auto& [t, c] : other.entries_) r.insert(t, c);
    return r;
  }

  // Multiset difference; defined only when `other` is contained in `*this`.
  Multiset difference(const Multiset& other) const {
    Multiset r = *this;
    for (const auto& [t, c] : other.entries_) {
      auto it = r.lower_bound(t);
      if (it == r.entries_.end() || !(it->first == t) || it->second < c)
        throw CheckError("multiset difference on non-contained operand");
      it->second -= c;
      if (it->second == 0) r.entries_.erase(it);
    }
    return r;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  // Canonical expansion with multiplicity, e.g. {a,a,b} -> [a,a,b].
  std::vector<T> expand() const {
    std::vector<T> out;
    out.reserve(size());
    for (const auto& [t, c] : entries_)
      for (std::size_t i = 0; i < c; ++i) out.push_back(t);
    return out;
  }

  friend bool operator==(const Multiset& a, const Multiset& b) { return a.entries_ == b.entries_; }
  friend auto operator<=>(const Multiset& a, const Multiset& b) { return a.entries_ <=> b.entries_; }

 private:
  typename std::vector<Entry>::iterator lower_bound(const T& t) {
    return std::lower_bound(entries_.begin(), entries_.end(), t,
                            [](const Entry& e, const T& v) { return e.first < v; });
  }
  typename std::vector<Entry>::const_iterator lower_bound(const T& t) const {
    return std::lower_bound(entries_.begin(), entries_.end(), t,
                            [](const Entry& e, const T& v) { return e.first < v; });
  }
  std::vector<Entry> entries_;
};

template <typename T>
Multiset<T> mset_union(const Multiset<T>& a, const Multiset<T>& b) {
  return a.united(b);
}

namespace detail {

template <typename T, typename F>
bool distribute_entry(const Multiset<T>& m, std::size_t entry_idx, std::size_t k,
                      std::vector<Multiset<T>>& parts, F&& emit) {
  if (entry_idx == m.entries().size()) return emit(parts);
  const auto& [elem, total] = m.entries()[entry_idx];
  // Lexicographically ascending distributions (c_1, ..., c_k) with sum = total.
  std::vector<std::size_t> cs(k, 0);
  auto rec = [&](auto&& self, std::size_t slot, std::size_t remaining) -> bool {
    if (slot + 1 == k) {
      cs[slot] = remaining;
      for (std::size_t i = 0; i < k; ++i)
        if (cs[i]) parts[i].insert(elem, cs[i]);
      bool go_on = distribute_entry(m, entry_idx + 1, k, parts, emit);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < cs[i]; ++j) parts[i].erase_one(elem);
      return go_on;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      cs[slot] = c;
      if (!self(self, slot + 1, remaining - c)) return false;
    }
    return true;
  };
  return rec(rec, 0, total);
}

}  // namespace detail

// Calls `emit` with every ordered k-tuple (M_1, ..., M_k) whose union is `m`,
// each exactly once, in a deterministic order. `emit` returns false to stop
// early. Returns false iff stopped early.
template <typename T, typename F>
bool for_each_partition(const Multiset<T>& m, std::size_t k, F&& emit) {
  std::vector<Multiset<T>> parts(k);
  return detail::distribute_entry(m, 0, k, parts, emit);
}

template <typename T>
std::vector<std::vector<Multiset<T>>> all_partitions(const Multiset<T>& m, std::size_t k) {
  std::vector<std::vector<Multiset<T>>> out;
  for_each_partition(m, k, [&](const std::vector<Multiset<T>>& parts) {
    out.push_back(parts);
    return true;
  });
  return out;
}

// Calls `emit(sub, rest)` for every sub-multiset of `m` (ascending in the
// partition order above). `emit` returns false to stop early.
template <typename T, typename F>
bool for_each_submultiset(const Multiset<T>& m, F&& emit) {
  return for_each_partition(m, 2, [&](const std::vector<Multiset<T>>& parts) {
    return emit(parts[0], parts[1]);
  });
}

// All multisets over `alphabet` of total size <= bound, in ascending size
// order and canonical order within a size.
template <typename T>
std::vector<Multiset<T>> multisets_up_to(const std::vector<T>& alphabet, std::size_t bound) {
  std::vector<Multiset<T>> out;
  std::vector<std::size_t> counts(alphabet.size(), 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t budget, Multiset<T>& acc) -> void {
    if (i == alphabet.size()) {
      out.push_back(acc);
      return;
    }
    for (std::size_t c = 0; c <= budget; ++c) {
      if (c) acc.insert(alphabet[i], 1);
      self(self, i + 1, budget - c, acc);
    }
    for (std::size_t c = acc.count(alphabet[i]); c > 0; --c) acc.erase_one(alphabet[i]);
  };
  Multiset<T> acc;
  rec(rec, 0, bound, acc);
  std::stable_sort(out.begin(), out.end(), [](const Multiset<T>& a, const Multiset<T>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

}  // namespace illbes
