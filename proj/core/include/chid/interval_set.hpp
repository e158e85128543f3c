#pragma once

#include <vector>

namespace chid {

/// Closed interval [lo, hi]; lo == hi is a single point.
struct Interval {
  double lo;
  double hi;

  double length() const { return hi - lo; }
  bool contains(double s) const { return lo <= s && s <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Finite union of closed intervals, kept sorted and disjoint.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> items);

  /// Inserts, merging with overlapping or touching members.
  void add(Interval iv);
  void add(const IntervalSet& other);

  const std::vector<Interval>& intervals() const { return items_; }
  bool empty() const { return items_.empty(); }
  double measure() const;
  bool contains(double s) const;
  /// Every member lies inside some member of `other`, up to `tol`.
  bool is_subset_of(const IntervalSet& other, double tol = 0.0) const;
  /// Smallest and largest element; undefined for an empty set.
  double lo() const { return items_.front().lo; }
  double hi() const { return items_.back().hi; }

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> items_;
};

}  // namespace chid
