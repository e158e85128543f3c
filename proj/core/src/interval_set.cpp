#include "chid/interval_set.hpp"

#include <algorithm>

#include "chid/error.hpp"

namespace chid {

IntervalSet::IntervalSet(std::initializer_list<Interval> items) {
  for (const auto& iv : items) add(iv);
}

void IntervalSet::add(Interval iv) {
  if (iv.hi < iv.lo) throw ValidationError("interval with hi < lo");
  auto it = std::lower_bound(
      items_.begin(), items_.end(), iv,
      [](const Interval& a, const Interval& b) { return a.hi < b.lo; });
  // it: first member with hi >= iv.lo
  auto last = it;
  while (last != items_.end() && last->lo <= iv.hi) {
    iv.lo = std::min(iv.lo, last->lo);
    iv.hi = std::max(iv.hi, last->hi);
    ++last;
  }
  it = items_.erase(it, last);
  items_.insert(it, iv);
}

void IntervalSet::add(const IntervalSet& other) {
  for (const auto& iv : other.items_) add(iv);
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const auto& iv : items_) m += iv.length();
  return m;
}

bool IntervalSet::contains(double s) const {
  return std::any_of(items_.begin(), items_.end(),
                     [s](const Interval& iv) { return iv.contains(s); });
}

bool IntervalSet::is_subset_of(const IntervalSet& other, double tol) const {
  return std::all_of(items_.begin(), items_.end(), [&](const Interval& iv) {
    return std::any_of(other.items_.begin(), other.items_.end(),
                       [&](const Interval& o) {
                         return o.lo - tol <= iv.lo && iv.hi <= o.hi + tol;
                       });
  });
}

}  // namespace chid
