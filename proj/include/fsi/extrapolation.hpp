#pragma once

// Interface extrapolation of order r in {0, 1, 2} over a short ring of past
// states, with degradation to the deepest available order at startup.

#include <deque>
#include <stdexcept>
#include <utility>

#include "fsi/fem.hpp"

namespace fsi {

class HistoryBuffer {
 public:
  void push(double t, Vector value) {
    if (!entries_.empty() && t <= entries_.back().first) {
      throw std::invalid_argument("HistoryBuffer: times must strictly increase");
    }
    entries_.emplace_back(t, std::move(value));
    if (entries_.size() > 3) entries_.pop_front();
  }

  int depth() const { return static_cast<int>(entries_.size()); }

  // back(0) is the newest entry.
  const Vector& back(int k = 0) const {
    return entries_[entries_.size() - 1 - static_cast<std::size_t>(k)].second;
  }
  double time_back(int k = 0) const {
    return entries_[entries_.size() - 1 - static_cast<std::size_t>(k)].first;
  }

 private:
  std::deque<std::pair<double, Vector>> entries_;
};

// x^{n,*}: 0 for r = 0, x^{n-1} for r = 1, 2x^{n-1} - x^{n-2} for r = 2.
inline Vector extrapolate(const HistoryBuffer& hist, int r) {
  if (r < 0 || r > 2) throw std::invalid_argument("extrapolate: order must be 0, 1 or 2");
  if (hist.depth() == 0) throw std::invalid_argument("extrapolate: empty history");
  const int r_eff = std::min(r, hist.depth() == 1 ? 1 : 2);
  if (r_eff == 0 || r == 0) return Vector::Zero(hist.back().size());
  if (r_eff == 1 || r == 1) return hist.back();
  return 2.0 * hist.back() - hist.back(1);
}

// Backward divided difference of the extrapolated sequence,
// (x^{n,*} - x^{n-1,*}) / tau, degraded to zero when history is short.
inline Vector extrapolate_rate(const HistoryBuffer& hist, int r, double tau) {
  if (r < 0 || r > 2) throw std::invalid_argument("extrapolate_rate: order must be 0, 1 or 2");
  if (hist.depth() == 0) throw std::invalid_argument("extrapolate_rate: empty history");
  if (tau <= 0.0) throw std::invalid_argument("extrapolate_rate: tau must be positive");
  if (r == 0 || hist.depth() < 2) return Vector::Zero(hist.back().size());
  if (r == 1 || hist.depth() < 3) return (hist.back() - hist.back(1)) / tau;
  return (2.0 * hist.back() - 3.0 * hist.back(1) + hist.back(2)) / tau;
}

}  // namespace fsi
