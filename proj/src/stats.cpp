#include "gptraj/stats.hpp"

#include <algorithm>
#include <cmath>

namespace gptraj {

CircularHistogram::CircularHistogram(int n_bins, double lo, double hi)
    : lo_(lo), hi_(hi) {
  if (n_bins < 1) throw ConfigError("CircularHistogram: n_bins >= 1");
  if (!(hi > lo)) throw ConfigError("CircularHistogram: hi must exceed lo");
  width_ = (hi - lo) / n_bins;
  full_circle_ = std::abs((hi - lo) - kTwoPi) < 1e-12;
  bins_.assign(static_cast<std::size_t>(n_bins), 0);
}

int CircularHistogram::bin_index(double phase) const {
  double x = phase;
  if (full_circle_) {
    x -= kTwoPi * std::floor((x - lo_) / kTwoPi);  // into [lo, lo + 2pi)
    x = std::min(x, hi_);                          // guard FP spill
  } else if (x < lo_ || x > hi_) {
    return -1;
  }
  int i = static_cast<int>((x - lo_) / width_);
  i = std::clamp(i, 0, n_bins() - 1);
  return i;
}

void CircularHistogram::accumulate(double phase) {
  ++n_total_;
  const int i = bin_index(phase);
  if (i < 0) {
    ++n_excluded_;
    return;
  }
  ++bins_[static_cast<std::size_t>(i)];
  sum_re_ += std::cos(phase);
  sum_im_ += std::sin(phase);
}

void CircularHistogram::add_excluded() {
  ++n_total_;
  ++n_excluded_;
}

void CircularHistogram::merge(const CircularHistogram& other) {
  if (other.n_bins() != n_bins() || other.lo_ != lo_ || other.hi_ != hi_) {
    throw ConfigError("CircularHistogram::merge: binning mismatch");
  }
  for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
  n_total_ += other.n_total_;
  n_excluded_ += other.n_excluded_;
  sum_re_ += other.sum_re_;
  sum_im_ += other.sum_im_;
}

CircularHistogram CircularHistogram::merged(const CircularHistogram& a,
                                            const CircularHistogram& b) {
  CircularHistogram out = a;
  out.merge(b);
  return out;
}

double CircularHistogram::circular_mean() const {
  if (n_included() == 0) {
    throw EmptyDistribution("circular_mean: no included samples");
  }
  return std::atan2(sum_im_, sum_re_);
}

double CircularHistogram::circular_variance() const {
  const auto n = n_included();
  if (n == 0) throw EmptyDistribution("circular_variance: no included samples");
  const double r = std::hypot(sum_re_, sum_im_) / static_cast<double>(n);
  return 1.0 - r;
}

double CircularHistogram::probability(int i) const {
  const auto n = n_included();
  if (n == 0) return 0.0;
  return static_cast<double>(bins_[static_cast<std::size_t>(i)]) /
         static_cast<double>(n);
}

namespace {

inline int wrap_bin(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

std::vector<Peak> CircularHistogram::find_peaks(double min_prominence) const {
  const int n = n_bins();
  if (n_included() == 0) return {};
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = probability(i);

  auto at = [&](int i) {
    return full_circle_ ? p[static_cast<std::size_t>(wrap_bin(i, n))]
                        : p[static_cast<std::size_t>(std::clamp(i, 0, n - 1))];
  };

  std::vector<Peak> peaks;
  for (int i = 0; i < n; ++i) {
    const double v = p[static_cast<std::size_t>(i)];
    if (v <= 0.0) continue;
    // Local maximum: at least as high as the left, strictly above the right
    // (collapses plateaus to their rightmost bin; open boundaries count as
    // minus infinity).
    const double left =
        full_circle_ ? at(i - 1) : (i > 0 ? at(i - 1) : -1.0);
    const double right =
        full_circle_ ? at(i + 1) : (i + 1 < n ? at(i + 1) : -1.0);
    if (!(v >= left && v > right)) continue;

    // Walk outward to the nearest strictly higher bin on each side, tracking
    // the minimum (saddle) along the way; basin edges are the walk minima.
    auto walk = [&](int dir, double& saddle, int& edge) {
      saddle = v;
      edge = i;
      double running_min = v;
      int min_pos = i;
      for (int s = 1; s <= (full_circle_ ? n - 1 : n); ++s) {
        const int j = i + dir * s;
        if (!full_circle_ && (j < 0 || j >= n)) break;  // hit the boundary
        const double pj = at(j);
        if (pj > v) {
          saddle = running_min;
          edge = min_pos;
          return true;  // found higher ground
        }
        if (pj < running_min) {
          running_min = pj;
          min_pos = full_circle_ ? wrap_bin(j, n) : j;
        }
      }
      saddle = running_min;
      edge = min_pos;
      return false;
    };
    double saddle_l, saddle_r;
    int edge_l, edge_r;
    const bool higher_l = walk(-1, saddle_l, edge_l);
    const bool higher_r = walk(+1, saddle_r, edge_r);
    double base;
    if (higher_l && higher_r) {
      base = std::max(saddle_l, saddle_r);
    } else if (higher_l) {
      base = saddle_l;
    } else if (higher_r) {
      base = saddle_r;
    } else {
      base = std::min(saddle_l, saddle_r);  // global maximum
    }
    const double prominence = v - base;
    if (prominence < min_prominence) continue;

    // Mass: sum probabilities across the basin [edge_l, edge_r].
    double mass = 0.0;
    if (full_circle_) {
      const int span = wrap_bin(edge_r - edge_l, n);
      for (int s = 0; s <= span; ++s) mass += at(edge_l + s);
    } else {
      for (int j = std::min(edge_l, edge_r); j <= std::max(edge_l, edge_r); ++j) {
        mass += at(j);
      }
    }
    peaks.push_back({bin_center(i), mass});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.mass > b.mass; });
  return peaks;
}

namespace {

std::vector<bool> window_mask(const CircularHistogram& h,
                              const std::vector<double>& centers,
                              int halfwidth_bins) {
  const int n = h.n_bins();
  std::vector<bool> inside(static_cast<std::size_t>(n), false);
  for (double c : centers) {
    const int ic = h.bin_index(c);
    if (ic < 0) continue;
    for (int d = -halfwidth_bins; d <= halfwidth_bins; ++d) {
      int j = ic + d;
      if (h.full_circle()) {
        j = wrap_bin(j, n);
      } else if (j < 0 || j >= n) {
        continue;
      }
      inside[static_cast<std::size_t>(j)] = true;
    }
  }
  return inside;
}

}  // namespace

double mass_outside(const CircularHistogram& h,
                    const std::vector<double>& centers, int halfwidth_bins) {
  const auto inside = window_mask(h, centers, halfwidth_bins);
  double mass = 0.0;
  for (int i = 0; i < h.n_bins(); ++i) {
    if (!inside[static_cast<std::size_t>(i)]) mass += h.probability(i);
  }
  return mass;
}

double background_chi2(const CircularHistogram& h,
                       const std::vector<double>& centers,
                       int halfwidth_bins) {
  const auto inside = window_mask(h, centers, halfwidth_bins);
  std::int64_t n_bg = 0;
  int k = 0;
  for (int i = 0; i < h.n_bins(); ++i) {
    if (!inside[static_cast<std::size_t>(i)]) {
      n_bg += h.bin_count(i);
      ++k;
    }
  }
  if (k < 2) throw EmptyDistribution("background_chi2: no background bins");
  const double e = static_cast<double>(n_bg) / k;
  if (e <= 0.0) throw EmptyDistribution("background_chi2: empty background");
  double chi2 = 0.0;
  for (int i = 0; i < h.n_bins(); ++i) {
    if (!inside[static_cast<std::size_t>(i)]) {
      const double d = static_cast<double>(h.bin_count(i)) - e;
      chi2 += d * d / e;
    }
  }
  return chi2 / (k - 1);
}

}  // namespace gptraj
