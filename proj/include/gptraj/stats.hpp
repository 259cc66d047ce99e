#pragma once
// Circular statistics for phase ensembles: fixed-bin histograms with
// exclusion counting, resultant-based mean/variance, peak extraction, and
// exact mergeability across workers.

#include <cstdint>
#include <vector>

#include "gptraj/types.hpp"

namespace gptraj {

struct Peak {
  double center = 0.0;  // bin center, radians
  double mass = 0.0;    // integrated probability over the peak's basin
};

class CircularHistogram {
 public:
  explicit CircularHistogram(int n_bins = 200, double lo = -kPi,
                             double hi = kPi);

  // Add one phase sample. Full-circle histograms wrap the sample into range;
  // partial-range histograms count out-of-range samples as excluded.
  void accumulate(double phase);
  // Count a sample that carries no usable phase (e.g. singular trajectory).
  void add_excluded();

  // Merge another histogram with identical binning (throws ConfigError).
  void merge(const CircularHistogram& other);
  static CircularHistogram merged(const CircularHistogram& a,
                                  const CircularHistogram& b);

  // arg and 1 - |.|/n of the resultant over included samples.
  // Throw EmptyDistribution when nothing was included.
  double circular_mean() const;
  double circular_variance() const;

  // Local maxima of per-bin probability with topographic prominence at least
  // min_prominence, sorted by descending mass.
  std::vector<Peak> find_peaks(double min_prominence) const;

  int n_bins() const { return static_cast<int>(bins_.size()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool full_circle() const { return full_circle_; }
  double bin_width() const { return width_; }
  double bin_center(int i) const { return lo_ + (i + 0.5) * width_; }
  std::int64_t bin_count(int i) const { return bins_[i]; }
  const std::vector<std::int64_t>& bins() const { return bins_; }
  std::int64_t n_total() const { return n_total_; }
  std::int64_t n_excluded() const { return n_excluded_; }
  std::int64_t n_included() const { return n_total_ - n_excluded_; }
  // Probability mass of bin i among included samples.
  double probability(int i) const;
  // Raw resultant sums (serialized so merges lose nothing).
  double resultant_re() const { return sum_re_; }
  double resultant_im() const { return sum_im_; }
  int bin_index(double phase) const;

 private:
  double lo_, hi_, width_;
  bool full_circle_;
  std::vector<std::int64_t> bins_;
  std::int64_t n_total_ = 0;
  std::int64_t n_excluded_ = 0;
  double sum_re_ = 0.0;
  double sum_im_ = 0.0;
};

// Probability mass outside +-halfwidth_bins of every listed center.
double mass_outside(const CircularHistogram& h,
                    const std::vector<double>& centers, int halfwidth_bins);

// Reduced chi^2 of included counts against a uniform background, evaluated
// over bins farther than halfwidth_bins from every listed center.
double background_chi2(const CircularHistogram& h,
                       const std::vector<double>& centers, int halfwidth_bins);

}  // namespace gptraj
