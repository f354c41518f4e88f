#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "carpetal/channel_model.hpp"

namespace carpetal {

/// Bit i set means slit i is open. Supports up to 31 slits.
using SlitSubset = std::uint32_t;

inline SlitSubset full_subset(std::size_t slits) {
  return slits >= 32 ? ~SlitSubset{0} : (SlitSubset{1} << slits) - 1;
}

int subset_size(SlitSubset subset);

/// Slit labels A, B, C, ... concatenated, e.g. "AC" for {0, 2}.
std::string subset_label(SlitSubset subset);

/// P_tot with only the open slits' channels present at (x, t).
double subset_density(const ParticleSpec& particle, const GratingSpec& grating,
                      SlitSubset open_slits, double x, double t);

/// P_tot of the open slits integrated over [x_lo, x_hi] by the trapezoid rule.
double subset_window_density(const ParticleSpec& particle, const GratingSpec& grating,
                             SlitSubset open_slits, double t, double x_lo, double x_hi,
                             std::size_t intervals);

/// Densities of every non-empty subset of the grating's slits, indexed by mask.
class SubsetDensityTable {
 public:
  enum class Context { point, window };

  SubsetDensityTable(std::size_t slits, Context context);

  /// All 2^N - 1 subsets at a single point.
  static SubsetDensityTable at_point(const ParticleSpec& particle, const GratingSpec& grating,
                                     double x, double t);
  /// All subsets integrated over a detector window.
  static SubsetDensityTable over_window(const ParticleSpec& particle,
                                        const GratingSpec& grating, double t, double x_lo,
                                        double x_hi, std::size_t intervals = 400);

  std::size_t slits() const { return slits_; }
  Context context() const { return context_; }

  void set(SlitSubset subset, double density);
  bool contains(SlitSubset subset) const;
  double at(SlitSubset subset) const;
  double max_density() const;

 private:
  std::size_t slits_;
  Context context_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
};

/// Inclusion-exclusion term I_S = sum over non-empty T subset of S of
/// (-1)^(|S| - |T|) P_T. Throws PreconditionError if an entry is missing.
double interference_term(const SubsetDensityTable& table, SlitSubset labels);

struct SamplePoint {
  double x = 0.0;
  double t = 0.0;
};

struct OrderSummary {
  int order = 0;
  double max_abs = 0.0;       // max |I| over samples and label sets
  double max_relative = 0.0;  // max |I| / max subset density at the same sample
  double fraction_nonzero = 0.0;  // share of samples with some |I| > nonzero_threshold * max P
  bool passed = false;
};

struct HierarchyReport {
  std::size_t slits = 0;
  std::size_t samples = 0;
  double tolerance = 0.0;          // orders >= 3: max_relative <= tolerance
  double nonzero_threshold = 0.0;  // order 2: |I| > threshold * max P counts as non-zero
  double required_nonzero_fraction = 0.0;
  std::vector<OrderSummary> orders;  // orders 1..max_order

  bool passed() const;
};

struct HierarchySettings {
  double tolerance = 1e-12;
  double nonzero_threshold = 1e-6;
  double required_nonzero_fraction = 0.99;
  /// Samples whose full-set P_tot is below this fraction of the largest subset
  /// density count as on-node and are skipped in the order-2 non-zero census.
  double node_fraction = 1e-3;
};

/// Sorkin hierarchy over the given sample points, orders 1..max_order.
HierarchyReport hierarchy_report(const ParticleSpec& particle, const GratingSpec& grating,
                                 const std::vector<SamplePoint>& samples, int max_order,
                                 const HierarchySettings& settings = {});

}  // namespace carpetal
