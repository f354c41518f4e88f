#include "carpetal/sorkin_hierarchy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "carpetal/errors.hpp"
#include "carpetal/field_assembly.hpp"

namespace carpetal {

namespace {

std::vector<std::size_t> open_channels(SlitSubset subset, std::size_t slits) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < slits; ++i)
    if (subset & (SlitSubset{1} << i)) out.push_back(i);
  return out;
}

void check_subset(SlitSubset subset, std::size_t slits) {
  if (subset == 0) throw PreconditionError("subset must contain at least one open slit");
  if (slits > 31) throw PreconditionError("at most 31 slits supported for subset analysis");
  if ((subset & ~full_subset(slits)) != 0)
    throw PreconditionError("subset " + std::to_string(subset) + " names a slit beyond " +
                            std::to_string(slits));
}

}  // namespace

int subset_size(SlitSubset subset) { return std::popcount(subset); }

std::string subset_label(SlitSubset subset) {
  std::string out;
  for (int i = 0; i < 31; ++i)
    if (subset & (SlitSubset{1} << i)) out.push_back(static_cast<char>('A' + i));
  return out;
}

double subset_density(const ParticleSpec& particle, const GratingSpec& grating,
                      SlitSubset open_slits, double x, double t) {
  check_subset(open_slits, grating.slit_count());
  const auto channels = open_channels(open_slits, grating.slit_count());
  const auto fields = evaluate_channels<double>(particle, grating, x, t, channels);
  return assemble(fields, phase_matrix(fields, particle.hbar)).density;
}

double subset_window_density(const ParticleSpec& particle, const GratingSpec& grating,
                             SlitSubset open_slits, double t, double x_lo, double x_hi,
                             std::size_t intervals) {
  if (!(x_hi > x_lo)) throw PreconditionError("detector window must have x_hi > x_lo");
  if (intervals < 1) throw PreconditionError("detector window needs >= 1 interval");
  const double h = (x_hi - x_lo) / static_cast<double>(intervals);
  double sum = 0.0;
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double w = (k == 0 || k == intervals) ? 0.5 : 1.0;
    sum += w * subset_density(particle, grating, open_slits,
                              x_lo + static_cast<double>(k) * h, t);
  }
  return sum * h;
}

SubsetDensityTable::SubsetDensityTable(std::size_t slits, Context context)
    : slits_(slits), context_(context) {
  if (slits < 1 || slits > 20)
    throw PreconditionError("subset tables support 1..20 slits");
  values_.assign(std::size_t{1} << slits, 0.0);
  present_.assign(values_.size(), 0);
}

SubsetDensityTable SubsetDensityTable::at_point(const ParticleSpec& particle,
                                                const GratingSpec& grating, double x,
                                                double t) {
  SubsetDensityTable table(grating.slit_count(), Context::point);
  const SlitSubset full = full_subset(grating.slit_count());
  for (SlitSubset s = 1; s <= full; ++s)
    table.set(s, subset_density(particle, grating, s, x, t));
  return table;
}

SubsetDensityTable SubsetDensityTable::over_window(const ParticleSpec& particle,
                                                   const GratingSpec& grating, double t,
                                                   double x_lo, double x_hi,
                                                   std::size_t intervals) {
  SubsetDensityTable table(grating.slit_count(), Context::window);
  const SlitSubset full = full_subset(grating.slit_count());
  for (SlitSubset s = 1; s <= full; ++s)
    table.set(s, subset_window_density(particle, grating, s, t, x_lo, x_hi, intervals));
  return table;
}

void SubsetDensityTable::set(SlitSubset subset, double density) {
  check_subset(subset, slits_);
  if (density < 0.0)
    throw PreconditionError("subset density for " + subset_label(subset) + " is negative");
  values_[subset] = density;
  present_[subset] = 1;
}

bool SubsetDensityTable::contains(SlitSubset subset) const {
  return subset != 0 && subset < present_.size() && present_[subset] != 0;
}

double SubsetDensityTable::at(SlitSubset subset) const {
  if (!contains(subset))
    throw PreconditionError("subset density table has no entry for " + subset_label(subset));
  return values_[subset];
}

double SubsetDensityTable::max_density() const {
  double m = 0.0;
  for (std::size_t s = 1; s < values_.size(); ++s)
    if (present_[s]) m = std::max(m, values_[s]);
  return m;
}

double interference_term(const SubsetDensityTable& table, SlitSubset labels) {
  if (labels == 0) throw PreconditionError("interference_term: empty label set");
  const int order = subset_size(labels);
  double sum = 0.0;
  // Walk every non-empty sub-mask of `labels`.
  for (SlitSubset t = labels; t != 0; t = (t - 1) & labels) {
    const double p = table.at(t);
    sum += ((order - subset_size(t)) % 2 == 0) ? p : -p;
  }
  return sum;
}

bool HierarchyReport::passed() const {
  return std::all_of(orders.begin(), orders.end(), [](const auto& o) { return o.passed; });
}

HierarchyReport hierarchy_report(const ParticleSpec& particle, const GratingSpec& grating,
                                 const std::vector<SamplePoint>& samples, int max_order,
                                 const HierarchySettings& settings) {
  const std::size_t n = grating.slit_count();
  if (max_order < 1) throw PreconditionError("max_order must be >= 1");
  if (static_cast<std::size_t>(max_order) > n)
    throw PreconditionError("max_order " + std::to_string(max_order) + " exceeds slit count " +
                            std::to_string(n));
  if (samples.empty()) throw PreconditionError("hierarchy_report needs at least one sample");

  HierarchyReport report;
  report.slits = n;
  report.samples = samples.size();
  report.tolerance = settings.tolerance;
  report.nonzero_threshold = settings.nonzero_threshold;
  report.required_nonzero_fraction = settings.required_nonzero_fraction;
  report.orders.resize(static_cast<std::size_t>(max_order));
  std::vector<std::size_t> nonzero(report.orders.size(), 0);
  std::size_t off_node = 0;
  bool all_non_negative = true;

  const SlitSubset full = full_subset(n);
  for (const auto& sample : samples) {
    const auto table = SubsetDensityTable::at_point(particle, grating, sample.x, sample.t);
    const double pmax = table.max_density();
    const bool on_node = table.at(full) < settings.node_fraction * pmax;
    if (!on_node) ++off_node;
    std::vector<double> largest(report.orders.size(), 0.0);
    for (SlitSubset s = 1; s <= full; ++s) {
      const int k = subset_size(s);
      if (k > max_order) continue;
      const double term = interference_term(table, s);
      if (k == 1 && term < 0.0) all_non_negative = false;
      auto& summary = report.orders[static_cast<std::size_t>(k - 1)];
      summary.max_abs = std::max(summary.max_abs, std::abs(term));
      if (pmax > 0.0)
        summary.max_relative = std::max(summary.max_relative, std::abs(term) / pmax);
      largest[static_cast<std::size_t>(k - 1)] =
          std::max(largest[static_cast<std::size_t>(k - 1)], std::abs(term));
    }
    if (!on_node)
      for (std::size_t k = 0; k < largest.size(); ++k)
        if (largest[k] > settings.nonzero_threshold * pmax) ++nonzero[k];
  }

  for (std::size_t k = 0; k < report.orders.size(); ++k) {
    auto& summary = report.orders[k];
    summary.order = static_cast<int>(k + 1);
    summary.fraction_nonzero =
        off_node > 0 ? static_cast<double>(nonzero[k]) / static_cast<double>(off_node) : 0.0;
    if (summary.order == 1)
      summary.passed = all_non_negative;
    else if (summary.order == 2)
      summary.passed = summary.fraction_nonzero >= settings.required_nonzero_fraction;
    else
      summary.passed = summary.max_relative <= settings.tolerance;
  }
  return report;
}

}  // namespace carpetal
