#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairclus/fairclus.hpp"

namespace fairclus::fixtures {

// A seeded desk-scale instance whose color counts are a repeated profile,
// so that exact group fairness admits k nonempty clusters.
struct SeededCase {
  std::uint64_t seed = 0;
  MetricInstance inst;
  GroupFairnessSpec gf;
  CenterDiversitySpec ds;

  std::string label() const {
    return "seed=" + std::to_string(seed) + " n=" + std::to_string(inst.size()) + " m=" +
           std::to_string(inst.num_colors()) + " k=" + std::to_string(ds.k);
  }
};

inline SeededCase make_seeded_case(std::uint64_t seed, int max_n = 14) {
  struct Family {
    std::vector<int> profile;
    int min_reps;
    int max_reps;
  };
  static const std::vector<Family> families = {{{1, 1}, 3, 7}, {{1, 2}, 3, 4}, {{1, 1, 1}, 2, 4}};
  UnitRng rng(seed * 7919 + 17);
  const auto& fam = families[seed % families.size()];
  const int k = 2 + rng.below(2);
  int block = 0;
  for (int c : fam.profile) block += c;
  const int lo = std::max(fam.min_reps, k);
  const int hi = std::min(fam.max_reps, max_n / block);
  const int reps = lo + rng.below(std::max(1, hi - lo + 1));

  GeneratorParams p;
  p.m = static_cast<int>(fam.profile.size());
  p.n = reps * block;
  p.color_profile = fam.profile;
  p.seed = seed;
  SeededCase out{seed, generate_instance(p), {}, {}};
  out.gf = GroupFairnessSpec::exact_ratios(out.inst);

  // Center color profile: k draws, then either exact or widened by one.
  std::vector<int> profile(static_cast<std::size_t>(p.m), 0);
  for (int i = 0; i < k; ++i) ++profile[rng.below(p.m)];
  out.ds.k = k;
  if (rng.below(2) == 0) {
    out.ds.lower = profile;
    out.ds.upper = profile;
  } else {
    for (int h = 0; h < p.m; ++h) {
      out.ds.lower.push_back(std::max(0, profile[h] - 1));
      out.ds.upper.push_back(profile[h] + 1);
    }
  }
  return out;
}

// Largest violation of any LP row family, recomputed from scratch: column
// sums, color-ratio rows per receiving point, and 0 <= x <= y.
struct IndependentResiduals {
  double column = 0.0;
  double ratio = 0.0;
  double opening = 0.0;
};

inline IndependentResiduals recompute_residuals(const MetricInstance& inst, const GroupFairnessSpec& gf,
                                                const FractionalSolution& s) {
  IndependentResiduals r;
  const int n = s.n;
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += s.x(i, j);
    r.column = std::max(r.column, std::abs(col - 1.0));
  }
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    std::vector<double> by_color(static_cast<std::size_t>(inst.num_colors()), 0.0);
    for (int j = 0; j < n; ++j) {
      total += s.x(i, j);
      by_color[inst.color(j)] += s.x(i, j);
      r.opening = std::max({r.opening, s.x(i, j) - s.y(i), -s.x(i, j)});
    }
    for (int h = 0; h < inst.num_colors(); ++h) {
      r.ratio = std::max(r.ratio, by_color[h] - gf.upper[h].value() * total);
      r.ratio = std::max(r.ratio, gf.lower[h].value() * total - by_color[h]);
    }
  }
  return r;
}

}  // namespace fairclus::fixtures
