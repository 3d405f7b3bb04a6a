#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"

namespace fairclus {

// Uniform doubles in [0,1) from the raw mt19937_64 stream. The standard
// library distributions are implementation-defined, this is not.
class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Integer in [0, bound).
  int below(int bound) {
    const auto b = static_cast<std::uint64_t>(bound);
    return static_cast<int>(engine_() % b);
  }

  // Index drawn with probability proportional to weights.
  int weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (u < weights[i]) return static_cast<int>(i);
      u -= weights[i];
    }
    return static_cast<int>(weights.size()) - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct GeneratorParams {
  int n = 10;
  int m = 2;
  int dim = 2;
  std::vector<double> color_weights;  // empty: uniform over m colors
  // Nonempty: colors are this count profile repeated n / sum times, shuffled,
  // so every color count is a multiple of the profile.
  std::vector<int> color_profile;
  std::uint64_t seed = 42;
};

// Points uniform in the unit cube, colors i.i.d. from the weights or a
// shuffled repetition of the profile.
inline MetricInstance generate_instance(const GeneratorParams& p) {
  if (p.n < 1 || p.m < 1 || p.dim < 1) throw Error(ErrorKind::Validation, "need n, m, dim >= 1");
  std::vector<double> weights = p.color_weights;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(p.m), 1.0);
  if (static_cast<int>(weights.size()) != p.m) {
    throw Error(ErrorKind::Validation, "color distribution needs one weight per color");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::Validation, "color weights must be nonnegative");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorKind::Validation, "color weights sum to zero");

  UnitRng rng(p.seed);
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(p.n), std::vector<double>(p.dim));
  std::vector<int> colors(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    for (int d = 0; d < p.dim; ++d) coords[i][d] = rng.uniform();
    if (p.color_profile.empty()) colors[i] = rng.weighted(weights);
  }
  if (!p.color_profile.empty()) {
    if (static_cast<int>(p.color_profile.size()) != p.m) {
      throw Error(ErrorKind::Validation, "color profile needs one count per color");
    }
    int block = 0;
    for (int c : p.color_profile) {
      if (c < 0) throw Error(ErrorKind::Validation, "color profile counts must be nonnegative");
      block += c;
    }
    if (block == 0 || p.n % block != 0) throw Error(ErrorKind::Validation, "n must be a multiple of the profile size");
    colors.clear();
    for (int r = 0; r < p.n / block; ++r) {
      for (int h = 0; h < p.m; ++h) colors.insert(colors.end(), static_cast<std::size_t>(p.color_profile[h]), h);
    }
    // Fisher-Yates with the portable draw.
    for (int i = p.n - 1; i > 0; --i) std::swap(colors[i], colors[rng.below(i + 1)]);
  }
  return MetricInstance::from_coords(std::move(colors), p.m, std::move(coords));
}

}  // namespace fairclus
