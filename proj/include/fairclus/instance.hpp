#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairclus/error.hpp"

namespace fairclus {

// Absolute slack for every distance/threshold comparison.
inline constexpr double kDistanceEps = 1e-9;
// Support threshold: x_ij counts as positive iff x_ij > kPositiveEps.
inline constexpr double kPositiveEps = 1e-9;

// Euclidean tables are precomputed up to this many points.
inline constexpr int kMaxCachedEuclidean = 2000;
// Exhaustive triangle-inequality check up to this many points, sampled above.
inline constexpr int kMaxExhaustiveTriangle = 200;

struct PointRecord {
  int id = 0;
  int color = 0;
  std::vector<double> coords;
};

enum class InstanceFormat { Json, CsvMatrix, CsvPoints };

// A finite colored metric space. Immutable once built; every factory
// validates the metric axioms.
class MetricInstance {
 public:
  static MetricInstance from_matrix(std::vector<int> colors, int num_colors,
                                    std::vector<double> dist) {
    MetricInstance inst;
    inst.init_colors(std::move(colors), num_colors);
    const auto n = static_cast<std::size_t>(inst.n_);
    if (dist.size() != n * n) {
      throw Error(ErrorKind::Parse, "distance matrix has " + std::to_string(dist.size()) +
                                        " entries, expected " + std::to_string(n * n));
    }
    inst.table_ = std::move(dist);
    inst.validate();
    return inst;
  }

  static MetricInstance from_coords(std::vector<int> colors, int num_colors,
                                    std::vector<std::vector<double>> coords) {
    MetricInstance inst;
    inst.init_colors(std::move(colors), num_colors);
    if (coords.size() != static_cast<std::size_t>(inst.n_)) {
      throw Error(ErrorKind::Parse, "coords length does not match n");
    }
    const std::size_t dim = coords.front().size();
    for (const auto& c : coords) {
      if (c.size() != dim) throw Error(ErrorKind::Parse, "coords have inconsistent dimension");
      for (double v : c) {
        if (!std::isfinite(v)) throw Error(ErrorKind::Validation, "non-finite coordinate");
      }
    }
    inst.coords_ = std::move(coords);
    if (inst.n_ <= kMaxCachedEuclidean) {
      const auto n = static_cast<std::size_t>(inst.n_);
      inst.table_.assign(n * n, 0.0);
      for (int i = 0; i < inst.n_; ++i) {
        for (int j = i + 1; j < inst.n_; ++j) {
          const double d = inst.euclidean(i, j);
          inst.table_[i * n + j] = d;
          inst.table_[j * n + i] = d;
        }
      }
    }
    inst.validate();
    return inst;
  }

  int size() const noexcept { return n_; }
  int num_colors() const noexcept { return m_; }
  int color(int i) const { return colors_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& colors() const noexcept { return colors_; }
  bool has_coords() const noexcept { return !coords_.empty(); }
  const std::vector<std::vector<double>>& coords() const noexcept { return coords_; }
  bool has_table() const noexcept { return !table_.empty(); }

  const std::vector<std::string>& color_names() const noexcept { return color_names_; }
  void set_color_names(std::vector<std::string> names) {
    if (!names.empty() && names.size() != static_cast<std::size_t>(m_)) {
      throw Error(ErrorKind::Parse, "color_names length does not match m");
    }
    color_names_ = std::move(names);
  }
  std::string color_name(int h) const {
    if (h >= 0 && static_cast<std::size_t>(h) < color_names_.size()) return color_names_[h];
    return std::to_string(h);
  }

  // Unchecked distance.
  double operator()(int i, int j) const noexcept {
    if (!table_.empty()) return table_[static_cast<std::size_t>(i) * n_ + j];
    return euclidean(i, j);
  }

  double distance(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "point pair (" + std::to_string(i) + "," + std::to_string(j) + ") with n=" +
                      std::to_string(n_));
    }
    return (*this)(i, j);
  }

  std::vector<int> color_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(m_), 0);
    for (int c : colors_) ++counts[c];
    return counts;
  }

  std::vector<PointRecord> points() const {
    std::vector<PointRecord> out;
    out.reserve(colors_.size());
    for (int i = 0; i < n_; ++i) {
      PointRecord p{i, colors_[i], {}};
      if (has_coords()) p.coords = coords_[i];
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  MetricInstance() = default;

  void init_colors(std::vector<int> colors, int num_colors) {
    if (colors.empty()) throw Error(ErrorKind::Validation, "instance has no points");
    if (num_colors <= 0) throw Error(ErrorKind::Color, "m must be positive");
    for (std::size_t i = 0; i < colors.size(); ++i) {
      if (colors[i] < 0 || colors[i] >= num_colors) {
        throw Error(ErrorKind::Color, "point " + std::to_string(i) + " has color " +
                                          std::to_string(colors[i]) + " outside [0," +
                                          std::to_string(num_colors) + ")");
      }
    }
    n_ = static_cast<int>(colors.size());
    m_ = num_colors;
    colors_ = std::move(colors);
  }

  double euclidean(int i, int j) const noexcept {
    const auto& a = coords_[i];
    const auto& b = coords_[j];
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      const double diff = a[t] - b[t];
      s += diff * diff;
    }
    return std::sqrt(s);
  }

  [[noreturn]] static void triangle_error(int i, int l, int j, double dij, double dil, double dlj) {
    std::ostringstream os;
    os << "triangle inequality violated for triple (" << i << "," << l << "," << j << "): d(" << i
       << "," << j << ")=" << dij << " > d(" << i << "," << l << ")+d(" << l << "," << j
       << ")=" << dil + dlj;
    throw Error(ErrorKind::Validation, os.str());
  }

  void validate() const {
    const auto& d = *this;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const double v = d(i, j);
        if (!std::isfinite(v) || v < 0.0) {
          throw Error(ErrorKind::Validation, "distance d(" + std::to_string(i) + "," +
                                                 std::to_string(j) + ") is negative or non-finite");
        }
        if (i == j && v > kDistanceEps) {
          throw Error(ErrorKind::Validation, "d(" + std::to_string(i) + "," + std::to_string(i) +
                                                 ") is not zero");
        }
        if (std::abs(v - d(j, i)) > kDistanceEps) {
          throw Error(ErrorKind::Validation, "asymmetric distance between " + std::to_string(i) +
                                                 " and " + std::to_string(j));
        }
      }
    }
    if (n_ <= kMaxExhaustiveTriangle) {
      for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
          const double dij = d(i, j);
          for (int l = 0; l < n_; ++l) {
            if (dij > d(i, l) + d(l, j) + kDistanceEps) triangle_error(i, l, j, dij, d(i, l), d(l, j));
          }
        }
      }
    } else {
      std::mt19937_64 rng(0x5eedULL);
      const std::uint64_t samples = 200000;
      for (std::uint64_t s = 0; s < samples; ++s) {
        const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(n_));
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(n_));
        const int l = static_cast<int>(rng() % static_cast<std::uint64_t>(n_));
        if (d(i, j) > d(i, l) + d(l, j) + kDistanceEps) {
          triangle_error(i, l, j, d(i, j), d(i, l), d(l, j));
        }
      }
    }
  }

  int n_ = 0;
  int m_ = 0;
  std::vector<int> colors_;
  std::vector<std::vector<double>> coords_;
  std::vector<double> table_;
  std::vector<std::string> color_names_;
};

// Sorted distinct pairwise distances, always containing 0. Values closer
// than kDistanceEps collapse onto the smallest representative.
inline std::vector<double> pairwise_distance_set(const MetricInstance& inst) {
  const int n = inst.size();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * (n - 1) / 2 + 1);
  values.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) values.push_back(inst(i, j));
  }
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    if (out.empty() || v > out.back() + kDistanceEps) out.push_back(v);
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parse_real(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "cannot parse number '" + s + "'");
  }
}

inline int parse_int(const std::string& s) {
  const double v = parse_real(s);
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max()) {
    throw Error(ErrorKind::Parse, "expected an integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

inline MetricInstance instance_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    auto colors = j.at("colors").get<std::vector<int>>();
    if (static_cast<int>(colors.size()) != n) {
      throw Error(ErrorKind::Parse, "colors length does not match n");
    }
    std::optional<MetricInstance> inst;
    if (j.contains("dist")) {
      const auto rows = j.at("dist").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != n) throw Error(ErrorKind::Parse, "dist must have n rows");
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(n) * n);
      for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != n) throw Error(ErrorKind::Parse, "dist row length != n");
        flat.insert(flat.end(), row.begin(), row.end());
      }
      inst = MetricInstance::from_matrix(std::move(colors), m, std::move(flat));
    } else if (j.contains("coords")) {
      inst = MetricInstance::from_coords(std::move(colors), m,
                                         j.at("coords").get<std::vector<std::vector<double>>>());
    } else {
      throw Error(ErrorKind::Parse, "instance needs either 'coords' or 'dist'");
    }
    if (j.contains("color_names")) inst->set_color_names(j.at("color_names").get<std::vector<std::string>>());
    return std::move(*inst);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

inline nlohmann::json instance_to_json(const MetricInstance& inst) {
  nlohmann::json j;
  j["n"] = inst.size();
  j["m"] = inst.num_colors();
  j["colors"] = inst.colors();
  if (inst.has_coords()) {
    j["coords"] = inst.coords();
  } else {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(inst.size()));
    for (int i = 0; i < inst.size(); ++i) {
      for (int k = 0; k < inst.size(); ++k) rows[i].push_back(inst(i, k));
    }
    j["dist"] = rows;
  }
  if (!inst.color_names().empty()) j["color_names"] = inst.color_names();
  return j;
}

// CSV points: header `id,color,x0,x1,...`, one row per point. Rows may
// come in any order but ids must cover [0, n) exactly once. m defaults to
// max color + 1.
inline MetricInstance load_csv_points(std::istream& in, std::optional<int> num_colors = {}) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty csv");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "color") {
    throw Error(ErrorKind::Parse, "csv-points header must be id,color,x0,...");
  }
  const std::size_t dim = header.size() - 2;
  std::vector<std::pair<int, PointRecord>> rows;
  while (std::getline(in, line)) {
    if (detail::blank(line)) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) throw Error(ErrorKind::Parse, "csv row has wrong arity: " + line);
    PointRecord p;
    p.id = detail::parse_int(cells[0]);
    p.color = detail::parse_int(cells[1]);
    for (std::size_t t = 0; t < dim; ++t) p.coords.push_back(detail::parse_real(cells[t + 2]));
    rows.emplace_back(p.id, std::move(p));
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, "csv has no points");
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> colors;
  std::vector<std::vector<double>> coords;
  int max_color = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<int>(i)) {
      throw Error(ErrorKind::Parse, "point ids must be a contiguous 0-based range without duplicates");
    }
    colors.push_back(rows[i].second.color);
    max_color = std::max(max_color, rows[i].second.color);
    coords.push_back(std::move(rows[i].second.coords));
  }
  return MetricInstance::from_coords(std::move(colors), num_colors.value_or(max_color + 1),
                                     std::move(coords));
}

// CSV matrix: n rows of n comma separated reals; colors come from a
// companion stream (comma or whitespace separated).
inline MetricInstance load_csv_matrix(std::istream& matrix, std::istream& colors_in,
                                      std::optional<int> num_colors = {}) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(matrix, line)) {
    if (detail::blank(line)) continue;
    std::vector<double> row;
    for (const auto& cell : detail::split_csv_line(line)) row.push_back(detail::parse_real(cell));
    rows.push_back(std::move(row));
  }
  std::vector<int> colors;
  std::string token;
  while (colors_in >> token) {
    for (const auto& cell : detail::split_csv_line(token)) {
      if (!cell.empty()) colors.push_back(detail::parse_int(cell));
    }
  }
  const std::size_t n = rows.size();
  if (n == 0) throw Error(ErrorKind::Parse, "empty distance matrix");
  if (colors.size() != n) throw Error(ErrorKind::Parse, "colors file length does not match matrix");
  std::vector<double> flat;
  for (const auto& row : rows) {
    if (row.size() != n) throw Error(ErrorKind::Parse, "distance matrix is not square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  const int m = num_colors.value_or(*std::max_element(colors.begin(), colors.end()) + 1);
  return MetricInstance::from_matrix(std::move(colors), m, std::move(flat));
}

inline MetricInstance load_instance(std::istream& source, InstanceFormat format) {
  switch (format) {
    case InstanceFormat::Json: {
      nlohmann::json j;
      try {
        source >> j;
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
      }
      return instance_from_json(j);
    }
    case InstanceFormat::CsvPoints:
      return load_csv_points(source);
    case InstanceFormat::CsvMatrix:
      throw Error(ErrorKind::Parse, "csv-matrix input needs a colors companion stream");
  }
  throw Error(ErrorKind::Parse, "unknown format");
}

}  // namespace fairclus
