#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairclus/constraints.hpp"
#include "fairclus/error.hpp"
#include "fairclus/instance.hpp"

namespace fairclus {

// { "objective", "cost", "centers", "assignment", "colors", "m" }. Colors
// travel with the clustering so it can be audited without the metric.
inline nlohmann::json clustering_to_json(const Clustering& c, const MetricInstance& inst) {
  nlohmann::json j;
  j["objective"] = to_string(c.objective);
  j["cost"] = c.cost;
  j["centers"] = c.centers;
  j["assignment"] = c.assignment;
  j["colors"] = inst.colors();
  j["m"] = inst.num_colors();
  return j;
}

struct LoadedClustering {
  Clustering clustering;
  std::vector<int> colors;
  int num_colors = 0;
};

inline LoadedClustering clustering_from_json(const nlohmann::json& j) {
  try {
    LoadedClustering out;
    out.clustering.objective = parse_objective(j.value("objective", std::string("center")));
    out.clustering.cost = j.value("cost", 0.0);
    out.clustering.centers = j.at("centers").get<std::vector<int>>();
    std::sort(out.clustering.centers.begin(), out.clustering.centers.end());
    out.clustering.assignment = j.at("assignment").get<std::vector<int>>();
    if (j.contains("colors")) out.colors = j.at("colors").get<std::vector<int>>();
    out.num_colors = j.value("m", 0);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

// An instance carrying only colors (all distances zero), enough for the
// fairness checks when no metric is at hand.
inline MetricInstance colors_only_instance(std::vector<int> colors, int num_colors) {
  const std::size_t n = colors.size();
  if (n == 0) throw Error(ErrorKind::Parse, "clustering has no points");
  std::vector<std::vector<double>> coords(n, std::vector<double>{0.0});
  return MetricInstance::from_coords(std::move(colors), num_colors, std::move(coords));
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Parse, "cannot write " + path);
  out << text;
}

// Picks the reader from the extension: .json, .csv (points).
inline MetricInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return load_instance(in, csv ? InstanceFormat::CsvPoints : InstanceFormat::Json);
}

}  // namespace fairclus
