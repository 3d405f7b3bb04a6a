// Solves the bundled two-town instance under all three objectives and
// prints one line per run, plus the optimum when the oracle is cheap.
//
//   fairclus_sample [instance.json spec.json]
#include <iomanip>
#include <iostream>

#include "fairclus/fairclus.hpp"

namespace fc = fairclus;

int main(int argc, char** argv) {
  const std::string dir = FAIRCLUS_SAMPLE_DIR;
  const std::string instance_path = argc > 2 ? argv[1] : dir + "/two_towns.json";
  const std::string spec_path = argc > 2 ? argv[2] : dir + "/two_towns_spec.json";
  try {
    const auto inst = fc::read_instance_file(instance_path);
    const auto spec = fc::fairness_from_json(fc::read_json_file(spec_path), inst);
    std::cout << std::fixed << std::setprecision(4);
    for (auto o : {fc::Objective::Center, fc::Objective::Median, fc::Objective::Means}) {
      const auto res = fc::solve_doubly_fair(inst, spec.gf, spec.ds, o);
      std::cout << std::setw(7) << fc::to_string(o) << "  cost " << res.clustering.cost << "  centers";
      for (int c : res.clustering.centers) std::cout << ' ' << c << '(' << inst.color_name(inst.color(c)) << ')';
      std::cout << "  violation " << res.report.gf_violation;
      if (inst.size() <= 14) {
        const auto opt = fc::brute_force_doubly_fair(inst, spec.gf, spec.ds, o);
        std::cout << "  optimum " << opt.clustering.cost;
      }
      std::cout << '\n';
    }
  } catch (const fc::Error& e) {
    std::cerr << e.what() << '\n';
    return fc::exit_code_for(e.kind());
  }
  return 0;
}
