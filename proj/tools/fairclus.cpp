// fairclus: generate instances, run the doubly fair pipeline, the brute
// force oracle, audits and seeded sweeps.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairclus/fairclus.hpp"

namespace fc = fairclus;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_list(s)) out.push_back(fc::detail::parse_int(t));
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) out.push_back(fc::detail::parse_real(t));
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    fc::write_text_file(path, text);
  }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

struct ProblemArgs {
  std::string instance;
  std::string spec;
  bool exact_gf = false;
  std::string objective = "center";
  std::optional<int> k;
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("-i,--instance", a.instance, "Instance file (.json or .csv points)")->required();
  cmd->add_option("-s,--spec", a.spec, "Fairness spec JSON");
  cmd->add_flag("--exact-gf", a.exact_gf, "Use the instance's own color ratios as GF bounds");
  cmd->add_option("--objective", a.objective, "center, median or means")
      ->check(CLI::IsMember({"center", "median", "means"}));
  cmd->add_option("-k", a.k, "Number of centers when no spec is given");
}

struct Problem {
  fc::MetricInstance inst;
  fc::FairnessSpec spec;
  fc::Objective objective;
};

Problem load_problem(const ProblemArgs& a) {
  auto inst = fc::read_instance_file(a.instance);
  json spec_json;
  if (!a.spec.empty()) {
    spec_json = fc::read_json_file(a.spec);
  } else if (a.k) {
    spec_json = {{"k", *a.k}};
  } else {
    throw fc::Error(fc::ErrorKind::Validation, "need --spec or -k");
  }
  if (a.k) spec_json["k"] = *a.k;
  auto spec = fc::fairness_from_json(spec_json, inst, a.exact_gf);
  return {std::move(inst), std::move(spec), fc::parse_objective(a.objective)};
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  fc::GeneratorParams params;
  std::string weights;
  std::string profile;
  std::string out;
  std::string spec_out;
  int k = 2;
};

int cmd_gen(const GenArgs& a) {
  auto p = a.params;
  if (!a.weights.empty()) p.color_weights = parse_real_list(a.weights);
  if (!a.profile.empty()) p.color_profile = parse_int_list(a.profile);
  const auto inst = fc::generate_instance(p);
  emit(a.out, dump_json(fc::instance_to_json(inst)));
  if (!a.spec_out.empty()) {
    fc::FairnessSpec spec{fc::GroupFairnessSpec::exact_ratios(inst),
                          fc::CenterDiversitySpec::unconstrained(inst.num_colors(), a.k)};
    auto j = fc::fairness_to_json(spec);
    j["exact_gf"] = true;
    fc::write_text_file(a.spec_out, dump_json(j));
  }
  return 0;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  ProblemArgs problem;
  std::string backend = "exact";
  bool with_oracle = false;
  std::string report_out;
  std::string clustering_out;
  std::string dump_lp;
  std::string dump_rerouting;
  std::string dump_flow;
  bool no_timings = false;
};

std::string summary_line(const fc::SolveReport& r) {
  std::ostringstream s;
  s << std::setprecision(10) << "objective=" << fc::to_string(r.objective) << " cost=" << r.cost << " factor=";
  if (r.guarantee) {
    s << *r.guarantee;
  } else {
    s << "none";
  }
  s << " violation=" << r.gf_violation << " ds=" << (r.ds_satisfied ? "ok" : "violated");
  if (const auto ratio = r.oracle_ratio()) s << " oracle_ratio=" << *ratio;
  return s.str();
}

int cmd_solve(const SolveArgs& a) {
  const auto pb = load_problem(a.problem);
  const auto backend = fc::make_ds_backend(a.backend);
  fc::PipelineOptions opts;
  opts.backend = backend.get();
  auto res = fc::solve_doubly_fair(pb.inst, pb.spec.gf, pb.spec.ds, pb.objective, opts);
  if (a.with_oracle) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto orc = fc::brute_force_doubly_fair(pb.inst, pb.spec.gf, pb.spec.ds, pb.objective);
    res.report.oracle_cost = orc.clustering.cost;
    res.report.timings_ms["oracle"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  if (!a.dump_lp.empty() && res.trace.lp_model) {
    std::ostringstream s;
    fc::write_lp_format(*res.trace.lp_model, s);
    fc::write_text_file(a.dump_lp, s.str());
  }
  if (!a.dump_rerouting.empty()) fc::write_text_file(a.dump_rerouting, dump_json(fc::rerouting_to_json(res.trace.rerouted)));
  if (!a.dump_flow.empty()) {
    std::ostringstream s;
    fc::write_flow_network(res.trace.network, s);
    fc::write_text_file(a.dump_flow, s.str());
  }
  if (!a.clustering_out.empty()) {
    fc::write_text_file(a.clustering_out, dump_json(fc::clustering_to_json(res.clustering, pb.inst)));
  }
  const auto report = dump_json(fc::report_to_json(res.report, !a.no_timings));
  if (!a.report_out.empty()) {
    fc::write_text_file(a.report_out, report);
  }
  std::cout << summary_line(res.report) << "\n";
  if (a.report_out.empty() && a.clustering_out.empty()) std::cout << report;
  return 0;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  ProblemArgs problem;
  std::string out;
  double max_seconds = 600.0;
};

int cmd_oracle(const OracleArgs& a) {
  const auto pb = load_problem(a.problem);
  fc::OracleBudget budget;
  budget.max_seconds = a.max_seconds;
  const auto res = fc::brute_force_doubly_fair(pb.inst, pb.spec.gf, pb.spec.ds, pb.objective, budget);
  json j;
  j["cost"] = res.clustering.cost;
  j["clustering"] = fc::clustering_to_json(res.clustering, pb.inst);
  j["center_sets"] = res.stats.center_sets;
  j["nodes"] = res.stats.nodes;
  emit(a.out, dump_json(j));
  return 0;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string clustering;
  std::string spec;
  std::string instance;
  bool exact_gf = false;
};

int cmd_check(const CheckArgs& a) {
  auto loaded = fc::clustering_from_json(fc::read_json_file(a.clustering));
  std::optional<fc::MetricInstance> inst;
  if (!a.instance.empty()) {
    inst = fc::read_instance_file(a.instance);
  } else {
    if (loaded.colors.empty()) throw fc::Error(fc::ErrorKind::Parse, "clustering has no colors; pass --instance");
    inst = fc::colors_only_instance(loaded.colors, loaded.num_colors);
  }
  auto& c = loaded.clustering;
  if (static_cast<int>(c.assignment.size()) != inst->size()) {
    throw fc::Error(fc::ErrorKind::Validation, "assignment length does not match the instance");
  }
  json spec_json = a.spec.empty() ? json{{"k", static_cast<int>(c.centers.size())}} : fc::read_json_file(a.spec);
  const auto spec = fc::fairness_from_json(spec_json, *inst, a.exact_gf);
  const auto clusters = c.clusters();
  json out;
  out["gf_violation"] = fc::gf_violation(*inst, c, spec.gf);
  out["ds_satisfied"] = fc::check_ds(*inst, c.centers, spec.ds);
  out["center_colors"] = fc::center_color_counts(*inst, c.centers);
  json per = json::array();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    per.push_back({{"center", c.centers[i]},
                   {"size", clusters[i].size()},
                   {"histogram", fc::color_histogram(*inst, clusters[i])},
                   {"group_fair", fc::check_cluster_group_fair(*inst, clusters[i], spec.gf)}});
  }
  out["clusters"] = per;
  if (!a.instance.empty()) out["cost"] = fc::assignment_cost(*inst, c.assignment, c.objective);
  std::cout << dump_json(out);
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  int count = 20;
  int n = 10;
  int m = 2;
  int k = 2;
  int dim = 2;
  std::string profile;
  std::string ds_lower;
  std::string ds_upper;
  std::string objective = "all";
  std::string backend = "exact";
  bool with_oracle = false;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string csv_out;
};

struct SweepRow {
  std::uint64_t seed = 0;
  fc::Objective objective = fc::Objective::Center;
  std::string status = "ok";
  std::string message;
  std::optional<fc::SolveReport> report;
  std::optional<double> oracle_cost;
  double oracle_ms = 0.0;
};

std::string csv_number(std::optional<double> v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(12) << *v;
  return s.str();
}

int cmd_sweep(const SweepArgs& a) {
  std::vector<fc::Objective> objectives;
  if (a.objective == "all") {
    objectives = {fc::Objective::Center, fc::Objective::Median, fc::Objective::Means};
  } else {
    objectives = {fc::parse_objective(a.objective)};
  }
  fc::CenterDiversitySpec ds = fc::CenterDiversitySpec::unconstrained(a.m, a.k);
  if (!a.ds_lower.empty()) ds.lower = parse_int_list(a.ds_lower);
  if (!a.ds_upper.empty()) ds.upper = parse_int_list(a.ds_upper);
  ds.validate(a.m);

  std::vector<SweepRow> rows(static_cast<std::size_t>(a.count) * objectives.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t idx = next++;
      if (idx >= rows.size()) return;
      auto& row = rows[idx];
      row.seed = a.seed + idx / objectives.size();
      row.objective = objectives[idx % objectives.size()];
      try {
        fc::GeneratorParams p;
        p.n = a.n;
        p.m = a.m;
        p.dim = a.dim;
        p.seed = row.seed;
        if (!a.profile.empty()) p.color_profile = parse_int_list(a.profile);
        const auto inst = fc::generate_instance(p);
        const auto gf = fc::GroupFairnessSpec::exact_ratios(inst);
        const auto backend = fc::make_ds_backend(a.backend);
        fc::PipelineOptions opts;
        opts.backend = backend.get();
        row.report = fc::solve_doubly_fair(inst, gf, ds, row.objective, opts).report;
        if (a.with_oracle) {
          const auto t0 = std::chrono::steady_clock::now();
          try {
            row.oracle_cost = fc::brute_force_doubly_fair(inst, gf, ds, row.objective).clustering.cost;
            row.report->oracle_cost = row.oracle_cost;
          } catch (const fc::Error& e) {
            row.message = std::string("oracle ") + fc::to_string(e.kind());
          }
          row.oracle_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
      } catch (const fc::Error& e) {
        row.status = fc::to_string(e.kind());
        row.message = e.message();
      }
    }
  };
  const int jobs = std::max(1, a.jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "seed,objective,status,cost,lower_bound,guarantee_factor,gf_violation,ds_satisfied,oracle_cost,"
         "oracle_ratio,pipeline_ms,oracle_ms,message\n";
  double worst_violation = 0.0;
  int failures = 0;
  for (const auto& row : rows) {
    csv << row.seed << "," << fc::to_string(row.objective) << "," << row.status << ",";
    if (row.report) {
      const auto& r = *row.report;
      worst_violation = std::max(worst_violation, r.gf_violation);
      csv << csv_number(r.cost) << "," << csv_number(r.lp_lower_bound()) << "," << csv_number(r.guarantee) << ","
          << csv_number(r.gf_violation) << "," << (r.ds_satisfied ? "true" : "false") << ","
          << csv_number(row.oracle_cost) << "," << csv_number(r.oracle_ratio()) << ","
          << csv_number(r.timings_ms.at("total")) << "," << csv_number(row.oracle_ms);
    } else {
      ++failures;
      csv << ",,,,,,,,";
    }
    csv << "," << row.message << "\n";
  }
  emit(a.csv_out, csv.str());
  std::cerr << "sweep: " << rows.size() << " runs, " << failures << " failed, worst gf_violation "
            << worst_violation << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doubly constrained fair clustering: k-center, k-median and k-means"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded random instance");
  g->add_option("--n", gen.params.n, "Number of points")->check(CLI::PositiveNumber);
  g->add_option("--m", gen.params.m, "Number of colors")->check(CLI::PositiveNumber);
  g->add_option("--dim", gen.params.dim, "Coordinate dimension")->check(CLI::PositiveNumber);
  g->add_option("--weights", gen.weights, "Color distribution, e.g. 0.5,0.5");
  g->add_option("--profile", gen.profile, "Repeat this color count profile, e.g. 1,2");
  g->add_option("--seed", gen.params.seed, "Random seed");
  g->add_option("-k", gen.k, "k for the companion spec");
  g->add_option("-o,--out", gen.out, "Output path (default stdout)");
  g->add_option("--spec-out", gen.spec_out, "Also write an exact-GF spec here");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Run the doubly fair pipeline");
  add_problem_options(s, solve.problem);
  s->add_option("--ds-backend", solve.backend, "exact, greedy or subprocess:<cmd>");
  s->add_flag("--with-oracle", solve.with_oracle, "Also run the brute force oracle and report the ratio");
  s->add_option("--report", solve.report_out, "Write the report JSON here");
  s->add_option("--clustering", solve.clustering_out, "Write the clustering JSON here");
  s->add_option("--dump-lp", solve.dump_lp, "Write the solved LP in CPLEX LP format");
  s->add_option("--dump-rerouting", solve.dump_rerouting, "Write the rerouted solution as JSON");
  s->add_option("--dump-flow", solve.dump_flow, "Write the flow network as an edge list");
  s->add_flag("--no-timings", solve.no_timings, "Omit timings from the report");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Brute force optimum on a small instance");
  add_problem_options(o, oracle.problem);
  o->add_option("-o,--out", oracle.out, "Output path (default stdout)");
  o->add_option("--max-seconds", oracle.max_seconds, "Time cap");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Audit a clustering against a fairness spec");
  c->add_option("-c,--clustering", check.clustering, "Clustering JSON")->required();
  c->add_option("-s,--spec", check.spec, "Fairness spec JSON");
  c->add_option("-i,--instance", check.instance, "Instance (enables cost recomputation)");
  c->add_flag("--exact-gf", check.exact_gf, "Use the instance's own color ratios as GF bounds");

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Seeded batch of solves with an aggregate CSV");
  w->add_option("--count", sweep.count, "Number of instances")->check(CLI::PositiveNumber);
  w->add_option("--n", sweep.n, "Points per instance")->check(CLI::PositiveNumber);
  w->add_option("--m", sweep.m, "Colors")->check(CLI::PositiveNumber);
  w->add_option("-k", sweep.k, "Centers")->check(CLI::PositiveNumber);
  w->add_option("--dim", sweep.dim, "Coordinate dimension")->check(CLI::PositiveNumber);
  w->add_option("--profile", sweep.profile, "Color count profile to repeat");
  w->add_option("--ds-lower", sweep.ds_lower, "Center lower bounds per color");
  w->add_option("--ds-upper", sweep.ds_upper, "Center upper bounds per color");
  w->add_option("--objective", sweep.objective, "center, median, means or all")
      ->check(CLI::IsMember({"center", "median", "means", "all"}));
  w->add_option("--ds-backend", sweep.backend, "exact, greedy or subprocess:<cmd>");
  w->add_flag("--with-oracle", sweep.with_oracle, "Run the oracle on every instance");
  w->add_option("--jobs", sweep.jobs, "Concurrent solves")->check(CLI::PositiveNumber);
  w->add_option("--seed", sweep.seed, "First seed");
  w->add_option("-o,--out", sweep.csv_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_solve(solve);
    if (*o) return cmd_oracle(oracle);
    if (*c) return cmd_check(check);
    if (*w) return cmd_sweep(sweep);
  } catch (const fc::Error& e) {
    fc::log::error(e.what());
    return fc::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    fc::log::error(e.what());
    return 1;
  }
  return 1;
}
