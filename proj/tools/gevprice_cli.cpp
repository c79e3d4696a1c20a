#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevprice/errors.hpp"
#include "gevprice/harness.hpp"
#include "gevprice/penalty.hpp"
#include "gevprice/pricing_robust.hpp"

namespace {

using nlohmann::json;
using namespace gevprice;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(std::stoul(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad list entry '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  if (s.find(':') != std::string::npos) return parse_grid(s);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

int cmd_solve(const std::string& instance, const std::string& mode, const std::string& out) {
  const Instance inst = instance_from_json(read_json(instance));
  json result;
  if (mode == "homogeneous") {
    result = solution_to_json(robust_price_homogeneous(inst.model, inst.set, inst.line.costs));
  } else if (mode == "partition") {
    result = solution_to_json(robust_price_partition(inst.model, inst.set, inst.line));
  } else {
    if (!inst.penalty) throw ConfigError("penalty mode needs penalty constraints in the instance");
    const auto spec = PenaltySpec::from_product(inst.line, *inst.penalty);
    result = solution_to_json(robust_penalty_solve(inst.model, inst.set, inst.line, spec));
  }
  write_text(out, result.dump(2) + "\n");
  return 0;
}

int cmd_evaluate(const std::string& instance, const std::string& prices_path, std::size_t samples,
                 std::uint64_t seed, const std::string& out) {
  const Instance inst = instance_from_json(read_json(instance));
  const json pj = read_json(prices_path);
  const std::vector<double> prices =
      pj.is_object() ? pj.at("prices").get<std::vector<double>>() : pj.get<std::vector<double>>();
  if (prices.size() != inst.line.size()) throw ConfigError("price vector has the wrong length");
  const auto s = sampled_worst_case(inst.model, inst.set, prices, inst.line.costs, samples, seed);
  json result{{"samples", samples}, {"seed", seed}, {"worst", s.worst}, {"average", s.average}, {"max", s.max}};
  write_text(out, result.dump(2) + "\n");
  return 0;
}

int cmd_experiment(const std::string& instance, const std::string& eps_grid, const std::string& s1,
                   std::size_t samples, std::size_t s2, std::uint64_t seed, const std::string& lambda_grid,
                   const std::string& out_dir) {
  const Instance inst = instance_from_json(read_json(instance));
  ComparisonOptions opts;
  opts.s1 = parse_list(s1);
  opts.n_eval = samples;
  opts.s2 = s2 ? s2 : samples;
  opts.seed = seed;
  const auto eps = parse_grid(eps_grid);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  const auto reports = run_comparison(inst, eps, opts);
  write_text((dir / "comparison.csv").string(), comparison_csv(reports));
  write_text((dir / "histograms.json").string(), histograms_json(reports).dump(1) + "\n");
  if (!lambda_grid.empty()) {
    const auto pen = run_penalty_comparison(inst, parse_values(lambda_grid), eps, opts);
    write_text((dir / "penalty.csv").string(), penalty_csv(pen));
    write_text((dir / "penalty_histograms.json").string(), histograms_json(pen).dump(1) + "\n");
  }
  for (const auto& rep : reports)
    for (const auto& row : rep.rows)
      if (!row.ok) std::cerr << "eps " << rep.eps << " " << row.method << ": " << row.error << "\n";
  return 0;
}

int cmd_gen(const GenerateOptions& g, const std::string& out) {
  write_text(out, instance_to_json(generate_instance(g)).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust product-line pricing under GEV choice models"};
  app.require_subcommand(1);

  std::string instance, out, mode = "partition", prices, eps_grid = "0.02:0.40:0.02", s1 = "10,50",
                             out_dir = "results", lambda_grid;
  std::size_t samples = 1000, s2 = 0;
  std::uint64_t seed = 1;
  GenerateOptions g;

  auto* solve = app.add_subcommand("solve", "Compute robust optimal prices");
  solve->add_option("--instance", instance, "Instance JSON")->required();
  solve->add_option("--mode", mode, "homogeneous, partition or penalty")
      ->check(CLI::IsMember({"homogeneous", "partition", "penalty"}));
  solve->add_option("--out", out, "Solution JSON (stdout if omitted)");

  auto* evaluate = app.add_subcommand("evaluate", "Sampled revenue statistics of given prices");
  evaluate->add_option("--instance", instance, "Instance JSON")->required();
  evaluate->add_option("--prices", prices, "JSON price array or solution file")->required();
  evaluate->add_option("--samples", samples, "Number of scenarios");
  evaluate->add_option("--seed", seed, "Random seed");
  evaluate->add_option("--out", out, "Output JSON (stdout if omitted)");

  auto* experiment = app.add_subcommand("experiment", "Compare RO, DET and SA over an eps grid");
  experiment->add_option("--instance", instance, "Instance JSON")->required();
  experiment->add_option("--eps-grid", eps_grid, "LO:HI:STEP");
  experiment->add_option("--s1", s1, "Comma-separated SA candidate counts");
  experiment->add_option("--samples", samples, "Evaluation scenarios per eps");
  experiment->add_option("--s2", s2, "SA scoring scenarios (defaults to --samples)");
  experiment->add_option("--seed", seed, "Random seed");
  experiment->add_option("--lambda-grid", lambda_grid, "Penalty weights, LO:HI:STEP or a comma list");
  experiment->add_option("--out-dir", out_dir, "Output directory");

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--seed", g.seed, "Random seed");
  gen->add_option("--m", g.m, "Products");
  gen->add_option("--k", g.K, "Customer types");
  gen->add_option("--n", g.N, "Partitions");
  gen->add_option("--nests", g.nests, "Nests (default: one per partition)");
  std::string model = "nested";
  gen->add_option("--model", model, "mnl or nested")->check(CLI::IsMember({"mnl", "nested"}));
  gen->add_option("--eps", g.eps, "Uncertainty level");
  gen->add_flag("--penalty", g.penalty, "Add an expected-sale constraint");
  gen->add_option("--out", out, "Instance JSON (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve(instance, mode, out);
    if (*evaluate) return cmd_evaluate(instance, prices, samples, seed, out);
    if (*experiment) return cmd_experiment(instance, eps_grid, s1, samples, s2, seed, lambda_grid, out_dir);
    if (*gen) {
      g.nested = model == "nested";
      return cmd_gen(g, out);
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
