#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "circflow/generator.hpp"
#include "circflow/pipeline.hpp"

using namespace circflow;

namespace {

std::string slurp(const std::string& path) {
  if (path.empty() || path == "-")
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Problem readProblem(const std::string& path) {
  std::string text = slurp(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return problemFromJson(nlohmann::json::parse(text));
  return parseDimacs(text);
}

void addSolveFlags(CLI::App* app, SolveOptions& o, std::string& method) {
  app->add_option("--method", method, "vanilla | eleven8 | four3 | oracle")
      ->check(CLI::IsMember({"vanilla", "eleven8", "four3", "oracle"}));
  app->add_option("--epsilon", o.epsilon, "gap at which the interior point loop stops (default max(1,c_inf)/m^3)");
  app->add_option("--delta-scale", o.deltaScale, "multiplier on the step size schedule");
  app->add_option("--kappa", o.kappa, "p-norm regularizer constant for the accelerated steps");
  app->add_flag("--strict-delta", o.strictDelta, "fail instead of warning when delta is below its lower bound");
  app->add_option("--max-iters", o.maxIterations, "iteration cap");
  app->add_option("--scaling-threshold", o.scalingThreshold, "bit scaling above this |c|_inf (default m^3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unit-capacity min-cost flow by interior point methods"};
  app.require_subcommand(1);
  std::string logLevel = "warn";
  app.add_option("--log-level", logLevel, "trace, debug, info, warn, error, off");

  SolveOptions solveOpts;
  std::string method = "vanilla", input;
  bool asJson = false;
  std::uint64_t seed = 1;
  auto* solve = app.add_subcommand("solve", "solve one instance (DIMACS or JSON)");
  addSolveFlags(solve, solveOpts, method);
  solve->add_option("--input", input, "instance file (default stdin)");
  solve->add_flag("--verify", solveOpts.verify, "compare the cost with the SSP oracle");
  solve->add_flag("--json", asJson, "print a JSON report");
  solve->add_option("--seed", seed, "unused by the solver itself; kept for reproducible scripts");

  BenchOptions bench;
  std::string benchMethod = "vanilla";
  auto* benchCmd = app.add_subcommand("bench", "iteration counts over random instance families (JSON lines)");
  addSolveFlags(benchCmd, bench.solve, benchMethod);
  benchCmd->add_option("--sizes", bench.sizes, "arc counts")->delimiter(',');
  benchCmd->add_option("--per-size", bench.instancesPerSize, "instances per size");
  benchCmd->add_option("--seed", bench.seed);
  benchCmd->add_option("--max-cost", bench.maxCost);
  benchCmd->add_flag("--verify", bench.solve.verify);

  int genN = 10, genM = 30;
  long long genCost = 20;
  std::uint64_t genSeed = 1;
  bool genJson = false, genInfeasible = false;
  auto* gen = app.add_subcommand("generate", "write a random feasible instance");
  gen->add_option("-n", genN)->check(CLI::PositiveNumber);
  gen->add_option("-m", genM)->check(CLI::NonNegativeNumber);
  gen->add_option("--max-cost", genCost);
  gen->add_option("--seed", genSeed);
  gen->add_flag("--infeasible", genInfeasible);
  gen->add_flag("--json", genJson);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("circflow"));
  spdlog::set_level(spdlog::level::from_str(logLevel));

  try {
    if (*solve) {
      solveOpts.method = parseMethod(method);
      Problem p;
      try {
        p = readProblem(input);
      } catch (const std::exception& e) {
        RunReport r;
        r.status = "error";
        r.method = method;
        r.errorStage = "parse";
        r.error = e.what();
        if (asJson) std::cout << r.toJson().dump() << "\n";
        else std::cerr << "parse: " << e.what() << "\n";
        return 2;
      }
      RunReport r = runSolve(p, solveOpts);
      if (asJson) std::cout << r.toJson().dump() << "\n";
      else std::cout << r.table();
      return r.exitCode();
    }
    if (*benchCmd) {
      bench.solve.method = parseMethod(benchMethod);
      for (const auto& line : runBench(bench)) std::cout << line.dump() << "\n";
      return 0;
    }
    if (*gen) {
      Rng rng(genSeed);
      Problem p = randomFeasibleInstance(rng, genN, genM, genCost);
      if (genInfeasible) p = makeInfeasible(p, rng);
      std::cout << (genJson ? toJson(p).dump(1) + "\n" : writeDimacs(p));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
