#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cechred/cli.hpp"

namespace {

nlohmann::json read_problem(const std::string& path) {
  std::ifstream in;
  std::istream* src = &std::cin;
  if (path != "-") {
    in.open(path);
    if (!in) throw cechred::InputError("cli: cannot open " + path);
    src = &in;
  }
  try {
    return nlohmann::json::parse(*src);
  } catch (const nlohmann::json::exception& e) {
    throw cechred::InputError(std::string("cli: malformed JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cechred;
  CLI::App app{"Exact dimensionally reduced Cech cohomology of a finite nerve"};
  app.require_subcommand(0, 1);

  cli::Options opt;
  std::string path = "-";
  std::string modulus_text;
  bool emit_canonical = false;
  app.add_option("--degree", opt.degree, "Single degree k");
  app.add_option("--ring", opt.ring, "int, rat or modN (modN reads the modulus)");
  app.add_option("--modulus", modulus_text, "Modulus N for Z/N and Q/Z rows");
  app.add_flag("--json", opt.json_output, "Emit the report as canonical JSON");
  app.add_option("--seed", opt.seed, "Seed for randomized sweeps");
  app.add_option("--max-k", opt.max_k, "Largest degree examined");
  app.add_flag("--canonical", emit_canonical, "Print the canonical problem and exit");

  for (const auto& name : cli::commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("problem", path, "Problem JSON file ('-' for stdin)");
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }
  opt.command = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  try {
    if (!modulus_text.empty()) {
      if (modulus_text.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("cli: --modulus must be a positive integer");
      opt.modulus = Integer(modulus_text);
      if (*opt.modulus < 1) throw InputError("cli: --modulus must be a positive integer");
    }
    cli::Problem problem = cli::parse_problem(read_problem(path));
    if (emit_canonical) {
      std::cout << cli::canonical_json(problem).dump(2) << "\n";
      return 0;
    }
    nlohmann::json report = cli::run(problem, opt);
    std::cout << (opt.json_output ? report.dump(2) + "\n" : cli::human(report));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "elapsed_ms " << ms << "\n";
    if (opt.command == "verify-all" && !report["result"]["all_passed"].get<bool>()) return 2;
    return 0;
  } catch (const ModelViolation& e) {
    std::cerr << "model violation: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
