#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ordalloc/cli/problem.hpp"

namespace {

using ordalloc::cli::Json;

enum Exit { kOk = 0, kViolation = 1, kInputError = 2 };

std::string join(const Json& arr) {
  std::string out;
  for (const auto& v : arr) out += (out.empty() ? "" : " ") + (v.is_string() ? v.get<std::string>() : v.is_null() ? "-" : v.dump());
  return out;
}

void print_matrix(const Json& m, const std::string& indent = "  ") {
  for (const auto& row : m) std::cout << indent << join(row) << '\n';
}

void print_check(const Json& r) {
  std::cout << "ambiguously efficient:   " << (r["ambiguous"].get<bool>() ? "yes" : "no") << '\n';
  std::cout << "unambiguously efficient: " << (r["unambiguous"].get<bool>() ? "yes" : "no") << '\n';
  if (r.contains("certificate")) {
    std::cout << "shift:\n";
    print_matrix(r["certificate"]["shift"]);
    std::cout << "witness depths: " << join(r["certificate"]["witnesses"]) << '\n';
    std::cout << "utilities under which the shift is a Pareto improvement:\n";
    print_matrix(r["falsifying_utilities"]["utilities"]);
  }
  const auto& necessary = r["lemma_violations"];
  std::cout << "support-bound violations: " << necessary["support_bound"].size() << ", no-gap violations: " << necessary["no_gaps"].size() << '\n';
}

void print_run(const Json& r) {
  if (r.contains("trace")) {
    for (const auto& c : r["trace"]) {
      std::cout << "call " << c["call"] << ": supply " << join(c["supply"]);
      if (c.contains("terminal")) {
        std::cout << ", done\n";
        continue;
      }
      std::cout << ", " << c["directive"].get<std::string>() << '\n';
      for (const auto& [agent, lottery] : c["partial"].items()) {
        std::cout << "    " << agent << ":";
        for (const auto& [object, p] : lottery.items()) std::cout << ' ' << p.get<std::string>() << ' ' << object;
        std::cout << '\n';
      }
    }
  }
  std::cout << "allocation:\n";
  print_matrix(r["allocation"]);
  if (r.contains("decomposition")) {
    std::cout << "decomposition:\n";
    for (const auto& t : r["decomposition"]) {
      std::cout << "  " << t["weight"].get<std::string>() << " x";
      for (const auto& [agent, object] : t["assignment"].items()) std::cout << ' ' << agent << "->" << object.get<std::string>();
      std::cout << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random assignment under ordinal preferences: efficiency checks, mechanisms, axiom verification"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print machine-readable JSON");

  std::string file;
  auto* check = app.add_subcommand("check", "Decide ambiguous and unambiguous efficiency of the file's allocation");
  check->add_option("file", file, "Problem file")->required();

  bool with_bvn = false;
  auto* run = app.add_subcommand("run", "Run the file's mechanism on its preferences");
  run->add_option("file", file, "Problem file")->required();
  run->add_flag("--decompose", with_bvn, "Also print a Birkhoff-von Neumann decomposition");

  std::string mode = "exhaustive";
  std::uint64_t seed = 1;
  std::uint64_t trials = 10'000;
  std::vector<std::string> axioms;
  auto* verify = app.add_subcommand("verify", "Check mechanism axioms for the file's mechanism");
  verify->add_option("file", file, "Problem file (objects, optional agents, mechanism)")->required();
  verify->add_option("--mode", mode, "exhaustive or sampled")->check(CLI::IsMember({"exhaustive", "sampled"}));
  verify->add_option("--seed", seed, "Random seed for sampled mode");
  verify->add_option("--trials", trials, "Random instances per axiom in sampled mode");
  verify->add_option("--axioms", axioms, "Axioms to check (default: the five hierarchy properties)")->delimiter(',');

  std::size_t n = 0;
  std::string epsilon;
  auto* cost = app.add_subcommand("symmetry-cost", "Welfare agent 1 gains by trading away from the uniform allocation");
  cost->add_option("--n", n, "Number of agents")->required();
  cost->add_option("--epsilon", epsilon, "Utility parameter, as p/q")->required();

  auto* bvn = app.add_subcommand("decompose", "Birkhoff-von Neumann decomposition of the file's allocation");
  bvn->add_option("file", file, "Problem file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    int status = kOk;
    Json out;
    if (*check) {
      out = ordalloc::cli::check_report(ordalloc::cli::load_problem(file));
      if (!out["unambiguous"].get<bool>()) status = kViolation;
      if (!json) print_check(out);
    } else if (*run) {
      out = ordalloc::cli::run_report(ordalloc::cli::load_problem(file), with_bvn);
      if (!json) print_run(out);
    } else if (*verify) {
      const auto problem = ordalloc::cli::load_problem(file);
      if (!problem.mechanism) throw ordalloc::Error(ordalloc::Errc::ParseError, "mechanism: required for this command");
      const auto handle = ordalloc::cli::make_mechanism(*problem.mechanism, problem.agents.size());
      std::vector<ordalloc::Axiom> chosen;
      for (const auto& name : axioms) {
        auto a = ordalloc::axiom_from_string(name);
        if (!a) throw ordalloc::Error(ordalloc::Errc::ParseError, "--axioms: unknown axiom '" + name + "'");
        chosen.push_back(*a);
      }
      if (chosen.empty()) chosen = ordalloc::hierarchy_axioms();
      ordalloc::CheckOptions options;
      options.mode = mode == "sampled" ? ordalloc::CheckMode::Sampled : ordalloc::CheckMode::Exhaustive;
      options.seed = seed;
      options.trials = trials;
      out = Json::array();
      for (auto a : chosen) {
        const auto report = ordalloc::check_axiom(a, handle, options);
        if (!report.holds()) status = kViolation;
        out.push_back(ordalloc::cli::axiom_report_json(report, problem));
        if (!json) {
          std::cout << ordalloc::to_string(a) << ": " << ordalloc::to_string(report.verdict) << " (" << report.instances << " instances)\n";
          if (report.witness) std::cout << "  " << report.witness->detail << '\n';
        }
      }
    } else if (*cost) {
      out = ordalloc::cli::symmetry_cost_report(n, ordalloc::parse_rat(epsilon));
      if (!json) {
        std::cout << "exchange rates: " << join(out["rates"]) << '\n';
        std::cout << "agent 1 lottery: " << join(out["trader_lottery"]) << '\n';
        std::cout << "gain: " << out["gain"].get<std::string>() << " (limit " << out["limit"].get<std::string>() << ")\n";
      }
    } else if (*bvn) {
      out = ordalloc::cli::decompose_report(ordalloc::cli::load_problem(file));
      if (!json) print_run(Json{{"allocation", out["allocation"]}, {"decomposition", out["terms"]}});
    }
    if (json) std::cout << out.dump(2) << '\n';
    return status;
  } catch (const ordalloc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
}
