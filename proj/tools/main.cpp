// illbes: command-line front end for the intuitionistic linear logic toolkit.
//
// Exit codes: 0 = success / judgement holds, 1 = not-found / judgement fails
// or a derivation fails its check, 2 = usage or input error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "illbes/girard.hpp"
#include "illbes/json_io.hpp"
#include "illbes/parse.hpp"
#include "illbes/prove.hpp"
#include "illbes/semantics.hpp"
#include "illbes/simulation.hpp"

using namespace illbes;

namespace {

struct Options {
  std::string sequent;
  std::string formula;
  std::string base_file;
  std::string universe_file;
  std::string out_file;
  std::string input_file;
  std::string lemmas = "all";
  std::size_t depth = 8;
  bool json = false;
};

void emit(const Options& opt, const std::string& text) {
  if (!opt.out_file.empty())
    write_file_atomic(opt.out_file, text + "\n");
  else
    std::cout << text << "\n";
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("ILLBES_THREADS")) {
    long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

int run_parse(const Options& opt) {
  Formula f = parse_formula(opt.formula);
  emit(opt, opt.json ? to_json(f).dump() : f.text());
  return 0;
}

int run_check_nill(const Options& opt) {
  NILLDerivation d = nill_derivation_from_json(read_json_file(opt.input_file));
  try {
    Sequent end = check_nill(d);
    emit(opt, opt.json ? to_json(end).dump() : end.text());
    return 0;
  } catch (const CheckError& e) {
    std::cerr << "invalid derivation: " << e.what() << "\n";
    return 1;
  }
}

int run_check_atomic(const Options& opt) {
  Base b = load_base(opt.base_file);
  AtomicDerivation d = atomic_derivation_from_json(read_json_file(opt.input_file), b);
  try {
    AtomicJudgement end = check_atomic(b, d);
    emit(opt, end.text());
    return 0;
  } catch (const CheckError& e) {
    std::cerr << "invalid derivation: " << e.what() << "\n";
    return 1;
  }
}

int run_prove(const Options& opt) {
  Sequent s = parse_sequent(opt.sequent);
  auto d = prove_nill(s, opt.depth);
  if (!d) {
    emit(opt, Json{{"status", "not-found"}, {"sequent", to_json(s)}}.dump());
    return 1;
  }
  emit(opt,
       Json{{"status", "proved"}, {"sequent", to_json(s)}, {"derivation", to_json(*d)}}.dump());
  return 0;
}

int run_derive(const Options& opt) {
  Base b = load_base(opt.base_file);
  auto [ctx, goal] = parse_atomic_sequent(opt.sequent);
  auto d = derive(b, ctx, goal, opt.depth);
  if (!d) {
    emit(opt, Json{{"status", "not-found"}}.dump());
    return 1;
  }
  emit(opt, Json{{"status", "derived"}, {"derivation", to_json(*d, b)}}.dump());
  return 0;
}

int run_flatten(const Options& opt) {
  Sequent s = parse_sequent(opt.sequent);
  std::set<Formula> xi = subformula_closure(s);
  FlatteningMap m = FlatteningMap::over(xi);
  Json table = Json::array();
  for (const Formula& f : xi)
    table.push_back(Json{{"formula", f.text()}, {"atom", m.flatten(f).text()}});
  emit(opt, Json{{"map", std::move(table)}}.dump(2));
  return 0;
}

int run_sim_base(const Options& opt) {
  SimulationBase nb = simulation_base_for(parse_sequent(opt.sequent));
  emit(opt, to_json(nb.base).dump(2));
  return 0;
}

int run_validate(const Options& opt) {
  Sequent s = parse_sequent(opt.sequent);
  auto d = check_validity(s, opt.depth);
  if (!d) {
    emit(opt, Json{{"status", "not-found"}, {"sequent", to_json(s)}}.dump());
    return 1;
  }
  emit(opt,
       Json{{"status", "valid"}, {"sequent", to_json(s)}, {"derivation", to_json(*d)}}.dump());
  return 0;
}

int run_support(const Options& opt) {
  BoundedUniverse u = universe_from_json(read_json_file(opt.universe_file));
  Base b;
  if (!opt.base_file.empty()) b = load_base(opt.base_file);
  Sequent s = parse_sequent(opt.sequent);
  SupportEvaluator ev(u);
  bool ok = ev.supports_sequent(ev.mask_of(b), {}, s.context, s.conclusion, SequentMode::Inf);
  emit(opt, Json{{"status", ok ? "supported" : "unsupported"}, {"sequent", to_json(s)}}.dump());
  return ok ? 0 : 1;
}

int run_suite(const Options& opt) {
  BoundedUniverse u = universe_from_json(read_json_file(opt.universe_file));
  std::vector<std::string> which;
  std::string cur;
  for (char c : opt.lemmas) {
    if (c == ',') {
      if (!cur.empty()) which.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) which.push_back(cur);
  auto reports = run_lemma_checks(u, which, 3, thread_cap());
  std::string out;
  bool all_ok = true;
  for (const LemmaReport& r : reports) {
    out += to_json(r).dump() + "\n";
    all_ok = all_ok && r.passed();
  }
  if (!out.empty()) out.pop_back();
  emit(opt, out);
  return all_ok ? 0 : 1;
}

int run_translate(const Options& opt) {
  Formula f = girard_translate(parse_ipl_formula(opt.formula));
  emit(opt, opt.json ? to_json(f).dump() : f.text());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"intuitionistic linear logic: proof kernel, atomic bases, bounded semantics"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_sequent = false, bool needs_formula = false) {
    if (needs_sequent)
      sub->add_option("--sequent", opt.sequent, "sequent, e.g. \"!a |- a * a\"")->required();
    if (needs_formula) sub->add_option("--formula", opt.formula, "formula text")->required();
    sub->add_option("--depth", opt.depth, "search depth bound (default 8)");
    sub->add_flag("--json", opt.json, "JSON output where text is the default");
    sub->add_option("--out", opt.out_file, "write output to a file (atomically)");
  };

  auto* parse_cmd = app.add_subcommand("parse", "parse a formula and print it canonically");
  add_common(parse_cmd, false, true);

  auto* check_nill_cmd =
      app.add_subcommand("check-nill", "check a derivation file against the kernel rules");
  check_nill_cmd->add_option("file", opt.input_file, "derivation JSON")->required();
  add_common(check_nill_cmd);

  auto* check_atomic_cmd =
      app.add_subcommand("check-atomic", "check an atomic derivation file against a base");
  check_atomic_cmd->add_option("file", opt.input_file, "derivation JSON")->required();
  check_atomic_cmd->add_option("--base", opt.base_file, "base JSON file")->required();
  add_common(check_atomic_cmd);

  auto* prove_cmd = app.add_subcommand("prove", "bounded backward proof search");
  add_common(prove_cmd, true);

  auto* derive_cmd = app.add_subcommand("derive", "bounded atomic search over a base");
  derive_cmd->add_option("--base", opt.base_file, "base JSON file")->required();
  add_common(derive_cmd, true);

  auto* flatten_cmd =
      app.add_subcommand("flatten", "print the flattening map of a sequent's closure");
  add_common(flatten_cmd, true);

  auto* sim_base_cmd = app.add_subcommand("sim-base", "emit the simulation base for a sequent");
  add_common(sim_base_cmd, true);

  auto* validate_cmd = app.add_subcommand(
      "validate", "search the simulation base and return a kernel-checked proof");
  add_common(validate_cmd, true);

  auto* support_cmd =
      app.add_subcommand("support", "evaluate bounded support for a sequent over a universe");
  support_cmd->add_option("--universe", opt.universe_file, "universe JSON file")->required();
  support_cmd->add_option("--base", opt.base_file, "base inside the universe (default empty)");
  add_common(support_cmd, true);

  auto* suite_cmd = app.add_subcommand("suite", "run the bounded lemma checks over a universe");
  suite_cmd->add_option("--universe", opt.universe_file, "universe JSON file")->required();
  suite_cmd->add_option("--lemmas", opt.lemmas, "comma-separated lemma names or 'all'");
  add_common(suite_cmd);

  auto* translate_cmd =
      app.add_subcommand("translate", "translate an intuitionistic formula into linear logic");
  add_common(translate_cmd, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (parse_cmd->parsed()) return run_parse(opt);
    if (check_nill_cmd->parsed()) return run_check_nill(opt);
    if (check_atomic_cmd->parsed()) return run_check_atomic(opt);
    if (prove_cmd->parsed()) return run_prove(opt);
    if (derive_cmd->parsed()) return run_derive(opt);
    if (flatten_cmd->parsed()) return run_flatten(opt);
    if (sim_base_cmd->parsed()) return run_sim_base(opt);
    if (validate_cmd->parsed()) return run_validate(opt);
    if (support_cmd->parsed()) return run_support(opt);
    if (suite_cmd->parsed()) return run_suite(opt);
    if (translate_cmd->parsed()) return run_translate(opt);
  } catch (const ParseError& e) {
    std::cerr << "parse error at position " << e.position << ": " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const CheckError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
