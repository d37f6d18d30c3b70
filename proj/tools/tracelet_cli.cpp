#include "tracelet/contract.hpp"
#include "tracelet/interp.hpp"
#include "tracelet/proof_io.hpp"
#include "tracelet/trace_json.hpp"
#include "tracelet/validate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace tracelet;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFuel = 2;
constexpr int kRejected = 3;
constexpr int kOpen = 4;

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string replace_ext(const std::string &path, const std::string &ext) {
  std::filesystem::path p(path);
  return p.replace_extension().string() + ext;
}

/// Parses `name=value` bindings.
std::map<std::string, Int> parse_bindings(const std::vector<std::string> &items) {
  std::map<std::string, Int> out;
  for (const auto &b : items) {
    auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("bad-argument", "expected name=value, got '" + b + "'");
    std::string value = b.substr(eq + 1);
    try {
      out[b.substr(0, eq)] = Int(value);
    } catch (const std::exception &) {
      throw Error("bad-argument", "not an integer: '" + value + "'");
    }
  }
  return out;
}

std::uint64_t fuel_of(std::uint64_t flag) { return flag ? flag : default_fuel(); }

const ContractAssumption &pick_contract(const ProofContext &ctx, const std::string &proc) {
  if (ctx.contracts.empty()) throw Error("contract-shape", "no contract in file");
  if (proc.empty()) return ctx.contracts.front();
  if (const ContractAssumption *c = ctx.contract(proc)) return *c;
  throw Error("unknown-procedure", "no contract for '" + proc + "'");
}

void print_goals(const ProofNode &root, std::ostream &out) {
  auto goals = open_goals(root);
  if (goals.empty()) {
    out << "no open goals\n";
    return;
  }
  for (std::size_t k = 0; k < goals.size(); ++k) {
    out << "[" << k << "] " << to_string(goals[k]->sequent) << "\n";
    if (!goals[k]->note.empty()) out << "    " << goals[k]->note << "\n";
  }
}

struct RunOpts {
  std::string program, out;
  std::vector<std::string> state;
  std::uint64_t fuel = 0;
};

int cmd_run(const RunOpts &o) {
  Program p = parse_program(read_file(o.program));
  auto diags = well_formed(p);
  for (const auto &d : diags)
    std::cerr << o.program << ":" << d.pos.line << ":" << d.pos.col << ": " << d.kind << ": " << d.message << "\n";
  if (!diags.empty()) return kError;
  auto bindings = parse_bindings(o.state);
  RunResult r = run(p, State(bindings.begin(), bindings.end()), fuel_of(o.fuel));
  if (r.exhausted) {
    std::cerr << "fuel exhausted: " << r.message << "\n";
    return kFuel;
  }
  std::string out = o.out.empty() ? replace_ext(o.program, ".trace.json") : o.out;
  if (out == "-")
    std::cout << trace_to_json(r.trace) << "\n";
  else
    write_trace_file(out, r.trace);
  std::cerr << to_string(r.trace) << "\n";
  return kOk;
}

struct AdequacyOpts {
  std::string trace;
  bool lenient = false;
};

int cmd_adequacy(const AdequacyOpts &o) {
  AdequacyVerdict v = is_adequate(read_trace_file(o.trace), o.lenient);
  if (v.adequate) {
    std::cout << "adequate\n";
    return kOk;
  }
  std::cout << "inadequate: clause " << v.clause << " at entry " << v.position << ": " << v.reason << "\n";
  return kRejected;
}

struct CheckOpts {
  std::string trace, formula, contract;
  std::vector<std::string> bind;
};

FormulaPtr formula_from_file(const std::string &text, const std::string &name) {
  if (text.find("contract") == std::string::npos) return parse_formula(text);
  auto defs = parse_contract_file(text);
  for (const auto &d : defs)
    if (name.empty() || d.name == name) return d.body;
  throw Error("unknown-procedure", "no contract named '" + name + "'");
}

int cmd_check(const CheckOpts &o) {
  Trace t = read_trace_file(o.trace);
  FormulaPtr f = formula_from_file(read_file(o.formula), o.contract);
  auto b = parse_bindings(o.bind);
  LogicalEnv beta(b.begin(), b.end());
  std::set<std::string> free;
  free_vars(f, free);
  std::set<std::string> program_vars;
  for (const auto &e : t)
    if (is_state(e))
      for (const auto &kv : state_of(e)) program_vars.insert(kv.first);
  for (const auto &x : free)
    if (!beta.count(x) && !program_vars.count(x))
      throw Error("unbound-symbol", "no binding for logical variable '" + x + "'");
  if (member(t, f, beta)) {
    std::cout << "member\n";
    return kOk;
  }
  std::cout << "non-member: " << explain_failure(t, f, beta) << "\n";
  return kRejected;
}

struct GenOpts {
  std::string proc, pre_base, pre_step, f, step;
  bool big_step = false;
};

int cmd_gen_contract(const GenOpts &o) {
  ContractSpec spec{o.proc, parse_expr(o.pre_base), parse_expr(o.pre_step), parse_expr(o.f),
                    parse_expr(o.step)};
  if (o.big_step)
    std::cout << "contract " << o.proc << "(n, i) := " << to_string(big_step_of(spec)) << "\n";
  else
    std::cout << to_string(contract_def(spec)) << "\n";
  return kOk;
}

struct ProveOpts {
  std::string program, contracts, proc, script, out;
  bool automatic = false, repl = false, extensions = false;
};

int run_repl(ProofNode &root, const ProofContext &ctx) {
  std::string line;
  print_goals(root, std::cout);
  std::cout << "> " << std::flush;
  while (!open_goals(root).empty() && std::getline(std::cin, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      std::cout << "> " << std::flush;
      continue;
    }
    if (line == "quit" || line == "abort") break;
    if (line == "rules") {
      for (const auto &r : rule_names(ctx.extensions)) std::cout << r << "\n";
    } else if (line != "goals") {
      try {
        apply_step(root, parse_script_line(line), ctx);
      } catch (const Error &e) {
        std::cout << "error (" << e.kind() << "): " << e.what() << "\n";
      }
    }
    print_goals(root, std::cout);
    if (!open_goals(root).empty()) std::cout << "> " << std::flush;
  }
  return 0;
}

int cmd_prove(const ProveOpts &o) {
  ProofDocument doc;
  doc.program = read_file(o.program);
  doc.contracts = read_file(o.contracts);
  doc.extensions = o.extensions;
  ProofContext ctx = make_context(doc.program, doc.contracts, doc.extensions);
  const ContractAssumption &c = pick_contract(ctx, o.proc);
  doc.claim = "|- C(" + c.proc + ")";
  doc.root = ProofNode{parse_sequent(doc.claim), "", {}, {}, ""};
  std::string out = o.out.empty() ? replace_ext(o.contracts, ".proof.json") : o.out;
  int status = kOk;
  if (!o.script.empty()) {
    for (const auto &step : parse_script(read_file(o.script))) {
      try {
        apply_step(doc.root, step, ctx);
      } catch (const Error &e) {
        std::cerr << "script line " << step.line << ": " << step.rule << " failed (" << e.kind()
                  << "): " << e.what() << "\n";
        print_goals(doc.root, std::cerr);
        write_proof_file(out, doc);
        return kError;
      }
    }
  }
  if (o.automatic) auto_expand(doc.root, ctx);
  if (o.repl) run_repl(doc.root, ctx);
  write_proof_file(out, doc);
  auto rules = rule_multiset(doc.root);
  std::size_t steps = 0;
  for (const auto &[r, n] : rules) steps += n;
  if (is_closed(doc.root)) {
    std::cout << "closed: " << steps << " rule application(s), proof written to " << out << "\n";
  } else {
    std::cout << "open goals:\n";
    print_goals(doc.root, std::cout);
    status = kOpen;
  }
  return status;
}

int cmd_check_proof(const std::string &path) {
  ProofDocument doc;
  try {
    doc = read_proof_file(path);
  } catch (const Error &e) {
    if (e.kind() != "bad-proof") throw;
    std::cout << "invalid: " << e.what() << "\n";
    return kRejected;
  }
  CheckResult r = check_proof(doc);
  if (!r.valid) {
    std::cout << "invalid: first invalid step at " << path_string(r.path) << ": " << r.reason << "\n";
    return kRejected;
  }
  if (!r.closed) {
    std::cout << "valid but not closed: " << r.reason << "\n";
    return kRejected;
  }
  std::cout << "valid: closed proof of " << doc.claim << "\n";
  return kOk;
}

struct ValidateCli {
  std::string program, contracts, proc, range = "0..25", trace_dir;
  std::size_t samples = 26;
  std::uint64_t seed = 0, fuel = 0;
  bool no_proof = false, json = false;
};

int cmd_validate(const ValidateCli &o) {
  ValidateOptions opt;
  opt.samples = o.samples;
  opt.seed = o.seed;
  opt.fuel = fuel_of(o.fuel);
  opt.trace_dir = o.trace_dir;
  auto dots = o.range.find("..");
  if (dots == std::string::npos) throw Error("bad-argument", "range must be lo..hi");
  try {
    opt.lo = Int(o.range.substr(0, dots));
    opt.hi = Int(o.range.substr(dots + 2));
  } catch (const std::exception &) {
    throw Error("bad-argument", "range must be lo..hi");
  }
  std::string program = read_file(o.program);
  ProofContext ctx = make_context(program, read_file(o.contracts), false);
  const ContractAssumption &c = pick_contract(ctx, o.proc);
  ValidationReport r = validate_contract(ctx.procs, c, opt, o.program);
  std::cout << (o.json ? report_to_json(r) + "\n" : report_to_text(r));
  if (!r.pass) return kRejected;
  if (!o.no_proof) {
    ProofNode proof = prove_auto(parse_sequent("|- C(" + c.proc + ")"), ctx);
    if (!is_closed(proof)) {
      std::cerr << "no closed proof of C(" << c.proc << "); pass --no-proof for a semantic check only\n";
      return kError;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"tracelet: trace contracts for recursive procedures"};
  app.require_subcommand(1);

  RunOpts run_o;
  auto *run_cmd = app.add_subcommand("run", "Run a program and write its trace");
  run_cmd->add_option("program", run_o.program, "Program file (.tcp)")->required();
  run_cmd->add_option("--state", run_o.state, "Initial binding name=value")->take_all();
  run_cmd->add_option("--fuel", run_o.fuel, "Step budget (default: TRACELET_FUEL or 10^6)");
  run_cmd->add_option("-o,--out", run_o.out, "Trace file; '-' prints to stdout");

  AdequacyOpts adq_o;
  auto *adq_cmd = app.add_subcommand("adequacy", "Check trace adequacy");
  adq_cmd->add_option("trace", adq_o.trace, "Trace file (.trace.json)")->required();
  adq_cmd->add_flag("--lenient", adq_o.lenient, "Check only the literal clauses");

  CheckOpts chk_o;
  auto *chk_cmd = app.add_subcommand("check", "Check trace membership in a formula");
  chk_cmd->add_option("trace", chk_o.trace, "Trace file (.trace.json)")->required();
  chk_cmd->add_option("formula", chk_o.formula, "Formula or contract file (.tcf)")->required();
  chk_cmd->add_option("--bind", chk_o.bind, "Logical binding name=value")->take_all();
  chk_cmd->add_option("--contract", chk_o.contract, "Contract name in the file");

  GenOpts gen_o;
  auto *gen_cmd = app.add_subcommand("gen-contract", "Print a recursive trace contract");
  gen_cmd->add_option("--proc", gen_o.proc, "Procedure name")->required();
  gen_cmd->add_option("--pre-base", gen_o.pre_base, "Base case precondition over n")->required();
  gen_cmd->add_option("--pre-step", gen_o.pre_step, "Recursive case precondition over n")->required();
  gen_cmd->add_option("--f", gen_o.f, "Result function over n")->required();
  gen_cmd->add_option("--step", gen_o.step, "Argument of the recursive call over n")->required();
  gen_cmd->add_flag("--big-step", gen_o.big_step, "Print the state-based weakening instead");

  ProveOpts prv_o;
  auto *prv_cmd = app.add_subcommand("prove", "Prove a procedure contract");
  prv_cmd->add_option("program", prv_o.program, "Program file (.tcp)")->required();
  prv_cmd->add_option("contracts", prv_o.contracts, "Contract file (.tcf)")->required();
  prv_cmd->add_option("--proc", prv_o.proc, "Procedure (default: first contract)");
  prv_cmd->add_option("--script", prv_o.script, "Proof script (.tps)");
  prv_cmd->add_flag("--auto", prv_o.automatic, "Run the automatic strategy");
  prv_cmd->add_flag("--repl", prv_o.repl, "Interactive rule application on stdin");
  prv_cmd->add_flag("--extensions", prv_o.extensions, "Enable the extension rules");
  prv_cmd->add_option("-o,--out", prv_o.out, "Proof file (.proof.json)");

  std::string proof_path;
  auto *cp_cmd = app.add_subcommand("check-proof", "Replay and check a proof file");
  cp_cmd->add_option("proof", proof_path, "Proof file (.proof.json)")->required();

  ValidateCli val_o;
  auto *val_cmd = app.add_subcommand("validate", "Differentially validate a contract");
  val_cmd->add_option("program", val_o.program, "Program file (.tcp)")->required();
  val_cmd->add_option("contracts", val_o.contracts, "Contract file (.tcf)")->required();
  val_cmd->add_option("--proc", val_o.proc, "Procedure (default: first contract)");
  val_cmd->add_option("--samples", val_o.samples, "Number of sampled n values");
  val_cmd->add_option("--seed", val_o.seed, "Sampling seed");
  val_cmd->add_option("--range", val_o.range, "Sampling range lo..hi");
  val_cmd->add_option("--fuel", val_o.fuel, "Step budget per run");
  val_cmd->add_option("--trace-dir", val_o.trace_dir, "Write per-sample traces here");
  val_cmd->add_flag("--no-proof", val_o.no_proof, "Skip the closed-proof requirement");
  val_cmd->add_flag("--json", val_o.json, "Print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run_cmd) return cmd_run(run_o);
    if (*adq_cmd) return cmd_adequacy(adq_o);
    if (*chk_cmd) return cmd_check(chk_o);
    if (*gen_cmd) return cmd_gen_contract(gen_o);
    if (*prv_cmd) {
      if (!prv_o.automatic && !prv_o.repl && prv_o.script.empty())
        throw Error("bad-argument", "one of --auto, --script or --repl is required");
      return cmd_prove(prv_o);
    }
    if (*cp_cmd) return cmd_check_proof(proof_path);
    if (*val_cmd) return cmd_validate(val_o);
  } catch (const Error &e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return kError;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
