#include "tracelet/validate.hpp"

#include "tracelet/interp.hpp"
#include "tracelet/trace_json.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>
#include <set>
#include <sstream>

namespace tracelet {

using json = nlohmann::json;

std::vector<Int> sample_values(const ValidateOptions &opt) {
  if (opt.hi < opt.lo) throw Error("bad-argument", "empty range");
  Int size = opt.hi - opt.lo + 1;
  std::vector<Int> out;
  if (Int(opt.samples) >= size) {
    for (Int v = opt.lo; v <= opt.hi; ++v) out.push_back(v);
    return out;
  }
  if (size > Int(std::numeric_limits<std::uint64_t>::max()))
    throw Error("bad-argument", "range too large for sampling");
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::uint64_t> dist(0, static_cast<std::uint64_t>(size - 1));
  std::set<std::uint64_t> picked;
  while (picked.size() < opt.samples) picked.insert(dist(rng));
  for (auto k : picked) out.push_back(opt.lo + Int(k));
  return out;
}

Trace call_trace(const LookupTable &g, const std::string &m, const Int &n, std::uint64_t fuel) {
  Fuel f(fuel);
  Trace t = run_stmt(call_stmt(var("x"), m, lit(n)), singleton(State{{"x", Int(0)}}), g, f);
  t.pop_back();
  return t;
}

FormulaPtr validation_formula(const ContractAssumption &c, const Int &n) {
  return f_chop(instantiate(c, lit(n), lit(0)),
                pred(binary(Op::Eq, res(lit(0)), f_at(c, lit(n)))));
}

namespace {

SampleVerdict run_sample(const LookupTable &g, const ContractAssumption &c, const Int &n,
                         const ValidateOptions &opt) {
  SampleVerdict v;
  v.n = n;
  v.seed = opt.seed;
  Trace t;
  try {
    Fuel f(opt.fuel);
    t = run_stmt(call_stmt(var("x"), c.proc, lit(n)), singleton(State{{"x", Int(0)}}), g, f);
  } catch (const Error &e) {
    v.verdict = e.kind() == "fuel-exhausted" ? "fuel-exhausted" : "error";
    v.detail = e.what();
    return v;
  }
  if (!opt.trace_dir.empty()) {
    std::filesystem::create_directories(opt.trace_dir);
    v.trace_file = (std::filesystem::path(opt.trace_dir) /
                    (c.proc + "_n" + int_to_string(n) + ".trace.json"))
                       .string();
    write_trace_file(v.trace_file, t);
  }
  Int expected = eval(f_at(c, lit(n)), [](const std::string &) { return std::nullopt; });
  Int got = last_state(t).at("x");
  Trace core = t;
  core.pop_back();
  FormulaPtr phi = validation_formula(c, n);
  if (!member(core, phi, {})) {
    v.verdict = "non-member";
    v.detail = explain_failure(core, phi, {});
    return v;
  }
  if (got != expected) {
    v.verdict = "wrong-result";
    v.detail = "x = " + int_to_string(got) + ", expected " + int_to_string(expected);
    return v;
  }
  v.verdict = "member";
  v.pass = true;
  return v;
}

}  // namespace

ValidationReport validate_contract(const LookupTable &g, const ContractAssumption &c,
                                   const ValidateOptions &opt, const std::string &program_name) {
  lookup(c.proc, g);
  ValidationReport r;
  r.contract = c.proc;
  r.program = program_name;
  r.seed = opt.seed;
  r.lo = opt.lo;
  r.hi = opt.hi;
  auto none = [](const std::string &) -> std::optional<Int> { return std::nullopt; };
  for (const Int &n : sample_values(opt)) {
    auto pre = try_eval(pre_at(c, lit(n)), none);
    if (!pre || *pre == 0) {
      r.flagged.push_back(n);
      continue;
    }
    SampleVerdict v = run_sample(g, c, n, opt);
    if (!v.pass && !r.counterexample) r.counterexample = v;
    r.samples.push_back(std::move(v));
  }
  r.vacuous = r.samples.empty();
  r.pass = !r.counterexample;
  return r;
}

std::string report_to_json(const ValidationReport &r, int indent) {
  json samples = json::array();
  for (const auto &s : r.samples) {
    json j{{"n", int_to_string(s.n)}, {"seed", s.seed}, {"verdict", s.verdict}};
    j["trace"] = s.trace_file.empty() ? json(nullptr) : json(s.trace_file);
    if (!s.detail.empty()) j["detail"] = s.detail;
    samples.push_back(j);
  }
  json flagged = json::array();
  for (const auto &n : r.flagged) flagged.push_back(int_to_string(n));
  json j{{"contract", r.contract},
         {"program", r.program},
         {"seed", r.seed},
         {"range", int_to_string(r.lo) + ".." + int_to_string(r.hi)},
         {"samples", samples},
         {"flagged", flagged},
         {"vacuous", r.vacuous},
         {"overall", r.pass ? "pass" : "fail"}};
  if (r.counterexample) {
    const auto &c = *r.counterexample;
    j["counterexample"] = {{"program", r.program},
                           {"n", int_to_string(c.n)},
                           {"seed", c.seed},
                           {"verdict", c.verdict},
                           {"detail", c.detail}};
  }
  return j.dump(indent);
}

std::string report_to_text(const ValidationReport &r) {
  std::ostringstream out;
  for (const auto &s : r.samples)
    out << r.contract << "(" << int_to_string(s.n) << "): " << s.verdict << "\n";
  if (!r.flagged.empty()) out << r.flagged.size() << " sampled value(s) outside pre, skipped\n";
  if (r.vacuous) out << "no sampled value satisfies pre; vacuous pass\n";
  if (r.counterexample) {
    const auto &c = *r.counterexample;
    out << "FAIL: counterexample n=" << int_to_string(c.n) << " seed=" << c.seed << " ("
        << c.verdict << ")";
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  } else {
    out << "PASS: " << r.samples.size() << " sample(s)\n";
  }
  return out.str();
}

namespace {

void res_indices(const ExprPtr &e, std::vector<ExprPtr> &out) {
  if (!e) return;
  if (e->kind == ExprKind::Res) out.push_back(e->a);
  res_indices(e->a, out);
  res_indices(e->b, out);
}

void formula_exprs(const FormulaPtr &f, std::vector<ExprPtr> &out) {
  if (!f) return;
  if (f->pred) out.push_back(f->pred);
  for (const auto &a : f->args) out.push_back(a);
  if (f->e) out.push_back(f->e);
  if (f->id) out.push_back(f->id);
  if (f->mu && !f->mu->psi) formula_exprs(f->mu->body, out);
  formula_exprs(f->a, out);
  formula_exprs(f->b, out);
}

void assigned_atom(const UpdateAtom &a, std::set<std::string> &out) {
  if ((a.kind == AtomKind::Elem || a.kind == AtomKind::Call) && a.lhs && a.lhs->kind == ExprKind::Var)
    out.insert(a.lhs->name);
}

void assigned_stmt(const StmtPtr &s, std::set<std::string> &out) {
  if (!s) return;
  if (s->lhs && s->lhs->kind == ExprKind::Var) out.insert(s->lhs->name);
  if (s->kind == StmtKind::Update) assigned_atom(s->atom, out);
  out.insert(s->decls.begin(), s->decls.end());
  assigned_stmt(s->a, out);
  assigned_stmt(s->b, out);
}

}  // namespace

SequentSampling sample_sequent(const Sequent &s, const ProofContext &ctx, std::uint64_t seed,
                               std::size_t samples, std::uint64_t fuel) {
  SequentSampling out;
  if (s.goal.kind == GoalKind::Contract) return out;
  std::set<std::string> syms = symbols(s);
  std::set<std::string> phi_vars;
  std::vector<ExprPtr> exprs = s.facts;
  if (s.goal.kind == GoalKind::Pred) {
    exprs.push_back(s.goal.pred);
  } else {
    free_vars(s.goal.judgment.phi, phi_vars);
    std::set<std::string> assigned;
    for (const auto &a : s.goal.judgment.update) assigned_atom(a, assigned);
    assigned_stmt(s.goal.judgment.stmt, assigned);
    for (const auto &x : assigned) phi_vars.erase(x);
    formula_exprs(s.goal.judgment.phi, exprs);
  }
  std::vector<ExprPtr> indices;
  for (const auto &e : exprs) res_indices(e, indices);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-2, 6);
  for (std::size_t k = 0; k < samples; ++k) {
    State s0;
    for (const auto &x : syms) s0[x] = dist(rng);
    auto lookup_s0 = state_lookup(s0);
    for (const auto &idx : indices)
      if (auto v = try_eval(idx, lookup_s0)) s0.emplace(res_name(*v), Int(dist(rng)));
    LogicalEnv all(s0.begin(), s0.end());
    bool sat = true;
    for (const auto &f : s.facts) {
      auto v = try_eval_pred(s0, all, f);
      if (!v || !*v) sat = false;
    }
    if (!sat) {
      ++out.skipped;
      continue;
    }
    if (s.goal.kind == GoalKind::Pred) {
      auto v = try_eval_pred(s0, all, s.goal.pred);
      if (!v) {
        ++out.skipped;
        continue;
      }
      ++out.checked;
      if (!*v) {
        out.failure = "goal false at " + to_string(s0);
        return out;
      }
      continue;
    }
    const Judgment &j = s.goal.judgment;
    LogicalEnv beta;
    for (const auto &x : phi_vars) beta[x] = s0[x];
    Trace t;
    try {
      t = run_judgment_program(j.update, j.stmt, s0, ctx.procs, fuel);
    } catch (const Error &) {
      ++out.skipped;
      continue;
    }
    ++out.checked;
    bool in;
    try {
      in = member(t, j.phi, beta);
    } catch (const Error &e) {
      out.failure = std::string("membership error: ") + e.what();
      return out;
    }
    if (!in) {
      out.failure = "trace from " + to_string(s0) + " is not in the goal formula: " +
                    explain_failure(t, j.phi, beta);
      return out;
    }
  }
  return out;
}

namespace {

bool walk(const ProofNode &n, const ProofContext &ctx, std::uint64_t seed, std::size_t samples,
          std::vector<std::size_t> &path, TreeSampling &out) {
  ++out.nodes;
  auto r = sample_sequent(n.sequent, ctx, seed + out.nodes, samples);
  out.checked += r.checked;
  if (r.failure) {
    out.failing_path = path;
    out.failure = *r.failure;
    return false;
  }
  for (std::size_t k = 0; k < n.children.size(); ++k) {
    path.push_back(k);
    bool ok = walk(n.children[k], ctx, seed, samples, path, out);
    path.pop_back();
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TreeSampling sample_tree(const ProofNode &root, const ProofContext &ctx, std::uint64_t seed,
                         std::size_t samples_per_node) {
  TreeSampling out;
  std::vector<std::size_t> path;
  walk(root, ctx, seed, samples_per_node, path, out);
  return out;
}

}  // namespace tracelet
