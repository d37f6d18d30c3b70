#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/oracles.hpp"
#include "tracelet/fo.hpp"
#include "tracelet/proof_io.hpp"
#include "tracelet/prover.hpp"
#include "tracelet/rules.hpp"
#include "tracelet/update.hpp"
#include "tracelet/validate.hpp"

using namespace tracelet;

namespace {

std::string error_kind(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  return "";
}

ProofContext running_ctx(bool extensions = false) {
  return make_context(oracle::read_fixture("running.tcp"), oracle::read_fixture("contract_m.tcf"), extensions);
}

ProofNode goal(const std::string &text) {
  ProofNode n;
  n.sequent = parse_sequent(text);
  return n;
}

std::vector<std::string> premises(const std::string &rule, const std::string &sequent, const ProofContext &ctx,
                                  RuleArgs args = {}) {
  std::vector<std::string> out;
  for (const auto &s : apply_rule(rule, parse_sequent(sequent), args, ctx)) out.push_back(to_string(s));
  return out;
}

std::vector<ExprPtr> exprs(std::initializer_list<const char *> texts) {
  std::vector<ExprPtr> out;
  for (const char *t : texts) out.push_back(parse_expr(t));
  return out;
}

const ProofNode &auto_proof() {
  static const ProofNode root = prove_auto(parse_sequent("|- C(m)"), running_ctx());
  return root;
}

}  // namespace

TEST_CASE("first-order examples") {
  CHECK(fo_valid(exprs({"n' > 0"}), parse_expr("n' >= 0")));
  CHECK(!oracle::fo_counterexample(exprs({"n' > 0"}), parse_expr("n' >= 0"), -10, 10));
  CHECK(fo_valid(exprs({"x + 2 * y <= 3"}), parse_expr("x + 2 * y <= 3")));
  FoResult r = fo_check(exprs({"n' > 0"}), parse_expr("n' > 1"));
  CHECK(r.verdict == FoVerdict::Invalid);
  CHECK(r.model.at("n'") == 1);
  auto cex = oracle::fo_counterexample(exprs({"n' > 0"}), parse_expr("n' > 1"), -10, 10);
  REQUIRE(cex);
  CHECK(cex->at("n'") == 1);
}

TEST_CASE("first-order decisions agree with exhaustive search") {
  std::mt19937_64 rng(43);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char *ops[] = {"==", "!=", "<", "<=", ">", ">="};
  auto atom = [&] {
    return std::to_string(uni(-2, 2)) + " * a + " + std::to_string(uni(-2, 2)) + " * b " + ops[uni(0, 5)] + " " +
           std::to_string(uni(-3, 3));
  };
  int valid = 0, invalid = 0;
  for (int k = 0; k < 400; ++k) {
    std::vector<ExprPtr> gamma;
    for (int g = uni(0, 2); g > 0; --g) gamma.push_back(parse_expr(atom()));
    ExprPtr target = parse_expr(uni(0, 1) ? atom() : atom() + " || " + atom());
    CAPTURE(k);
    FoResult r = fo_check(gamma, target);
    auto cex = oracle::fo_counterexample(gamma, target, -8, 8);
    CAPTURE(to_string(target));
    if (r.verdict == FoVerdict::Valid) {
      ++valid;
      CHECK(!cex);
    } else if (r.verdict == FoVerdict::Invalid) {
      ++invalid;
      auto look = [&](const std::string &x) -> std::optional<Int> {
        auto it = r.model.find(x);
        if (it == r.model.end()) return Int(0);
        return it->second;
      };
      for (const auto &g : gamma) CHECK(eval(g, look) != 0);
      CHECK(eval(target, look) == 0);
    }
    if (cex) CHECK(r.verdict == FoVerdict::Invalid);
  }
  CHECK(valid > 20);
  CHECK(invalid > 20);
}

TEST_CASE("inconsistency and equivalence") {
  CHECK(fo_inconsistent(exprs({"n' > 0", "!(n' != 0)"})));
  CHECK(!fo_inconsistent(exprs({"n' > 0"})));
  CHECK(fo_equivalent(exprs({"n' == 0 || n' > 0", "n' != 0"}), parse_expr("n' > 0"), parse_expr("n' >= 1")));
  CHECK(fo_check({}, parse_expr("x * y > 0")).verdict != FoVerdict::Valid);
}

TEST_CASE("update application to expressions") {
  CHECK(to_string(apply_update_expr(parse_update("{k' := n'}"), parse_expr("k' - 1"))) == "n' - 1");
  ExprPtr e = parse_expr("x + y");
  CHECK(equal(apply_update_expr(Update{}, e), e));
  ExprPtr two = apply_update_expr(parse_update("{x := 1}{x := x + 1}"), var("x"));
  CHECK(eval(two, [](const std::string &) { return std::nullopt; }) == 2);
  CHECK(to_string(apply_update_expr(parse_update("{res(i') := r'}"), parse_expr("res(i') + 1"))) == "r' + 1");
  CHECK(to_string(apply_update_prefix(parse_update("{x := 1}{x := 2}"), 1, var("x"))) == "1");
}

TEST_CASE("current context of updates") {
  CHECK(curr_ctx_update(parse_update("{startEv(m, 0, i)}{r := 0}"), {{"i", Int(3)}}) == Context{"m", Int(3)});
  SymContext sym = curr_ctx_symbolic(parse_update("{startEv(m, 0, i)}{r := 0}"));
  CHECK(sym.proc == "m");
  CHECK(to_string(sym.id) == "i");
  CHECK(curr_ctx_update(Update{}).is_main());
  CHECK(curr_ctx_update(parse_update("{startEv(m, 0, 0)}{startEv(m, 0, 1)}{finishEv(m, 0, 1)}")) ==
        Context{"m", Int(0)});
  CHECK(error_kind([] { curr_ctx_update(parse_update("{finishEv(m, 0, 1)}")); }) == "malformed-nesting");
}

TEST_CASE("inlining a procedure") {
  ProofContext ctx = running_ctx();
  Judgment j = inline_call(lookup("m", ctx.procs), var("n'"), var("i'"), "k'", parse_formula("[true]"));
  CHECK(to_string(j) ==
        "{startEv(m, n', i')} k' = n'; { r; if (k' != 0) { r = m(k' - 1); r = r + 1 }; return r } : [true]");
  LookupTable constant = lookup_table(parse_program("m(k) { return 0 } main { skip }"));
  Judgment body = inline_call(lookup("m", constant), lit(1), lit(0), "k'", parse_formula("[true]"));
  CHECK(to_string(body.stmt) == "k' = 1; { return 0 }");
}

TEST_CASE("inlined body runs like the call") {
  ProofContext ctx = running_ctx();
  for (int v : {0, 1, 3}) {
    Judgment j = inline_call(lookup("m", ctx.procs), lit(v), lit(5), "k'", parse_formula("[true]"));
    Trace inl = run_judgment_program(j.update, j.stmt, {{"x", Int(0)}, {"k'", Int(0)}}, ctx.procs, 100000);
    Trace call = call_trace(ctx.procs, "m", v, 100000);
    auto kinds = [](const Trace &t) {
      std::vector<std::pair<EvKind, Int>> out;
      for (const auto &e : t)
        if (!is_state(e)) out.emplace_back(event_of(e).kind, event_of(e).kind == EvKind::Ret ? event_of(e).val : Int(0));
      return out;
    };
    CHECK(kinds(inl) == kinds(call));
    auto sk = oracle::skeleton(inl);
    REQUIRE(!sk.empty());
    CHECK(sk[0].value == 5);
  }
}

TEST_CASE("Cond splits on the guard") {
  ProofContext ctx = running_ctx();
  auto ps = premises("Cond", "k' > 0 |- {startEv(m, k', i')}{r' := 0} if (k' != 0) { r' = 1 }; return r' : [true]",
                     ctx);
  REQUIRE(ps.size() == 2);
  CHECK(ps[0] == "k' > 0, k' != 0 |- {startEv(m, k', i')}{r' := 0} r' = 1; return r' : [true]");
  CHECK(ps[1] == "k' > 0, !(k' != 0) |- {startEv(m, k', i')}{r' := 0} return r' : [true]");
  CHECK(apply_rule("closeFO", parse_sequent(ps[1]), RuleArgs{}, ctx).empty());
  CHECK(error_kind([&] { apply_rule("closeFO", parse_sequent(ps[0]), RuleArgs{}, ctx); }) ==
        "side-condition-failed");
}

TEST_CASE("Return emits finishEv and the result binding") {
  ProofContext ctx = running_ctx();
  auto ps = premises("Return", "|- {startEv(m, 1, 7)}{r := 2} return r : [true]", ctx);
  REQUIRE(ps.size() == 1);
  CHECK(ps[0] == "|- {startEv(m, 1, 7)}{r := 2}{finishEv(m, r, 7)} res(7) = r : [true]");
  CHECK(error_kind([&] { premises("Return", "|- {r := 2} return r : [true]", ctx); }) == "side-condition-failed");
}

TEST_CASE("Assign and Skip") {
  ProofContext ctx = running_ctx();
  CHECK(premises("Assign", "|- {x := 1} y = x + 1; skip : [true]", ctx) ==
        std::vector<std::string>{"|- {x := 1}{y := x + 1} skip : [true]"});
  CHECK(premises("Skip", "|- {x := 1} skip : [true]", ctx) == std::vector<std::string>{"|- {x := 1} : [true]"});
  CHECK(error_kind([&] { premises("Assign", "|- skip : [true]", ctx); }) == "no-match");
}

TEST_CASE("rule errors") {
  ProofContext ctx = running_ctx();
  CHECK(error_kind([&] { premises("NoSuchRule", "|- skip : [true]", ctx); }) == "unknown-rule");
  CHECK(error_kind([&] { premises("selectDisjunct", "|- skip : [true]", ctx, {{"index", "zz"}}); }) != "");
}

TEST_CASE("the running contract is proved automatically") {
  const ProofNode &root = auto_proof();
  CHECK(is_closed(root));
  CHECK(open_goals(root).empty());
  std::map<std::string, int> expect{{"closeFO", 7},          {"Assign", 5},     {"simplifyGamma", 2},
                                    {"Return", 2},           {"Unfold", 2},     {"selectDisjunct", 2},
                                    {"dropUpdate", 2},       {"Prestate", 2},   {"subsumeUpdates1", 2},
                                    {"closeEvent", 2},       {"elimUpdate1", 2}, {"elimUpdate2", 2},
                                    {"ProcedureContract", 1}, {"VarDecl", 1},    {"Scope", 1},
                                    {"Cond", 1},             {"applyUpdate", 1}, {"TrAbs", 1},
                                    {"closePsi", 1}};
  CHECK(rule_multiset(root) == expect);
}

TEST_CASE("trace abstraction yields the three expected premises") {
  const ProofNode *t = find_rule(auto_proof(), "TrAbs");
  REQUIRE(t);
  REQUIRE(t->children.size() == 3);
  CHECK(to_string(t->children[0].sequent) ==
        "n' > 0 |- {startEv(m, n', i')} : [n' > 0] ** startEv(m, n', i') ** psi(m)");
  CHECK(fo_equivalent({}, t->children[1].sequent.goal.pred, parse_expr("n' - 1 == 0 || n' - 1 > 0")));
  CHECK(to_string(t->children[1].sequent) == "n' > 0 |- n' - 1 == 0 || n' - 1 > 0");
  CHECK(to_string(t->children[2].sequent) ==
        "res(k') == n' - 1, C(m) |- {r' := res(k')}{r' := r' + 1}{finishEv(m, r', i')}{res(i') := r'} : "
        "psi(m) ** finishEv(m, n', i') ** [res(i') == n']");
}

TEST_CASE("the mutated contract is left open") {
  ProofContext ctx =
      make_context(oracle::read_fixture("running.tcp"), oracle::read_fixture("contract_m_mutant.tcf"), false);
  ProofNode root = prove_auto(parse_sequent("|- C(m)"), ctx);
  CHECK(!is_closed(root));
  auto open = open_goals(std::as_const(root));
  REQUIRE(open.size() == 1);
  CHECK(to_string(open[0]->sequent) == "res(k') == n' - 1 + 1 |- res(k') + 1 == n' && i' == i'");
  CHECK(!open[0]->note.empty());
}

TEST_CASE("trivial judgment closes in three steps") {
  ProofNode root = prove_auto(parse_sequent("|- skip : [true]"), running_ctx());
  CHECK(is_closed(root));
  CHECK(rule_multiset(root) == std::map<std::string, int>{{"Skip", 1}, {"stateFormula", 1}, {"closeFO", 1}});
}

TEST_CASE("loops are unsupported") {
  ProofContext ctx = make_context("m(k) { r; while (r < k) { r = r + 1 }; return r } main { skip }",
                                  oracle::read_fixture("contract_m.tcf"), false);
  CHECK(error_kind([&] { prove_auto(parse_sequent("|- C(m)"), ctx); }) == "unsupported-construct");
}

TEST_CASE("proof checking") {
  ProofContext ctx = running_ctx();
  const ProofNode &root = auto_proof();
  CheckResult ok = check_proof(root, ctx, "|- C(m)");
  CHECK(ok.valid);
  CHECK(ok.closed);
  CHECK(!check_proof(root, ctx, "|- C(q)").valid);

  SUBCASE("deleted premise") {
    ProofNode bad = root;
    ProofNode *t = nullptr;
    std::function<void(ProofNode &)> find = [&](ProofNode &n) {
      if (n.rule == "TrAbs") t = &n;
      for (auto &c : n.children) find(c);
    };
    find(bad);
    REQUIRE(t);
    t->children.erase(t->children.begin() + 1);
    CheckResult r = check_proof(bad, ctx);
    CHECK(!r.valid);
    CHECK(path_string(r.path) == "root.0.0.0.0.0.0.0.0.0.0.0.0.0.0.0");
  }
  SUBCASE("open proofs are valid but not closed") {
    ProofNode partial = goal("|- C(m)");
    expand(partial, "ProcedureContract", {}, ctx);
    CheckResult r = check_proof(partial, ctx);
    CHECK(r.valid);
    CHECK(!r.closed);
  }
}

TEST_CASE("random proof perturbations are rejected") {
  ProofContext ctx = running_ctx();
  const ProofNode &root = auto_proof();
  std::vector<std::vector<std::size_t>> paths;
  std::function<void(const ProofNode &, std::vector<std::size_t> &)> collect = [&](const ProofNode &n,
                                                                                  std::vector<std::size_t> &p) {
    paths.push_back(p);
    for (std::size_t k = 0; k < n.children.size(); ++k) {
      p.push_back(k);
      collect(n.children[k], p);
      p.pop_back();
    }
  };
  std::vector<std::size_t> p;
  collect(root, p);
  std::vector<std::string> names = rule_names(false);
  std::mt19937_64 rng(47);
  auto uni = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  int rejected = 0, tried = 0;
  while (tried < 100) {
    ProofNode bad = root;
    ProofNode *n = &bad;
    for (std::size_t k : paths[uni(paths.size())]) n = &n->children[k];
    bool changed = false;
    switch (uni(5)) {
    case 0: {
      std::string r = names[uni(names.size())];
      changed = r != n->rule;
      n->rule = r;
      break;
    }
    case 1:
      if (!n->children.empty()) {
        n->children.pop_back();
        changed = true;
      }
      break;
    case 2:
      n->children.push_back(n->children.empty() ? *n : n->children.front());
      changed = true;
      break;
    case 3: {
      std::string text = to_string(n->sequent);
      std::size_t at = text.find("n'");
      if (at != std::string::npos) {
        text.replace(at, 2, "q'");
        n->sequent = parse_sequent(text);
        changed = true;
      }
      break;
    }
    default:
      if (!n->args.empty()) {
        auto it = n->args.begin();
        std::advance(it, static_cast<long>(uni(n->args.size())));
        std::string v = it->second;
        it->second = std::isdigit(static_cast<unsigned char>(v[0])) ? std::to_string(std::stoi(v) + 1) : v + "'";
        changed = true;
      }
      break;
    }
    if (!changed) continue;
    ++tried;
    CheckResult r = check_proof(bad, ctx, "|- C(m)");
    if (!r.valid) ++rejected;
    else CHECK_MESSAGE(false, "accepted perturbation at " << path_string(r.path));
  }
  CHECK(rejected == 100);
}

TEST_CASE("proof documents round-trip") {
  ProofDocument doc{oracle::read_fixture("running.tcp"), oracle::read_fixture("contract_m.tcf"), false, "|- C(m)",
                    auto_proof()};
  std::string text = proof_to_json(doc);
  ProofDocument back = proof_from_json(text);
  CHECK(proof_to_json(back) == text);
  CHECK(check_proof(back).valid);
  CHECK(check_proof(back).closed);
  CHECK(error_kind([] { proof_from_json("{\"format\": \"tracelet-proof\"}"); }) == "bad-proof");
  std::string path = oracle::temp_dir() + "/m.proof.json";
  write_proof_file(path, doc);
  CHECK(check_proof(read_proof_file(path)).closed);
}

TEST_CASE("proof scripts") {
  ProofContext ctx = running_ctx();
  auto steps = parse_script("# contract of m\nProcedureContract @ 0 n=n' i=i'\n\nauto @ 0\n");
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].rule == "ProcedureContract");
  CHECK(steps[0].args.at("n") == "n'");
  CHECK(steps[1].line == 4);
  ProofNode root = goal("|- C(m)");
  for (const auto &s : steps) apply_step(root, s, ctx);
  CHECK(is_closed(root));
  CHECK(check_proof(root, ctx, "|- C(m)").closed);

  ScriptStep q = parse_script_line("simplifyGamma @ 1 to=\"n' > 0\"", 3);
  CHECK(q.goal == 1);
  CHECK(q.args.at("to") == "n' > 0");
  CHECK(error_kind([] { parse_script_line("Assign @ x", 1); }) == "syntax");
  ProofNode fresh = goal("|- C(m)");
  CHECK(error_kind([&] { apply_step(fresh, parse_script_line("Assign @ 0"), ctx); }) == "no-match");
  CHECK(error_kind([&] { apply_step(fresh, parse_script_line("Assign @ 4"), ctx); }) != "");
}

TEST_CASE("extension rules are gated") {
  std::vector<std::string> core = rule_names(false), all = rule_names(true);
  CHECK(std::count(core.begin(), core.end(), "PrefixEv") == 0);
  CHECK(std::count(all.begin(), all.end(), "PrefixEv") == 1);
  std::string s = "n' > 0 |- {startEv(m, n', i')} : startEv(m, n', i') ** psi(m)";
  CHECK(error_kind([&] { premises("PrefixEv", s, running_ctx(false)); }) == "unknown-rule");
  auto ps = premises("PrefixEv", s, running_ctx(true));
  REQUIRE(ps.size() == 1);
  CHECK(ps[0].find("psi(m)") != std::string::npos);
  auto ps2 = premises("FiniteTraceEmptyPostfix", s, running_ctx(true));
  REQUIRE(ps2.size() == 1);
  CHECK(ps2[0] == "n' > 0 |- {startEv(m, n', i')} : startEv(m, n', i')");
  auto ps3 = premises("Composition", "|- {x := 1}{y := 2} : [x == 1] ** [y == 2]", running_ctx(true),
                      {{"at", "1"}, {"factor", "1"}});
  CHECK(ps3 == std::vector<std::string>{"|- {x := 1} : [x == 1]", "|- {y := 2} : [y == 2]"});
}

TEST_CASE("sequent printing round-trips") {
  std::function<void(const ProofNode &)> walk = [&](const ProofNode &n) {
    std::string text = to_string(n.sequent);
    CHECK(to_string(parse_sequent(text)) == text);
    for (const auto &c : n.children) walk(c);
  };
  walk(auto_proof());
}

TEST_CASE("fresh names") {
  CHECK(fresh_name("n", {}) == "n'");
  CHECK(fresh_name("n'", {"n'"}) == "n''");
}
