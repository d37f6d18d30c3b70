#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/oracles.hpp"
#include "tracelet/contract.hpp"
#include "tracelet/proof_io.hpp"
#include "tracelet/prover.hpp"
#include "tracelet/update.hpp"
#include "tracelet/validate.hpp"

using namespace tracelet;

namespace {

int uni(std::mt19937_64 &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

State main_state(const Program &p) {
  State s;
  for (const auto &x : p.main_decls) s[x] = 0;
  return s;
}

std::vector<StmtPtr> flatten(const StmtPtr &s) {
  if (s && s->kind == StmtKind::Seq) {
    auto a = flatten(s->a), b = flatten(s->b);
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
  return {s};
}

StmtPtr seq_of(const std::vector<StmtPtr> &ss, std::size_t from, std::size_t to) {
  StmtPtr out;
  for (std::size_t k = to; k > from; --k) out = seq(ss[k - 1], out);
  return out;
}

/// [[s]](t); the empty program yields the last state.
Trace sem(const StmtPtr &s, const Trace &t, const LookupTable &g) {
  if (!s) return singleton(last_state(t));
  Fuel fuel(200000);
  return run_stmt(s, t, g, fuel);
}

ExprPtr random_expr(std::mt19937_64 &rng) {
  const char *vars[] = {"x", "y"};
  ExprPtr e = uni(rng, 0, 1) ? var(vars[uni(rng, 0, 1)]) : lit(uni(rng, -3, 3));
  if (uni(rng, 0, 1)) e = binary(uni(rng, 0, 1) ? Op::Add : Op::Sub, e, lit(uni(rng, 0, 3)));
  return e;
}

Update random_update(std::mt19937_64 &rng, const Program &p, int len) {
  Update u;
  for (int k = 0; k < len; ++k) {
    const char *target = uni(rng, 0, 1) ? "x" : "y";
    if (!p.procs.empty() && uni(rng, 0, 3) == 0)
      u.push_back(call_atom(var(target), p.procs[uni(rng, 0, static_cast<int>(p.procs.size()) - 1)].name,
                            lit(uni(rng, 0, 3))));
    else
      u.push_back(elem_atom(var(target), random_expr(rng)));
  }
  return u;
}

StmtPtr with_update(const Update &u, const StmtPtr &s) { return u.empty() ? s : prefix_updates(u, s); }

bool shallow_enough(const Trace &t) { return oracle::call_depth(t) <= 5; }

ProofContext running_ctx() {
  return make_context(oracle::read_fixture("running.tcp"), oracle::read_fixture("contract_m.tcf"), false);
}

}  // namespace

TEST_CASE("interpreter traces are adequate") {
  std::mt19937_64 rng(101);
  int checked = 0;
  for (int k = 0; k < 150; ++k) {
    Program p = oracle::random_program(rng);
    RunResult r = run(p, {}, 200000);
    if (r.exhausted || !shallow_enough(r.trace)) continue;
    ++checked;
    CAPTURE(to_string(p));
    AdequacyVerdict strict = is_adequate(r.trace);
    CHECK_MESSAGE(strict.adequate, strict.reason);
    CHECK(is_adequate(r.trace, true).adequate);
  }
  CHECK(checked > 100);
}

TEST_CASE("every callEv is followed by its pushEv and every retEv by its popEv") {
  std::mt19937_64 rng(103);
  for (int k = 0; k < 60; ++k) {
    Program p = oracle::random_program(rng);
    RunResult r = run(p, {}, 200000);
    if (r.exhausted) continue;
    const Trace &t = r.trace;
    std::vector<Context> stack;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (is_state(t[i])) continue;
      const EventMarker &e = event_of(t[i]);
      if (e.kind == EvKind::Call) {
        REQUIRE(i + 2 < t.size());
        REQUIRE(!is_state(t[i + 2]));
        CHECK(event_of(t[i + 2]) == push_ev(e.ctx()));
      }
      if (e.kind == EvKind::Push) stack.push_back(e.ctx());
      if (e.kind == EvKind::Ret) {
        REQUIRE(i + 3 < t.size());
        REQUIRE(!is_state(t[i + 3]));
        REQUIRE(!stack.empty());
        CHECK(event_of(t[i + 3]) == pop_ev(stack.back()));
      }
      if (e.kind == EvKind::Pop) stack.pop_back();
    }
  }
}

TEST_CASE("sequential decomposition") {
  std::mt19937_64 rng(107);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    Program p = oracle::random_program(rng);
    LookupTable g = lookup_table(p);
    auto parts = flatten(p.main_body);
    if (parts.size() < 2) continue;
    std::size_t cut = static_cast<std::size_t>(uni(rng, 1, static_cast<int>(parts.size()) - 1));
    StmtPtr r = seq_of(parts, 0, cut), s = seq_of(parts, cut, parts.size());
    Trace t0 = singleton(main_state(p));
    try {
      Trace whole = sem(seq(r, s), t0, g);
      Trace first = sem(r, t0, g);
      Trace second = sem(s, first, g);
      CHECK(whole == chop(first, second));
      ++checked;
    } catch (const Error &e) {
      CHECK(e.kind() == "fuel-exhausted");
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("update decomposition") {
  std::mt19937_64 rng(109);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    Program p = oracle::random_program(rng);
    LookupTable g = lookup_table(p);
    Update u = random_update(rng, p, uni(rng, 1, 3));
    Update u2 = random_update(rng, p, uni(rng, 1, 2));
    Trace t0 = singleton(main_state(p));
    try {
      Trace head = sem(with_update(u, nullptr), t0, g);
      CHECK(sem(with_update(u, p.main_body), t0, g) == chop(head, sem(p.main_body, head, g)));
      Update uu = u;
      uu.insert(uu.end(), u2.begin(), u2.end());
      CHECK(sem(with_update(uu, nullptr), t0, g) == chop(head, sem(with_update(u2, nullptr), head, g)));
      ++checked;
    } catch (const Error &e) {
      CHECK(e.kind() == "fuel-exhausted");
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("call updates depend only on the last state up to call ids") {
  std::mt19937_64 rng(113);
  int checked = 0;
  for (int k = 0; k < 200 && checked < 100; ++k) {
    Program p = oracle::random_program(rng);
    if (p.procs.empty()) continue;
    LookupTable g = lookup_table(p);
    Trace prefix = run(p, {}, 200000).trace;
    StmtPtr call = update_stmt(call_atom(var("x"), p.procs[0].name, lit(uni(rng, 0, 3))));
    try {
      Trace full = sem(call, prefix, g);
      Trace fresh = sem(call, singleton(last_state(prefix)), g);
      CHECK(oracle::normalize_ids(full) == oracle::normalize_ids(fresh));
      ++checked;
    } catch (const Error &e) {
      CHECK(e.kind() == "fuel-exhausted");
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("chop is associative with singleton identities") {
  std::mt19937_64 rng(127);
  for (int k = 0; k < 1000; ++k) {
    Trace t = oracle::random_trace(rng, {{"x", Int(0)}}, uni(rng, 0, 8));
    std::vector<std::size_t> states;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (is_state(t[i])) states.push_back(i);
    std::size_t a = states[uni(rng, 0, static_cast<int>(states.size()) - 1)];
    std::size_t b = states[uni(rng, 0, static_cast<int>(states.size()) - 1)];
    if (a > b) std::swap(a, b);
    auto part = [&](std::size_t from, std::size_t to) {
      return Trace(t.begin() + static_cast<long>(from), t.begin() + static_cast<long>(to) + 1);
    };
    Trace x = part(0, a), y = part(a, b), z = part(b, t.size() - 1);
    CHECK(chop(chop(x, y), z) == chop(x, chop(y, z)));
    CHECK(chop(chop(x, y), z) == t);
    CHECK(chop(singleton(first_state(t)), t) == t);
    CHECK(chop(t, singleton(last_state(t))) == t);
  }
}

TEST_CASE("updates over expressions agree with the state semantics") {
  std::mt19937_64 rng(131);
  Program p = parse_program("main { x; y; skip }");
  LookupTable g;
  for (int k = 0; k < 300; ++k) {
    Update u = random_update(rng, p, uni(rng, 1, 4));
    State s{{"x", Int(uni(rng, -3, 3))}, {"y", Int(uni(rng, -3, 3))}};
    ExprPtr e = random_expr(rng);
    Trace t = sem(with_update(u, nullptr), singleton(s), g);
    CHECK(eval(apply_update_expr(u, e), state_lookup(s)) == eval_expr(last_state(t), e));
  }
}

TEST_CASE("context of updates agrees with the trace context") {
  std::mt19937_64 rng(137);
  LookupTable g;
  for (int k = 0; k < 300; ++k) {
    Update u;
    std::vector<int> open;
    int next = 0;
    for (int n = uni(rng, 0, 6); n > 0; --n) {
      int choice = uni(rng, 0, 2);
      if (choice == 0) {
        u.push_back(start_atom("m", lit(uni(rng, 0, 3)), lit(next)));
        open.push_back(next++);
      } else if (choice == 1 && !open.empty()) {
        u.push_back(finish_atom("m", lit(uni(rng, 0, 3)), lit(open.back())));
        u.push_back(elem_atom(res(lit(open.back())), lit(0)));
        open.pop_back();
      } else {
        u.push_back(elem_atom(var("x"), lit(uni(rng, 0, 3))));
      }
    }
    Trace t = sem(with_update(u, nullptr), singleton({{"x", Int(0)}}), g);
    CAPTURE(to_string(u));
    CHECK(curr_ctx_update(u) == curr_ctx(t));
    CHECK(is_adequate(t).adequate);
  }
}

TEST_CASE("Assign and Cond are reversible") {
  std::mt19937_64 rng(139);
  ProofContext ctx = running_ctx();
  FormulaPtr phi = parse_formula("[true]");
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    Update u;
    for (int n = uni(rng, 0, 2); n > 0; --n) u.push_back(elem_atom(var(uni(rng, 0, 1) ? "x" : "y"), random_expr(rng)));
    StmtPtr rest = uni(rng, 0, 1) ? parse_stmt("y = m(2)") : parse_stmt("x = x + y");
    StmtPtr body = uni(rng, 0, 1)
                       ? seq(parse_stmt("x = " + to_string(random_expr(rng))), rest)
                       : seq(parse_stmt("if (x < " + std::to_string(uni(rng, -2, 2)) + ") { y = x }"), rest);
    Sequent s{{}, {}, judgment_goal(Judgment{u, body, phi})};
    RuleArgs args;
    std::string rule = body->a->kind == StmtKind::If ? "Cond" : "Assign";
    auto ps = apply_rule(rule, s, args, ctx);
    State s0{{"x", Int(uni(rng, -3, 3))}, {"y", Int(uni(rng, -3, 3))}};
    Trace concl = run_judgment_program(u, body, s0, ctx.procs, 100000);
    bool matched = false;
    for (const auto &q : ps) {
      bool applies = true;
      for (const auto &f : q.facts) applies = applies && eval_pred(s0, {}, f);
      if (!applies) continue;
      const Judgment &j = q.goal.judgment;
      CHECK(run_judgment_program(j.update, j.stmt, s0, ctx.procs, 100000) == concl);
      matched = true;
    }
    CHECK(matched);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("closed proofs are sound on sampled valuations") {
  ProofContext ctx = running_ctx();
  ProofNode root = prove_auto(parse_sequent("|- C(m)"), ctx);
  REQUIRE(is_closed(root));
  TreeSampling s = sample_tree(root, ctx, 7, 40);
  CHECK_MESSAGE(!s.failing_path, s.failure);
  CHECK(s.nodes == 39);
  CHECK(s.checked > 200);
}

TEST_CASE("differential sampling detects an unsound step") {
  ProofContext ctx = running_ctx();
  ProofNode bogus;
  bogus.sequent = parse_sequent("x > 0 |- {x := x + 1} : [x == 2]");
  bogus.rule = "closeFO";
  TreeSampling s = sample_tree(bogus, ctx, 1, 60);
  CHECK(s.failing_path);
  SequentSampling t = sample_sequent(parse_sequent("x > 0 |- {x := x + 1} : [x > 0] .. [x > 1]"), ctx, 3, 60);
  CHECK_MESSAGE(!t.failure, t.failure.value_or(""));
  CHECK(t.checked > 0);
}

TEST_CASE("unfolding preserves the validation verdict") {
  ProofContext ctx = running_ctx();
  for (const char *file : {"contract_m.tcf", "contract_m_mutant.tcf"}) {
    ContractAssumption c = read_contracts(oracle::read_fixture(file)).at(0);
    for (int n = 0; n <= 6; ++n) {
      Trace t = call_trace(ctx.procs, "m", n, 100000);
      FormulaPtr post = pred(binary(Op::Eq, res(lit(0)), f_at(c, lit(n))));
      FormulaPtr inst = instantiate(c, lit(n), lit(0));
      CHECK(member(t, f_chop(inst, post), {}) == member(t, f_chop(unfold(inst), post), {}));
    }
  }
}

TEST_CASE("nested fresh ids never collide with enclosing ids") {
  ProofContext ctx = running_ctx();
  for (int n = 1; n <= 5; ++n) {
    Trace t = call_trace(ctx.procs, "m", n, 100000);
    std::set<Int> ids;
    for (const auto &e : t)
      if (!is_state(e) && event_of(e).kind == EvKind::Call) CHECK(ids.insert(event_of(e).id).second);
    CHECK(ids.size() == static_cast<std::size_t>(n) + 1);
  }
}
