#include "support/oracles.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace oracle {

using namespace tracelet;

std::string fixture_path(const std::string &name) { return std::string(TRACELET_FIXTURES) + "/" + name; }

std::string read_fixture(const std::string &name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct Env {
  LogicalEnv beta;
  std::map<std::string, MuDefPtr> rec;
  int id = 0;
};

struct App {
  MuDefPtr def;
  Env env;
  std::size_t a, b;
};

class Kleene {
public:
  explicit Kleene(const Trace &t) : t_(t) {
    std::vector<std::string> stack;
    for (const auto &e : t) {
      std::string proc;
      if (!is_state(e)) {
        const EventMarker &ev = event_of(e);
        switch (ev.kind) {
        case EvKind::Call: proc = ev.proc; break;
        case EvKind::Push:
          proc = ev.proc;
          stack.push_back(ev.proc);
          break;
        case EvKind::Pop:
          proc = ev.proc;
          if (!stack.empty()) stack.pop_back();
          break;
        case EvKind::Ret: proc = stack.empty() ? "main" : stack.back(); break;
        }
        if (ev.kind == EvKind::Call) ids_.insert(ev.id);
      }
      proc_.push_back(proc);
    }
    Int unused = 0;
    for (const auto &i : ids_)
      if (i >= unused) unused = i + 1;
    ids_.insert(unused);
  }

  bool run(const FormulaPtr &f, const LogicalEnv &beta) {
    if (t_.empty()) return false;
    Env top{beta, {}, 0};
    top.id = intern(top);
    for (;;) {
      grew_ = false;
      memo_.clear();
      bool r = eval(f, top, 0, t_.size() - 1);
      bool changed = false;
      std::vector<std::string> keys;
      for (const auto &[k, v] : apps_) keys.push_back(k);
      for (const auto &k : keys) {
        if (val_[k]) continue;
        const App &app = apps_.at(k);
        if (eval(app.def->body, app.env, app.a, app.b)) {
          val_[k] = true;
          changed = true;
        }
      }
      if (!changed && !grew_) return r;
      if (apps_.size() > 2000000) throw std::runtime_error("oracle key space exhausted");
    }
  }

private:
  int intern(const Env &e) {
    std::string sig;
    for (const auto &[k, v] : e.beta) sig += k + "=" + v.str() + ";";
    for (const auto &[k, d] : e.rec) sig += k + "@" + std::to_string(reinterpret_cast<std::uintptr_t>(d.get())) + ";";
    auto it = envs_.find(sig);
    if (it != envs_.end()) return it->second;
    int id = static_cast<int>(envs_.size()) + 1;
    envs_.emplace(sig, id);
    return id;
  }

  std::optional<Int> value(const ExprPtr &e, const Env &env) {
    return try_eval(e, [&](const std::string &n) -> std::optional<Int> {
      auto it = env.beta.find(n);
      if (it == env.beta.end()) return std::nullopt;
      return it->second;
    });
  }

  bool pred(const ExprPtr &p, const Env &env, std::size_t a) {
    if (!is_state(t_[a])) return false;
    const State &s = state_of(t_[a]);
    auto v = try_eval(p, [&](const std::string &n) -> std::optional<Int> {
      if (auto it = env.beta.find(n); it != env.beta.end()) return it->second;
      if (auto it = s.find(n); it != s.end()) return it->second;
      return std::nullopt;
    });
    return v && *v != 0;
  }

  bool state_eq(std::size_t k, const State &s) const { return is_state(t_[k]) && state_of(t_[k]) == s; }

  bool start(const Formula &f, const Env &env, std::size_t a, std::size_t b) {
    if (b != a + 4 || !is_state(t_[a]) || is_state(t_[a + 1]) || is_state(t_[a + 3])) return false;
    const State &s = state_of(t_[a]);
    if (!state_eq(a + 2, s) || !state_eq(a + 4, s)) return false;
    const EventMarker &c = event_of(t_[a + 1]);
    const EventMarker &p = event_of(t_[a + 3]);
    auto v = value(f.e, env);
    auto id = value(f.id, env);
    return v && id && c == call_ev(f.name, *v, *id) && p == push_ev(Context{f.name, *id});
  }

  bool finish(const Formula &f, const Env &env, std::size_t a, std::size_t b) {
    if (b != a + 5 || !is_state(t_[a]) || is_state(t_[a + 1]) || is_state(t_[a + 4])) return false;
    auto v = value(f.e, env);
    auto id = value(f.id, env);
    if (!v || !id) return false;
    const State &s = state_of(t_[a]);
    State bound = s;
    bound[res_name(*id)] = *v;
    return event_of(t_[a + 1]) == ret_ev(*v) && state_eq(a + 2, s) && state_eq(a + 3, bound) &&
           event_of(t_[a + 4]) == pop_ev(Context{f.name, *id}) && state_eq(a + 5, bound);
  }

  bool apply(const MuDefPtr &def, const std::vector<ExprPtr> &args, const Env &env, std::size_t a,
             std::size_t b) {
    std::vector<std::vector<Int>> tuples(1);
    for (const auto &arg : args) {
      std::vector<Int> opts;
      if (arg->kind == ExprKind::Fresh) {
        auto base = value(arg->a, env);
        for (const auto &i : ids_)
          if (!base || i != *base) opts.push_back(i);
      } else if (auto v = value(arg, env)) {
        opts.push_back(*v);
      }
      std::vector<std::vector<Int>> next;
      for (const auto &t : tuples)
        for (const auto &o : opts) {
          next.push_back(t);
          next.back().push_back(o);
        }
      tuples = std::move(next);
    }
    bool any = false;
    for (const auto &vals : tuples) {
      Env inner = env;
      for (std::size_t k = 0; k < def->params.size(); ++k) inner.beta[def->params[k]] = vals[k];
      inner.rec[def->name] = def;
      inner.id = intern(inner);
      std::string key = std::to_string(inner.id) + ":" + std::to_string(a) + ":" + std::to_string(b);
      if (!apps_.count(key)) {
        apps_.emplace(key, App{def, inner, a, b});
        grew_ = true;
      }
      any = any || val_[key];
    }
    return any;
  }

  bool eval(const FormulaPtr &f, const Env &env, std::size_t a, std::size_t b) {
    std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(f.get())) + ":" +
                      std::to_string(env.id) + ":" + std::to_string(a) + ":" + std::to_string(b);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool r = false;
    switch (f->kind) {
    case FKind::Pred: r = a == b && pred(f->pred, env, a); break;
    case FKind::NoEv: r = a == b && (f->name.empty() || is_state(t_[a]) || proc_[a] != f->name); break;
    case FKind::Start: r = start(*f, env, a, b); break;
    case FKind::Finish: r = finish(*f, env, a, b); break;
    case FKind::RecApp: {
      auto it = env.rec.find(f->name);
      r = it != env.rec.end() && apply(it->second, f->args, env, a, b);
      break;
    }
    case FKind::MuApp: r = apply(f->mu, f->args, env, a, b); break;
    case FKind::And: r = eval(f->a, env, a, b) && eval(f->b, env, a, b); break;
    case FKind::Or: r = eval(f->a, env, a, b) || eval(f->b, env, a, b); break;
    case FKind::Chop:
      for (std::size_t k = a; k <= b && !r; ++k)
        r = is_state(t_[k]) && eval(f->a, env, a, k) && eval(f->b, env, k, b);
      break;
    case FKind::Concat:
      for (std::size_t k = a; k < b && !r; ++k) r = eval(f->a, env, a, k) && eval(f->b, env, k + 1, b);
      break;
    }
    memo_[key] = r;
    return r;
  }

  const Trace &t_;
  std::vector<std::string> proc_;
  std::set<Int> ids_;
  std::map<std::string, int> envs_;
  std::map<std::string, App> apps_;
  std::map<std::string, bool> val_;
  std::map<std::string, bool> memo_;
  bool grew_ = false;
};

State with(State s, const std::string &k, const Int &v) {
  s[k] = v;
  return s;
}

}  // namespace

bool member(const Trace &t, const FormulaPtr &f, const LogicalEnv &beta) { return Kleene(t).run(f, beta); }

Trace golden_m1() {
  State s{{"x", 0}};
  State s1 = with(s, "r#1", 0);
  State s2 = with(s1, "r#2", 0);
  State s3 = with(s2, "res1", 0);
  State s4 = with(s3, "r#1", 0);
  State s5 = with(s4, "r#1", 1);
  State s6 = with(s5, "res0", 1);
  return {s,  call_ev("m", 1, 0), s,  push_ev({"m", Int(0)}), s,  s1, call_ev("m", 0, 1), s1,
          push_ev({"m", Int(1)}), s1, s2, ret_ev(0), s2, s3, pop_ev({"m", Int(1)}), s3, s4, s5,
          ret_ev(1), s5, s6, pop_ev({"m", Int(0)}), s6, with(s6, "x", 1)};
}

Trace golden_m0_two_if() {
  State s{{"x", 0}};
  State s1 = with(s, "r#1", 0);
  State s2 = with(s1, "res0", 0);
  return {s, call_ev("m", 0, 0), s, push_ev({"m", Int(0)}), s, s1, s1, ret_ev(0), s1, s2,
          pop_ev({"m", Int(0)}), s2, with(s2, "x", 0)};
}

std::string to_string(const SkeletonEntry &e) { return tracelet::to_string(e.kind) + "(" + e.value.str() + ")"; }

std::vector<SkeletonEntry> skeleton(const Trace &t) {
  std::vector<SkeletonEntry> out;
  for (const auto &e : t) {
    if (is_state(e)) continue;
    const EventMarker &ev = event_of(e);
    out.push_back({ev.kind, ev.kind == EvKind::Ret ? ev.val : ev.id});
  }
  return out;
}

std::vector<SkeletonEntry> golden_m2_skeleton() {
  return {{EvKind::Call, 0}, {EvKind::Push, 0}, {EvKind::Call, 1}, {EvKind::Push, 1},
          {EvKind::Call, 2}, {EvKind::Push, 2}, {EvKind::Ret, 0},  {EvKind::Pop, 2},
          {EvKind::Ret, 1},  {EvKind::Pop, 1},  {EvKind::Ret, 2},  {EvKind::Pop, 0}};
}

Trace mutate_trace(const Trace &t, std::mt19937_64 &rng) {
  Trace out = t;
  if (out.empty()) return out;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::size_t k = pick(out.size());
  switch (pick(6)) {
  case 0:
    if (is_state(out[k])) {
      State s = state_of(out[k]);
      std::vector<std::string> keys;
      for (const auto &[n, v] : s) keys.push_back(n);
      keys.push_back("x");
      s[keys[pick(keys.size())]] += (pick(2) ? 1 : -1);
      out[k] = s;
    }
    break;
  case 1: out.erase(out.begin() + static_cast<std::ptrdiff_t>(k)); break;
  case 2: out.insert(out.begin() + static_cast<std::ptrdiff_t>(k), out[k]); break;
  case 3:
    if (!is_state(out[k])) {
      EventMarker e = event_of(out[k]);
      switch (pick(3)) {
      case 0: e.id += 1; break;
      case 1: e.arg += 1; break;
      default: e.val += 1; break;
      }
      out[k] = e;
    }
    break;
  case 4:
    if (k + 1 < out.size()) std::swap(out[k], out[k + 1]);
    break;
  default:
    if (!is_state(out[k])) {
      EventMarker e = event_of(out[k]);
      e.proc = e.proc == "m" ? "q" : "m";
      out[k] = e;
    }
    break;
  }
  return out;
}

Trace normalize_ids(const Trace &t) {
  std::map<Int, Int> ren;
  for (const auto &e : t)
    if (!is_state(e)) {
      const EventMarker &ev = event_of(e);
      if (ev.kind != EvKind::Ret && !ren.count(ev.id)) {
        Int next(static_cast<long>(ren.size()));
        ren[ev.id] = next;
      }
    }
  Trace out;
  for (const auto &e : t) {
    if (is_state(e)) {
      State s;
      for (const auto &[k, v] : state_of(e)) {
        std::string name = k;
        if (k.size() > 3 && k.rfind("res", 0) == 0 && k.find_first_not_of("0123456789", 3) == std::string::npos) {
          Int id(k.substr(3));
          if (ren.count(id)) name = res_name(ren[id]);
        }
        s[name] = v;
      }
      out.push_back(s);
      continue;
    }
    EventMarker ev = event_of(e);
    if (ev.kind != EvKind::Ret && ren.count(ev.id)) ev.id = ren[ev.id];
    out.push_back(ev);
  }
  return out;
}

namespace {

class ProgramGen {
public:
  ProgramGen(std::mt19937_64 &rng, const GenLimits &lim) : rng_(rng), lim_(lim) {}

  Program make() {
    Program p;
    int procs = uniform(1, lim_.max_procs);
    for (int j = 0; j < procs; ++j) p.procs.push_back(proc(j, procs));
    p.main_decls = {"x", "y", "c"};
    vars_ = {"x", "y"};
    callee_from_ = 0;
    procs_ = procs;
    self_ = -1;
    p.main_body = block(uniform(2, 5), 0);
    return p;
  }

private:
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  ExprPtr expr(int depth) {
    int c = uniform(0, depth > 0 ? 5 : 2);
    if (c == 0) return lit(uniform(-2, 4));
    if (c <= 2) return var(vars_[static_cast<std::size_t>(uniform(0, static_cast<int>(vars_.size()) - 1))]);
    static const Op ops[] = {Op::Add, Op::Sub, Op::Mul};
    return binary(ops[uniform(0, 2)], expr(depth - 1), expr(depth - 1));
  }

  ExprPtr cond() {
    static const Op ops[] = {Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge};
    return binary(ops[uniform(0, 5)], expr(1), expr(1));
  }

  std::string target() {
    std::vector<std::string> ts;
    for (const auto &v : vars_)
      if (v != "k" && v != "c") ts.push_back(v);
    return ts[static_cast<std::size_t>(uniform(0, static_cast<int>(ts.size()) - 1))];
  }

  StmtPtr stmt(int depth) {
    ++count_;
    int c = uniform(0, 9);
    if (c <= 3 || count_ > lim_.max_stmts - 6) return assign_stmt(var(target()), expr(2));
    if (c <= 5 && depth < 2) return if_stmt(cond(), block(uniform(1, 2), depth + 1));
    if (c == 6 && lim_.loops && depth < 2) {
      count_ += 2;
      return seq(assign_stmt(var("c"), lit(0)),
                 while_stmt(binary(Op::Lt, var("c"), lit(uniform(0, 3))),
                            seq(assign_stmt(var("c"), binary(Op::Add, var("c"), lit(1))),
                                assign_stmt(var(target()), expr(1)))));
    }
    if (c == 7 && self_ >= 0) {
      ++count_;
      return if_stmt(binary(Op::Gt, var("k"), lit(0)),
                     call_stmt(var(target()), "p" + std::to_string(self_), binary(Op::Sub, var("k"), lit(1))));
    }
    if (callee_from_ < procs_) {
      int callee = uniform(callee_from_, procs_ - 1);
      return call_stmt(var(target()), "p" + std::to_string(callee), lit(uniform(0, lim_.max_arg)));
    }
    if (c == 8) return skip_stmt();
    return assign_stmt(var(target()), expr(1));
  }

  StmtPtr block(int n, int depth) {
    StmtPtr out;
    for (int k = 0; k < n; ++k) out = seq(out, stmt(depth));
    return out;
  }

  ProcDecl proc(int j, int procs) {
    vars_ = {"k", "r", "c"};
    callee_from_ = j + 1;
    procs_ = procs;
    self_ = j;
    StmtPtr body = seq(block(uniform(1, 4), 0), return_stmt(expr(1)));
    return ProcDecl{"p" + std::to_string(j), "k", scope_stmt({"r", "c"}, body), {}};
  }

  std::mt19937_64 &rng_;
  GenLimits lim_;
  std::vector<std::string> vars_;
  int callee_from_ = 0;
  int procs_ = 0;
  int self_ = -1;
  int count_ = 0;
};

int count_stmts(const StmtPtr &s) {
  if (!s) return 0;
  int own = (s->kind == StmtKind::Seq || s->kind == StmtKind::Scope) ? 0 : 1;
  return own + count_stmts(s->a) + count_stmts(s->b);
}

}  // namespace

Program random_program(std::mt19937_64 &rng, const GenLimits &lim) {
  for (;;) {
    ProgramGen g(rng, lim);
    Program p = g.make();
    if (statement_count(p) <= lim.max_stmts) return p;
  }
}

int call_depth(const Trace &t) {
  int depth = 0, best = 0;
  for (const auto &e : t) {
    if (is_state(e)) continue;
    if (event_of(e).kind == EvKind::Push) best = std::max(best, ++depth);
    if (event_of(e).kind == EvKind::Pop) --depth;
  }
  return best;
}

int statement_count(const Program &p) {
  int n = count_stmts(p.main_body);
  for (const auto &d : p.procs) n += count_stmts(d.body);
  return n;
}

Trace random_trace(std::mt19937_64 &rng, const State &first, int steps) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Trace t = singleton(first);
  State s = first;
  static const char *names[] = {"x", "y", "z"};
  for (int k = 0; k < steps; ++k) {
    if (uni(0, 2) > 0) {
      s = with(s, names[uni(0, 2)], uni(-3, 3));
      t.push_back(s);
      continue;
    }
    EventMarker ev;
    switch (uni(0, 3)) {
    case 0: ev = call_ev("m", uni(0, 3), uni(0, 5)); break;
    case 1: ev = ret_ev(uni(0, 3)); break;
    case 2: ev = push_ev({"m", Int(uni(0, 5))}); break;
    default: ev = pop_ev({"m", Int(uni(0, 5))}); break;
    }
    t.push_back(ev);
    t.push_back(s);
  }
  return t;
}

std::optional<std::map<std::string, Int>> fo_counterexample(const std::vector<ExprPtr> &gamma, const ExprPtr &goal,
                                                            int lo, int hi) {
  std::set<std::string> names;
  for (const auto &g : gamma) free_vars(g, names);
  free_vars(goal, names);
  std::vector<std::string> vs(names.begin(), names.end());
  std::map<std::string, Int> val;
  auto lookup = [&](const std::string &n) -> std::optional<Int> {
    auto it = val.find(n);
    if (it == val.end()) return std::nullopt;
    return it->second;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
    if (i == vs.size()) {
      for (const auto &g : gamma) {
        auto v = try_eval(g, lookup);
        if (!v || *v == 0) return false;
      }
      auto v = try_eval(goal, lookup);
      return v && *v == 0;
    }
    for (int x = lo; x <= hi; ++x) {
      val[vs[i]] = x;
      if (search(i + 1)) return true;
    }
    val.erase(vs[i]);
    return false;
  };
  if (search(0)) return val;
  return std::nullopt;
}

std::string temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("tracelet_tests_" + std::to_string(getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

CliResult run_cli(const std::string &args, const std::string &stdin_text) {
  std::string dir = temp_dir();
  std::string in = dir + "/stdin.txt";
  std::string out = dir + "/stdout.txt";
  {
    std::ofstream f(in);
    f << stdin_text;
  }
  std::string cmd = std::string("\"") + TRACELET_CLI + "\" " + args + " < " + in + " > " + out + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace oracle
