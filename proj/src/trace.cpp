#include "tracelet/trace.hpp"

namespace tracelet {

State update_state(const State &s, const std::string &x, const Int &v) {
  State out = s;
  out[x] = v;
  return out;
}

Lookup state_lookup(const State &s) {
  return [&s](const std::string &name) -> std::optional<Int> {
    auto it = s.find(name);
    if (it == s.end()) return std::nullopt;
    return it->second;
  };
}

Int eval_expr(const State &s, const ExprPtr &e) { return eval(e, state_lookup(s)); }

std::string to_string(const State &s) {
  std::string out = "[";
  bool first = true;
  for (const auto &[k, v] : s) {
    if (!first) out += ", ";
    first = false;
    out += k + "=" + v.str();
  }
  return out + "]";
}

Context main_context() { return Context{}; }

std::string to_string(const Context &c) {
  return "(" + c.proc + ", " + (c.id ? c.id->str() : std::string("nul")) + ")";
}

std::string to_string(EvKind k) {
  switch (k) {
  case EvKind::Call: return "callEv";
  case EvKind::Ret: return "retEv";
  case EvKind::Push: return "pushEv";
  case EvKind::Pop: return "popEv";
  }
  return "?";
}

bool EventMarker::operator==(const EventMarker &o) const {
  if (kind != o.kind) return false;
  switch (kind) {
  case EvKind::Call: return proc == o.proc && arg == o.arg && id == o.id;
  case EvKind::Ret: return val == o.val;
  default: return proc == o.proc && id == o.id;
  }
}

EventMarker call_ev(const std::string &m, const Int &arg, const Int &id) {
  EventMarker e;
  e.kind = EvKind::Call;
  e.proc = m;
  e.arg = arg;
  e.id = id;
  return e;
}

EventMarker ret_ev(const Int &val) {
  EventMarker e;
  e.kind = EvKind::Ret;
  e.val = val;
  return e;
}

EventMarker push_ev(const Context &c) {
  EventMarker e;
  e.kind = EvKind::Push;
  e.proc = c.proc;
  e.id = c.id.value_or(0);
  return e;
}

EventMarker pop_ev(const Context &c) {
  EventMarker e = push_ev(c);
  e.kind = EvKind::Pop;
  return e;
}

std::string to_string(const EventMarker &e) {
  switch (e.kind) {
  case EvKind::Call: return "callEv(" + e.proc + ", " + e.arg.str() + ", " + e.id.str() + ")";
  case EvKind::Ret: return "retEv(" + e.val.str() + ")";
  default: return to_string(e.kind) + "(" + to_string(e.ctx()) + ")";
  }
}

std::string to_string(const Trace &t) {
  std::string out;
  for (const auto &entry : t) {
    if (!out.empty()) out += " ";
    out += is_state(entry) ? to_string(state_of(entry)) : to_string(event_of(entry));
  }
  return out.empty() ? "eps" : out;
}

Trace singleton(const State &s) { return Trace{s}; }

const State &first_state(const Trace &t) {
  if (t.empty() || !is_state(t.front())) throw Error("precondition", "trace must start with a state");
  return state_of(t.front());
}

const State &last_state(const Trace &t) {
  if (t.empty() || !is_state(t.back())) throw Error("precondition", "trace must end with a state");
  return state_of(t.back());
}

Trace chop(const Trace &t1, const Trace &t2) {
  const State &l = last_state(t1);
  const State &f = first_state(t2);
  if (l != f)
    throw Error("chop-undefined", "chop undefined: " + to_string(l) + " vs " + to_string(f));
  Trace out = t1;
  out.insert(out.end(), t2.begin() + 1, t2.end());
  return out;
}

void chop_append(Trace &t1, const Trace &t2) {
  const State &l = last_state(t1);
  const State &f = first_state(t2);
  if (l != f)
    throw Error("chop-undefined", "chop undefined: " + to_string(l) + " vs " + to_string(f));
  t1.insert(t1.end(), t2.begin() + 1, t2.end());
}

Trace concat(const Trace &t1, const Trace &t2) {
  Trace out = t1;
  out.insert(out.end(), t2.begin(), t2.end());
  return out;
}

Trace event_trace(const State &s, const EventMarker &ev) { return Trace{s, ev, s}; }

std::optional<EventMarker> last_event(const Trace &t) {
  if (t.empty()) throw Error("empty-trace", "last_event of the empty trace");
  for (auto it = t.rbegin(); it != t.rend(); ++it)
    if (!is_state(*it)) return event_of(*it);
  return std::nullopt;
}

Context curr_ctx(const Trace &t) {
  if (t.empty()) throw Error("empty-trace", "curr_ctx of the empty trace");
  std::size_t end = t.size();
  while (true) {
    std::optional<std::size_t> last;
    for (std::size_t i = end; i-- > 0;) {
      if (is_state(t[i])) continue;
      auto k = event_of(t[i]).kind;
      if (k == EvKind::Push || k == EvKind::Pop) {
        last = i;
        break;
      }
    }
    if (!last) return main_context();
    const EventMarker &ev = event_of(t[*last]);
    if (ev.kind == EvKind::Push) return ev.ctx();
    std::optional<std::size_t> open;
    for (std::size_t i = *last; i-- > 0;) {
      if (is_state(t[i])) continue;
      const EventMarker &p = event_of(t[i]);
      if (p.kind == EvKind::Push && p.ctx() == ev.ctx()) {
        open = i;
        break;
      }
    }
    if (!open)
      throw Error("malformed-nesting", "popEv" + to_string(ev.ctx()) + " has no matching pushEv");
    end = *open;
  }
}

std::optional<std::size_t> ends_in(const Trace &t, EvKind k) {
  if (t.size() < 3 || !is_state(t.back())) return std::nullopt;
  const Entry &e = t[t.size() - 2];
  if (is_state(e) || event_of(e).kind != k) return std::nullopt;
  return t.size() - 2;
}

std::vector<std::string> event_procs(const Trace &t) {
  std::vector<std::string> out(t.size());
  std::vector<Context> stack;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (is_state(t[i])) continue;
    const EventMarker &e = event_of(t[i]);
    switch (e.kind) {
    case EvKind::Call: out[i] = e.proc; break;
    case EvKind::Ret:
      if (!stack.empty()) out[i] = stack.back().proc;
      break;
    case EvKind::Push:
      out[i] = e.proc;
      stack.push_back(e.ctx());
      break;
    case EvKind::Pop:
      out[i] = e.proc;
      if (!stack.empty()) stack.pop_back();
      break;
    }
  }
  return out;
}

SchemaAtom gap(std::set<EvKind> excluded, std::optional<std::string> proc) {
  SchemaAtom a;
  a.kind = SchemaAtomKind::Gap;
  a.excluded = std::move(excluded);
  a.proc = std::move(proc);
  return a;
}

SchemaAtom event_atom(EventPattern p) {
  SchemaAtom a;
  a.kind = SchemaAtomKind::Event;
  a.pattern = std::move(p);
  return a;
}

namespace {

bool pattern_matches(const EventPattern &p, const EventMarker &e, const std::string &proc) {
  if (p.kind && *p.kind != e.kind) return false;
  if (p.proc && *p.proc != proc) return false;
  if (p.id && (e.kind == EvKind::Ret || *p.id != e.id)) return false;
  if (p.value) {
    if (e.kind == EvKind::Call && *p.value != e.arg) return false;
    if (e.kind == EvKind::Ret && *p.value != e.val) return false;
    if (e.kind == EvKind::Push || e.kind == EvKind::Pop) return false;
  }
  return true;
}

bool well_shaped(const Trace &t) {
  if (t.empty() || !is_state(t.front()) || !is_state(t.back())) return false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (is_state(t[i])) continue;
    if (i + 1 >= t.size() || !is_state(t[i + 1]) || !is_state(t[i - 1])) return false;
    if (state_of(t[i - 1]) != state_of(t[i + 1])) return false;
  }
  return true;
}

}  // namespace

bool matches(const Trace &t, const TraceSchema &schema) {
  if (schema.empty() || !well_shaped(t)) return false;
  auto procs = event_procs(t);
  std::size_t n = t.size();
  std::vector<bool> reach(n, false);
  reach[0] = true;
  for (const auto &atom : schema) {
    std::vector<bool> next(n, false);
    for (std::size_t a = 0; a < n; ++a) {
      if (!reach[a] || !is_state(t[a])) continue;
      if (atom.kind == SchemaAtomKind::Event) {
        if (a + 2 < n && !is_state(t[a + 1]) &&
            pattern_matches(atom.pattern, event_of(t[a + 1]), procs[a + 1]))
          next[a + 2] = true;
        continue;
      }
      std::size_t b = a;
      next[b] = true;
      while (b + 1 < n) {
        if (is_state(t[b + 1])) {
          ++b;
        } else {
          const EventMarker &e = event_of(t[b + 1]);
          bool blocked = atom.excluded.count(e.kind) && (!atom.proc || *atom.proc == procs[b + 1]);
          if (blocked) break;
          b += 2;
        }
        next[b] = true;
      }
    }
    reach = std::move(next);
  }
  return reach[n - 1];
}

namespace {

enum class Pending { None, Call, Ret, RetRes };

AdequacyVerdict violation(int clause, std::size_t pos, std::string reason) {
  return AdequacyVerdict{false, clause, pos, std::move(reason)};
}

}  // namespace

AdequacyVerdict is_adequate(const Trace &t, bool lenient) {
  if (t.empty()) return violation(0, 0, "empty trace");
  if (!is_state(t.front())) return violation(0, 0, "trace must start with a state");
  std::set<Int> used;
  std::optional<EvKind> last_ev;
  std::vector<Context> stack;
  Pending pending = Pending::None;
  EventMarker pending_call;
  Int pending_val;
  std::size_t i = 0;
  while (i + 1 < t.size()) {
    const State &s = state_of(t[i]);
    const Entry &next = t[i + 1];
    if (is_state(next)) {
      const State &s2 = state_of(next);
      int changed = 0;
      for (const auto &[k, v] : s) {
        auto it = s2.find(k);
        if (it == s2.end()) return violation(1, i + 1, "variable '" + k + "' removed");
        if (it->second != v) ++changed;
      }
      for (const auto &[k, v] : s2)
        if (!s.count(k)) ++changed;
      if (changed > 1) return violation(1, i + 1, "more than one variable updated");
      if (!lenient) {
        if (pending == Pending::Call) return violation(4, i + 1, "update after callEv");
        if (pending == Pending::RetRes) return violation(5, i + 1, "update after result binding");
        if (pending == Pending::Ret) {
          if (stack.empty()) return violation(5, i + 1, "retEv in main context");
          if (s2 != update_state(s, res_name(*stack.back().id), pending_val))
            return violation(5, i + 1, "retEv not followed by result binding");
        }
      }
      pending = pending == Pending::Ret ? Pending::RetRes : Pending::None;
      i += 1;
      continue;
    }
    if (i + 2 >= t.size() || !is_state(t[i + 2]) || state_of(t[i + 2]) != s)
      return violation(0, i + 1, "event not flanked by equal states");
    const EventMarker &ev = event_of(next);
    bool after_call_or_ret = last_ev == EvKind::Call || last_ev == EvKind::Ret;
    switch (ev.kind) {
    case EvKind::Call:
      if (!lenient && pending == Pending::Call) return violation(4, i + 1, "callEv after callEv");
      if (!lenient && pending != Pending::None) return violation(5, i + 1, "callEv after retEv");
      if (after_call_or_ret) return violation(2, i + 1, "callEv after callEv/retEv");
      if (used.count(ev.id)) return violation(2, i + 1, "call id " + ev.id.str() + " reused");
      used.insert(ev.id);
      pending = Pending::Call;
      pending_call = ev;
      break;
    case EvKind::Ret:
      if (!lenient && pending == Pending::Call) return violation(4, i + 1, "retEv after callEv");
      if (!lenient && pending != Pending::None) return violation(5, i + 1, "retEv after retEv");
      if (after_call_or_ret) return violation(3, i + 1, "retEv after callEv/retEv");
      pending = Pending::Ret;
      pending_val = ev.val;
      break;
    case EvKind::Push:
      if (!lenient && (pending == Pending::Ret || pending == Pending::RetRes))
        return violation(5, i + 1, "pushEv after retEv");
      if (pending != Pending::Call || pending_call.proc != ev.proc || pending_call.id != ev.id)
        return violation(4, i + 1, "pushEv not preceded by matching callEv");
      stack.push_back(ev.ctx());
      pending = Pending::None;
      break;
    case EvKind::Pop:
      if (!lenient && pending == Pending::Call) return violation(4, i + 1, "popEv after callEv");
      if (pending != Pending::RetRes && !(lenient && pending == Pending::Ret))
        return violation(5, i + 1, "popEv not preceded by retEv");
      if (stack.empty() || stack.back() != ev.ctx())
        return violation(5, i + 1, "popEv does not match the current context");
      stack.pop_back();
      pending = Pending::None;
      break;
    }
    last_ev = ev.kind;
    i += 2;
  }
  if (!is_state(t.back())) return violation(0, t.size() - 1, "trace must end with a state");
  return AdequacyVerdict{};
}

}  // namespace tracelet
