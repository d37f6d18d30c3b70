#pragma once

#include "tracelet/expr.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace tracelet {

/// Partial map from variable names to values; undefined variables are absent.
using State = std::map<std::string, Int>;

State update_state(const State &s, const std::string &x, const Int &v);
Lookup state_lookup(const State &s);
/// Throws Error("undefined-variable").
Int eval_expr(const State &s, const ExprPtr &e);
std::string to_string(const State &s);

/// A call context; `id` is empty for the main context (main, nul).
struct Context {
  std::string proc = "main";
  std::optional<Int> id;

  bool is_main() const { return !id.has_value(); }
  bool operator==(const Context &o) const { return proc == o.proc && id == o.id; }
  bool operator!=(const Context &o) const { return !(*this == o); }
};

Context main_context();
std::string to_string(const Context &c);

enum class EvKind { Call, Ret, Push, Pop };

std::string to_string(EvKind k);

/// callEv(proc, arg, id), retEv(val), pushEv((proc, id)) or popEv((proc, id)).
struct EventMarker {
  EvKind kind = EvKind::Call;
  std::string proc;
  Int arg;
  Int id;
  Int val;

  Context ctx() const { return Context{proc, id}; }
  bool operator==(const EventMarker &o) const;
  bool operator!=(const EventMarker &o) const { return !(*this == o); }
};

EventMarker call_ev(const std::string &m, const Int &arg, const Int &id);
EventMarker ret_ev(const Int &val);
EventMarker push_ev(const Context &c);
EventMarker pop_ev(const Context &c);
std::string to_string(const EventMarker &e);

using Entry = std::variant<State, EventMarker>;
using Trace = std::vector<Entry>;

inline bool is_state(const Entry &e) { return std::holds_alternative<State>(e); }
inline const State &state_of(const Entry &e) { return std::get<State>(e); }
inline const EventMarker &event_of(const Entry &e) { return std::get<EventMarker>(e); }

std::string to_string(const Trace &t);

Trace singleton(const State &s);
/// Throws Error("precondition") on empty traces.
const State &first_state(const Trace &t);
const State &last_state(const Trace &t);

/// Semantic chop; throws Error("chop-undefined") when the boundary states differ.
Trace chop(const Trace &t1, const Trace &t2);
/// In-place chop of `t2` onto `t1`.
void chop_append(Trace &t1, const Trace &t2);
Trace concat(const Trace &t1, const Trace &t2);
/// The trio <s> . ev . s.
Trace event_trace(const State &s, const EventMarker &ev);

/// Rightmost event entry; throws Error("empty-trace").
std::optional<EventMarker> last_event(const Trace &t);
/// Throws Error("malformed-nesting") when a popEv has no matching pushEv.
Context curr_ctx(const Trace &t);
/// Index of the event entry when the trace ends in an event trio of kind `k`.
std::optional<std::size_t> ends_in(const Trace &t, EvKind k);

/// For each entry: the procedure an event involves (retEv resolves through the
/// context it returns from); empty for states and unresolvable retEv.
std::vector<std::string> event_procs(const Trace &t);

struct EventPattern {
  std::optional<EvKind> kind;
  std::optional<std::string> proc;
  std::optional<Int> id;
  std::optional<Int> value;
};

enum class SchemaAtomKind { Event, Gap };

/// An event literal (matches one trio) or a gap (any segment free of the
/// excluded kinds, optionally only counting events of `proc`).
struct SchemaAtom {
  SchemaAtomKind kind = SchemaAtomKind::Gap;
  EventPattern pattern;
  std::set<EvKind> excluded;
  std::optional<std::string> proc;
};

using TraceSchema = std::vector<SchemaAtom>;

SchemaAtom gap(std::set<EvKind> excluded = {}, std::optional<std::string> proc = {});
SchemaAtom event_atom(EventPattern p);
/// Atoms compose by chop.
bool matches(const Trace &t, const TraceSchema &schema);

struct AdequacyVerdict {
  bool adequate = true;
  int clause = 0;
  std::size_t position = 0;
  std::string reason;
};

/// Clause 0 reports shape errors; clauses 1 to 5 follow the adequacy definition.
AdequacyVerdict is_adequate(const Trace &t, bool lenient = false);

}  // namespace tracelet
