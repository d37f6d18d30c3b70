#include "tracelet/trace_json.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <sstream>

namespace tracelet {

using json = nlohmann::json;

namespace {

json int_json(const Int &v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return json(static_cast<std::int64_t>(v));
  return json(v.str());
}

Int int_from(const json &j, const char *what) {
  if (j.is_number_integer()) return Int(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return Int(j.get<std::uint64_t>());
  if (j.is_string()) {
    try {
      return Int(j.get<std::string>());
    } catch (const std::exception &) {
    }
  }
  throw Error("trace-format", std::string("expected integer for '") + what + "'");
}

const json &field(const json &obj, const char *name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error("trace-format", std::string("missing field '") + name + "'");
  return *it;
}

EvKind kind_from(const std::string &s) {
  if (s == "callEv") return EvKind::Call;
  if (s == "retEv") return EvKind::Ret;
  if (s == "pushEv") return EvKind::Push;
  if (s == "popEv") return EvKind::Pop;
  throw Error("trace-format", "unknown event kind '" + s + "'");
}

}  // namespace

std::string trace_to_json(const Trace &t, int indent) {
  json arr = json::array();
  for (const auto &entry : t) {
    if (is_state(entry)) {
      json s = json::object();
      for (const auto &[k, v] : state_of(entry)) s[k] = int_json(v);
      arr.push_back(json{{"state", s}});
      continue;
    }
    const EventMarker &e = event_of(entry);
    json ev{{"kind", to_string(e.kind)}};
    switch (e.kind) {
    case EvKind::Call:
      ev["proc"] = e.proc;
      ev["arg"] = int_json(e.arg);
      ev["id"] = int_json(e.id);
      break;
    case EvKind::Ret: ev["val"] = int_json(e.val); break;
    default:
      ev["proc"] = e.proc;
      ev["id"] = int_json(e.id);
      break;
    }
    arr.push_back(json{{"event", ev}});
  }
  return arr.dump(indent) + "\n";
}

Trace trace_from_json(const std::string &text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error("trace-format", std::string("invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw Error("trace-format", "trace must be a JSON array");
  Trace t;
  for (const auto &item : arr) {
    if (!item.is_object()) throw Error("trace-format", "trace entry must be an object");
    if (item.contains("state")) {
      State s;
      const json &obj = item["state"];
      if (!obj.is_object()) throw Error("trace-format", "state must be an object");
      for (auto it = obj.begin(); it != obj.end(); ++it) s[it.key()] = int_from(it.value(), "state");
      t.push_back(std::move(s));
      continue;
    }
    const json &ev = field(item, "event");
    EventMarker e;
    e.kind = kind_from(field(ev, "kind").get<std::string>());
    switch (e.kind) {
    case EvKind::Call:
      e.proc = field(ev, "proc").get<std::string>();
      e.arg = int_from(field(ev, "arg"), "arg");
      e.id = int_from(field(ev, "id"), "id");
      break;
    case EvKind::Ret: e.val = int_from(field(ev, "val"), "val"); break;
    default:
      e.proc = field(ev, "proc").get<std::string>();
      e.id = int_from(field(ev, "id"), "id");
      break;
    }
    t.push_back(e);
  }
  return t;
}

Trace read_trace_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return trace_from_json(ss.str());
}

void write_trace_file(const std::string &path, const Trace &t) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << trace_to_json(t);
}

}  // namespace tracelet
