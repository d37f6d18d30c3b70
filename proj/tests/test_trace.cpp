#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/oracles.hpp"
#include "tracelet/interp.hpp"
#include "tracelet/trace.hpp"
#include "tracelet/trace_json.hpp"

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

/// Index of the k-th event of the given kind.
std::size_t nth_event(const Trace &t, EvKind kind, int k) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!is_state(t[i]) && event_of(t[i]).kind == kind && k-- == 0) return i;
  FAIL("event not found");
  return 0;
}

State st(std::initializer_list<std::pair<const std::string, Int>> kv) { return State(kv); }

}  // namespace

TEST_CASE("chop") {
  State s = st({{"x", 0}});
  State s1 = st({{"x", 1}});
  Trace a{s, s1};
  Trace b{s1, st({{"x", 2}})};
  Trace ab = chop(a, b);
  REQUIRE(ab.size() == 3);
  CHECK(state_of(ab[2]).at("x") == 2);
  CHECK(chop(singleton(s), a) == a);
  CHECK(chop(a, singleton(s1)) == a);
  CHECK(error_kind([&] { chop(b, a); }) == "chop-undefined");
  CHECK(error_kind([&] { chop(Trace{}, a); }) == "precondition");
  CHECK(concat(a, b).size() == 4);
}

TEST_CASE("event trio and last event") {
  State s = st({{"x", 0}});
  Trace t = event_trace(s, call_ev("m", 1, 0));
  REQUIRE(t.size() == 3);
  CHECK(state_of(t[0]) == state_of(t[2]));
  CHECK(last_event(t)->kind == EvKind::Call);
  CHECK(!last_event(singleton(s)));
  CHECK(ends_in(t, EvKind::Call) == std::optional<std::size_t>(1));
  CHECK(!ends_in(t, EvKind::Push));
}

TEST_CASE("current context follows push and pop") {
  Trace g = oracle::golden_m1();
  CHECK(curr_ctx(g).is_main());
  std::size_t p1 = nth_event(g, EvKind::Push, 1);
  Trace prefix(g.begin(), g.begin() + static_cast<long>(p1) + 2);
  CHECK(curr_ctx(prefix) == Context{"m", Int(1)});
  std::size_t q1 = nth_event(g, EvKind::Pop, 0);
  Trace prefix2(g.begin(), g.begin() + static_cast<long>(q1) + 2);
  CHECK(curr_ctx(prefix2) == Context{"m", Int(0)});
  State s = st({});
  CHECK(error_kind([&] { curr_ctx(event_trace(s, pop_ev(Context{"m", Int(0)}))); }) == "malformed-nesting");
}

TEST_CASE("event procedures resolve retEv through the context") {
  Trace g = oracle::golden_m1();
  auto procs = event_procs(g);
  CHECK(procs[nth_event(g, EvKind::Ret, 0)] == "m");
  CHECK(procs[0].empty());
}

TEST_CASE("schematic matching") {
  Trace g = oracle::golden_m1();
  TraceSchema any{gap()};
  CHECK(matches(g, any));
  TraceSchema framed{event_atom({EvKind::Call, "m", Int(0), {}}), gap(),
                     event_atom({EvKind::Pop, "m", Int(0), {}}), gap()};
  CHECK(matches(g, framed));
  TraceSchema wrong_id{event_atom({EvKind::Call, "m", Int(1), {}}), gap()};
  CHECK(!matches(g, wrong_id));
  Trace core(g.begin(), g.end() - 1);
  TraceSchema framed2{event_atom({EvKind::Call, "m", Int(0), {}}), gap(),
                      event_atom({EvKind::Pop, "m", Int(0), {}})};
  CHECK(matches(core, framed2));
  TraceSchema no_calls{gap({EvKind::Call})};
  CHECK(!matches(core, no_calls));
}

TEST_CASE("singleton and interpreter traces are adequate") {
  CHECK(is_adequate(singleton(st({{"x", 3}}))).adequate);
  CHECK(is_adequate(oracle::golden_m1()).adequate);
  CHECK(is_adequate(oracle::golden_m0_two_if()).adequate);
  CHECK(is_adequate(oracle::golden_m1(), true).adequate);
}

TEST_CASE("empty trace is a precondition violation") {
  AdequacyVerdict v = is_adequate(Trace{});
  CHECK(!v.adequate);
  CHECK(v.clause == 0);
}

TEST_CASE("double update violates clause 1") {
  State s = st({{"x", 0}, {"y", 0}, {"z", 0}});
  Trace t{s, update_state(s, "x", 1), st({{"x", 1}, {"y", 2}, {"z", 3}})};
  for (bool lenient : {false, true}) {
    AdequacyVerdict v = is_adequate(t, lenient);
    CHECK(!v.adequate);
    CHECK(v.clause == 1);
    CHECK(v.position == 2);
  }
}

TEST_CASE("adequacy mutation suite") {
  const Trace g = oracle::golden_m1();

  SUBCASE("duplicate call id") {
    Trace t = g;
    std::size_t c1 = nth_event(t, EvKind::Call, 1);
    EventMarker e = event_of(t[c1]);
    e.id = 0;
    t[c1] = e;
    AdequacyVerdict v = is_adequate(t);
    CHECK(v.clause == 2);
    CHECK(v.position == c1);
    CHECK(is_adequate(t, true).clause == 2);
  }
  SUBCASE("push without call") {
    Trace t = g;
    std::size_t c0 = nth_event(t, EvKind::Call, 0);
    t.erase(t.begin() + static_cast<long>(c0), t.begin() + static_cast<long>(c0) + 2);
    AdequacyVerdict v = is_adequate(t);
    CHECK(v.clause == 4);
    CHECK(is_adequate(t, true).clause == 4);
  }
  SUBCASE("pop in the wrong context") {
    Trace t = g;
    std::size_t p0 = nth_event(t, EvKind::Pop, 0);
    t[p0] = pop_ev(Context{"m", Int(0)});
    AdequacyVerdict v = is_adequate(t);
    CHECK(v.clause == 5);
    CHECK(v.position == p0);
    CHECK(is_adequate(t, true).clause == 5);
  }
  SUBCASE("event after callEv") {
    Trace t = g;
    std::size_t c0 = nth_event(t, EvKind::Call, 0);
    State s = state_of(t[c0 + 1]);
    Trace extra = event_trace(s, ret_ev(0));
    t.insert(t.begin() + static_cast<long>(c0) + 2, extra.begin() + 1, extra.end());
    AdequacyVerdict v = is_adequate(t);
    CHECK(v.clause == 4);
    CHECK(v.position == c0 + 2);
    CHECK(is_adequate(t, true).clause == 3);
  }
  SUBCASE("update after callEv") {
    Trace t = g;
    std::size_t c0 = nth_event(t, EvKind::Call, 0);
    State s = state_of(t[c0 + 1]);
    t.insert(t.begin() + static_cast<long>(c0) + 2, update_state(s, "x", 5));
    CHECK(is_adequate(t).clause == 4);
  }
  SUBCASE("retEv not followed by popEv") {
    Trace t = g;
    std::size_t q0 = nth_event(t, EvKind::Pop, 0);
    t.erase(t.begin() + static_cast<long>(q0), t.begin() + static_cast<long>(q0) + 2);
    AdequacyVerdict v = is_adequate(t);
    CHECK(!v.adequate);
    CHECK(v.clause == 5);
  }
  SUBCASE("callEv directly after retEv") {
    Trace t = g;
    std::size_t r0 = nth_event(t, EvKind::Ret, 0);
    State s = state_of(t[r0 + 1]);
    Trace extra = event_trace(s, call_ev("m", 0, 7));
    t.insert(t.begin() + static_cast<long>(r0) + 2, extra.begin() + 1, extra.end());
    CHECK(is_adequate(t).clause == 5);
    CHECK(is_adequate(t, true).clause == 2);
  }
  SUBCASE("event not flanked by equal states") {
    Trace t = g;
    std::size_t c0 = nth_event(t, EvKind::Call, 0);
    t[c0 + 1] = update_state(state_of(t[c0 + 1]), "x", 9);
    CHECK(is_adequate(t).clause == 0);
  }
}

TEST_CASE("json round trip") {
  Trace g = oracle::golden_m1();
  CHECK(trace_from_json(trace_to_json(g)) == g);
  Trace big{st({{"x", Int("-99999999999999999999999")}})};
  std::string text = trace_to_json(big);
  CHECK(text.find("\"-99999999999999999999999\"") != std::string::npos);
  CHECK(trace_from_json(text) == big);
  CHECK(error_kind([] { trace_from_json("[{\"bogus\": 1}]"); }) == "trace-format");
  CHECK(error_kind([] { trace_from_json("not json"); }) == "trace-format");
}

TEST_CASE("json file round trip") {
  std::string path = oracle::temp_dir() + "/g.trace.json";
  write_trace_file(path, oracle::golden_m0_two_if());
  CHECK(read_trace_file(path) == oracle::golden_m0_two_if());
}

TEST_CASE("random well-shaped traces survive json") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    Trace t = oracle::random_trace(rng, st({{"x", 0}, {"y", 0}}), 12);
    CAPTURE(to_string(t));
    AdequacyVerdict v = is_adequate(t, true);
    CHECK((v.adequate || v.clause != 0));
    CHECK(trace_from_json(trace_to_json(t)) == t);
  }
}
