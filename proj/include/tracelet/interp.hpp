#pragma once

#include "tracelet/lang.hpp"
#include "tracelet/trace.hpp"

#include <cstdint>

namespace tracelet {

/// 10^6 unless TRACELET_FUEL holds a positive integer.
std::uint64_t default_fuel();

/// Fresh call ids and local-variable suffixes for one run.
struct Allocator {
  Int next_id = 0;
  Int next_fresh = 1;
};

/// Allocator continuing after every call id in `t` and every res<k> and x#k in its
/// last state.
Allocator allocator_for(const Trace &t);

/// Shared step budget; `take` throws Error("fuel-exhausted") once spent.
struct Fuel {
  std::uint64_t left;
  explicit Fuel(std::uint64_t n) : left(n) {}
  void take();
};

/// Result of one local evaluation step; a null `cont` is the finished marker.
struct LocalResult {
  Trace trace;
  StmtPtr cont;
};

LocalResult local_eval(const State &s, const StmtPtr &stmt, Allocator &alloc,
                       const LookupTable &g, Fuel &fuel);

struct Configuration {
  Trace trace;
  StmtPtr cont;
  Allocator alloc;
  std::vector<Context> stack;
};

Configuration make_config(const Trace &t, StmtPtr cont);

enum class StepRule { Progress, Call, Return };

/// True when no composition rule applies.
bool is_final(const Configuration &c);
/// Applies the unique applicable composition rule. Throws Error("stuck").
StepRule step(Configuration &c, const LookupTable &g, Fuel &fuel);

struct RunResult {
  Trace trace;
  bool exhausted = false;
  std::string message;
};

/// Runs main from `initial` extended with zero-initialized main declarations.
RunResult run(const Program &p, const State &initial, std::uint64_t fuel);
/// The suffix t' with t, K(s) ->* t ** t', K(end). Throws Error("fuel-exhausted").
Trace run_stmt(const StmtPtr &s, const Trace &t, const LookupTable &g, Fuel &fuel);
Trace run_stmt(const StmtPtr &s, const Trace &t, const LookupTable &g, Allocator &alloc,
               Fuel &fuel);

}  // namespace tracelet
