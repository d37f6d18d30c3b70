#pragma once

#include "tracelet/prover.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tracelet {

struct ValidateOptions {
  std::size_t samples = 26;
  std::uint64_t seed = 0;
  Int lo = 0;
  Int hi = 25;
  std::uint64_t fuel = 1000000;
  /// Directory for per-sample trace files; empty writes none.
  std::string trace_dir;
};

struct SampleVerdict {
  Int n;
  std::uint64_t seed = 0;
  bool pass = false;
  /// "member", "non-member", "wrong-result", "fuel-exhausted" or "error".
  std::string verdict;
  std::string trace_file;
  std::string detail;
};

struct ValidationReport {
  std::string contract;
  std::string program;
  std::uint64_t seed = 0;
  Int lo, hi;
  /// Sampled values outside pre, not executed.
  std::vector<Int> flagged;
  std::vector<SampleVerdict> samples;
  bool pass = false;
  bool vacuous = false;
  std::optional<SampleVerdict> counterexample;
};

/// The sampled n values: all of lo..hi when `samples` covers the range,
/// otherwise `samples` distinct values drawn with `seed`, ascending.
std::vector<Int> sample_values(const ValidateOptions &opt);

/// Trace of `x = m(n)` from {x: 0} with the final assignment step removed.
Trace call_trace(const LookupTable &g, const std::string &m, const Int &n, std::uint64_t fuel);
/// Phi_m(n, 0) ** [res(0) == f_m(n)].
FormulaPtr validation_formula(const ContractAssumption &c, const Int &n);

ValidationReport validate_contract(const LookupTable &g, const ContractAssumption &c,
                                   const ValidateOptions &opt, const std::string &program_name = "");
std::string report_to_json(const ValidationReport &r, int indent = 1);
std::string report_to_text(const ValidationReport &r);

/// Differential check of one sequent: random valuations satisfying the facts
/// drive the interpreter on the goal judgment, whose trace must lie in the
/// goal formula.
struct SequentSampling {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::optional<std::string> failure;
};

/// Formula variables the goal program never assigns are bound logically; the
/// others are read from the trace states.
SequentSampling sample_sequent(const Sequent &s, const ProofContext &ctx, std::uint64_t seed,
                               std::size_t samples, std::uint64_t fuel = 100000);

/// Runs sample_sequent on every node; stops at the first failing node.
struct TreeSampling {
  std::size_t nodes = 0;
  std::size_t checked = 0;
  std::optional<std::vector<std::size_t>> failing_path;
  std::string failure;
};

TreeSampling sample_tree(const ProofNode &root, const ProofContext &ctx, std::uint64_t seed,
                         std::size_t samples_per_node);

}  // namespace tracelet
