#pragma once

#include "tracelet/prover.hpp"

#include <string>
#include <vector>

namespace tracelet {

/// A self-contained proof: the claim, the sources it depends on and the tree.
struct ProofDocument {
  std::string program;
  std::string contracts;
  bool extensions = false;
  std::string claim;
  ProofNode root;
};

/// Parses the program and contract sources into a rule context.
ProofContext make_context(const std::string &program, const std::string &contracts,
                          bool extensions);

std::string proof_to_json(const ProofDocument &doc, int indent = 1);
/// Throws Error("bad-proof") on malformed documents and Error("syntax") on
/// unparsable sequents.
ProofDocument proof_from_json(const std::string &text);
ProofDocument read_proof_file(const std::string &path);
void write_proof_file(const std::string &path, const ProofDocument &doc);

struct CheckResult {
  bool valid = false;
  bool closed = false;
  /// Child indices from the root to the first invalid node.
  std::vector<std::size_t> path;
  std::string reason;
};

std::string path_string(const std::vector<std::size_t> &path);

/// Replays every recorded rule application and compares the premises with the
/// recorded children. `claim`, if non-empty, must print like the root sequent.
CheckResult check_proof(const ProofNode &root, const ProofContext &ctx,
                        const std::string &claim = "");
CheckResult check_proof(const ProofDocument &doc);

}  // namespace tracelet
