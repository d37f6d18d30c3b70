#include "tracelet/proof_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tracelet {

using json = nlohmann::json;

ProofContext make_context(const std::string &program, const std::string &contracts,
                          bool extensions) {
  ProofContext ctx;
  Program p = parse_program(program);
  auto diags = well_formed(p);
  if (!diags.empty())
    throw Error(diags.front().kind, std::to_string(diags.front().pos.line) + ":" +
                                        std::to_string(diags.front().pos.col) + ": " +
                                        diags.front().message);
  ctx.procs = lookup_table(p);
  if (!contracts.empty()) ctx.contracts = read_contracts(contracts);
  ctx.extensions = extensions;
  return ctx;
}

std::string path_string(const std::vector<std::size_t> &path) {
  std::string out = "root";
  for (std::size_t k : path) out += "." + std::to_string(k);
  return out;
}

namespace {

json node_json(const ProofNode &n) {
  json j{{"sequent", to_string(n.sequent)}, {"status", is_closed(n) ? "closed" : "open"}};
  j["rule"] = n.rule.empty() ? json(nullptr) : json(n.rule);
  j["args"] = json(n.args);
  json children = json::array();
  for (const auto &c : n.children) children.push_back(node_json(c));
  j["children"] = children;
  if (!n.note.empty()) j["note"] = n.note;
  return j;
}

[[noreturn]] void bad(const std::vector<std::size_t> &path, const std::string &msg) {
  throw Error("bad-proof", path_string(path) + ": " + msg);
}

ProofNode node_from(const json &j, std::vector<std::size_t> &path) {
  if (!j.is_object()) bad(path, "node is not an object");
  ProofNode n;
  auto seq = j.find("sequent");
  if (seq == j.end() || !seq->is_string()) bad(path, "missing sequent");
  try {
    n.sequent = parse_sequent(seq->get<std::string>());
  } catch (const Error &e) {
    bad(path, std::string("unparsable sequent: ") + e.what());
  }
  if (auto r = j.find("rule"); r != j.end() && !r->is_null()) {
    if (!r->is_string()) bad(path, "rule is not a string");
    n.rule = r->get<std::string>();
  }
  if (auto a = j.find("args"); a != j.end() && !a->is_null()) {
    if (!a->is_object()) bad(path, "args is not an object");
    for (const auto &[k, v] : a->items()) {
      if (!v.is_string()) bad(path, "argument '" + k + "' is not a string");
      n.args[k] = v.get<std::string>();
    }
  }
  if (auto c = j.find("children"); c != j.end()) {
    if (!c->is_array()) bad(path, "children is not an array");
    for (std::size_t k = 0; k < c->size(); ++k) {
      path.push_back(k);
      n.children.push_back(node_from((*c)[k], path));
      path.pop_back();
    }
  }
  if (auto note = j.find("note"); note != j.end() && note->is_string()) n.note = note->get<std::string>();
  return n;
}

bool replay(const ProofNode &n, const ProofContext &ctx, std::vector<std::size_t> &path,
            CheckResult &out) {
  auto fail = [&](const std::string &reason) {
    out.valid = false;
    out.path = path;
    out.reason = reason;
    return false;
  };
  if (n.rule.empty()) {
    if (!n.children.empty()) return fail("open goal with children");
    return true;
  }
  std::vector<Sequent> premises;
  RuleArgs args = n.args;
  try {
    premises = apply_rule(n.rule, n.sequent, args, ctx);
  } catch (const Error &e) {
    return fail(n.rule + " does not apply (" + e.kind() + "): " + e.what());
  }
  if (premises.size() != n.children.size())
    return fail(n.rule + " yields " + std::to_string(premises.size()) + " premises, " +
                std::to_string(n.children.size()) + " recorded");
  for (std::size_t k = 0; k < premises.size(); ++k) {
    std::string expected = to_string(premises[k]);
    std::string recorded = to_string(n.children[k].sequent);
    if (expected != recorded) {
      path.push_back(k);
      fail("premise " + std::to_string(k) + " of " + n.rule + " should be '" + expected +
           "' but is '" + recorded + "'");
      path.pop_back();
      return false;
    }
  }
  for (std::size_t k = 0; k < n.children.size(); ++k) {
    path.push_back(k);
    bool ok = replay(n.children[k], ctx, path, out);
    path.pop_back();
    if (!ok) return false;
  }
  return true;
}

}  // namespace

std::string proof_to_json(const ProofDocument &doc, int indent) {
  json j{{"format", "tracelet-proof"},
         {"version", 1},
         {"claim", doc.claim},
         {"extensions", doc.extensions},
         {"program", doc.program},
         {"contracts", doc.contracts},
         {"closed", is_closed(doc.root)},
         {"root", node_json(doc.root)}};
  return j.dump(indent);
}

ProofDocument proof_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw Error("bad-proof", std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "tracelet-proof")
      throw Error("bad-proof", "not a tracelet proof document");
    ProofDocument doc;
    doc.claim = j.value("claim", "");
    doc.program = j.value("program", "");
    doc.contracts = j.value("contracts", "");
    doc.extensions = j.value("extensions", false);
    auto root = j.find("root");
    if (root == j.end()) throw Error("bad-proof", "missing root");
    std::vector<std::size_t> path;
    doc.root = node_from(*root, path);
    return doc;
  } catch (const json::exception &e) {
    throw Error("bad-proof", std::string("malformed proof document: ") + e.what());
  }
}

ProofDocument read_proof_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return proof_from_json(ss.str());
}

void write_proof_file(const std::string &path, const ProofDocument &doc) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << proof_to_json(doc) << "\n";
}

CheckResult check_proof(const ProofNode &root, const ProofContext &ctx, const std::string &claim) {
  CheckResult out;
  out.valid = true;
  if (!claim.empty()) {
    std::string want;
    try {
      want = to_string(parse_sequent(claim));
    } catch (const Error &e) {
      out.valid = false;
      out.reason = std::string("unparsable claim: ") + e.what();
      return out;
    }
    if (want != to_string(root.sequent)) {
      out.valid = false;
      out.reason = "root sequent '" + to_string(root.sequent) + "' differs from the claim '" + want + "'";
      return out;
    }
  }
  std::vector<std::size_t> path;
  if (!replay(root, ctx, path, out)) return out;
  out.closed = is_closed(root);
  if (!out.closed) {
    auto goals = open_goals(root);
    out.reason = std::to_string(goals.size()) + " open goal(s)";
  }
  return out;
}

CheckResult check_proof(const ProofDocument &doc) {
  if (doc.claim.empty()) {
    CheckResult out;
    out.reason = "document has no claim";
    return out;
  }
  ProofContext ctx = make_context(doc.program, doc.contracts, doc.extensions);
  return check_proof(doc.root, ctx, doc.claim);
}

}  // namespace tracelet
