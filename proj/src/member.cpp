#include "tracelet/formula.hpp"

#include <climits>
#include <functional>
#include <tuple>
#include <unordered_map>

namespace tracelet {

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;
constexpr long long kUnbounded = std::numeric_limits<long long>::max() / 4;

struct Frame {
  LogicalEnv beta;
  std::map<std::string, MuDefPtr> rec;
};

struct NodeKey {
  int frame;
  const Formula *f;
  std::size_t a, b;
  bool operator==(const NodeKey &o) const {
    return frame == o.frame && f == o.f && a == o.a && b == o.b;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey &k) const {
    std::size_t h = std::hash<const void *>()(k.f);
    h = h * 1000003u ^ static_cast<std::size_t>(k.frame);
    h = h * 1000003u ^ k.a;
    h = h * 1000003u ^ k.b;
    return h;
  }
};

class Member {
public:
  Member(const Trace &t, MemberStats *stats) : t_(t), stats_(stats) {
    procs_ = event_procs(t);
    state_.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) state_[i] = is_state(t[i]);
  }

  bool top(const FormulaPtr &f, const LogicalEnv &beta) {
    if (t_.empty()) return false;
    frames_.push_back(Frame{beta, {}});
    bool r = eval(f.get(), 0, 0, t_.size() - 1);
    if (stats_) stats_->memo_entries = node_memo_.size() + mu_memo_.size();
    return r;
  }

  bool eval_at(const Formula *f, int frame, std::size_t a, std::size_t b) {
    return eval(f, frame, a, b);
  }
  int root_frame() const { return 0; }

private:
  std::pair<std::size_t, std::size_t> bounds(const Formula *f) {
    if (auto it = bounds_.find(f); it != bounds_.end()) return it->second;
    std::pair<std::size_t, std::size_t> r{1, kInf};
    switch (f->kind) {
    case FKind::Pred:
    case FKind::NoEv: r = {1, 1}; break;
    case FKind::Start: r = {5, 5}; break;
    case FKind::Finish: r = {6, 6}; break;
    case FKind::RecApp:
    case FKind::MuApp: r = {1, kInf}; break;
    case FKind::And: {
      auto x = bounds(f->a.get()), y = bounds(f->b.get());
      r = {std::max(x.first, y.first), std::min(x.second, y.second)};
      break;
    }
    case FKind::Or: {
      auto x = bounds(f->a.get()), y = bounds(f->b.get());
      r = {std::min(x.first, y.first), std::max(x.second, y.second)};
      break;
    }
    case FKind::Chop: {
      auto x = bounds(f->a.get()), y = bounds(f->b.get());
      r = {x.first + y.first - 1,
           (x.second >= kInf || y.second >= kInf) ? kInf : x.second + y.second - 1};
      break;
    }
    case FKind::Concat: {
      auto x = bounds(f->a.get()), y = bounds(f->b.get());
      r = {x.first + y.first, (x.second >= kInf || y.second >= kInf) ? kInf : x.second + y.second};
      break;
    }
    }
    bounds_[f] = r;
    return r;
  }

  std::optional<Int> value(const ExprPtr &e, int frame) {
    const LogicalEnv &beta = frames_[frame].beta;
    return try_eval(e, [&](const std::string &n) -> std::optional<Int> {
      auto it = beta.find(n);
      if (it == beta.end()) return std::nullopt;
      return it->second;
    });
  }

  bool involves(std::size_t i, const std::string &m) const {
    return !state_[i] && (m.empty() ? false : procs_[i] == m);
  }

  bool psi_match(const std::string &m, std::size_t a, std::size_t b) {
    auto it = psi_prefix_.find(m);
    if (it == psi_prefix_.end()) {
      std::vector<std::size_t> pre(t_.size() + 1, 0);
      for (std::size_t i = 0; i < t_.size(); ++i) pre[i + 1] = pre[i] + (involves(i, m) ? 1 : 0);
      it = psi_prefix_.emplace(m, std::move(pre)).first;
    }
    return it->second[b + 1] == it->second[a];
  }

  const std::pair<std::vector<long long>, std::vector<long long>> &event_index(const std::string &m) {
    auto it = event_index_.find(m);
    if (it != event_index_.end()) return it->second;
    long long n = static_cast<long long>(t_.size());
    std::vector<long long> next(t_.size() + 1, n), prev(t_.size(), -1);
    for (long long i = n - 1; i >= 0; --i) next[i] = involves(i, m) ? i : next[i + 1];
    for (long long i = 0; i < n; ++i) prev[i] = involves(i, m) ? i : (i > 0 ? prev[i - 1] : -1);
    return event_index_.emplace(m, std::make_pair(std::move(next), std::move(prev))).first->second;
  }

  static bool is_psi(const Formula *f) { return f->kind == FKind::MuApp && f->mu->psi && f->args.empty(); }

  /// Largest k such that f may match [a, k]; kUnbounded if unknown.
  long long max_end(const Formula *f, long long a) {
    if (a < 0 || a >= static_cast<long long>(t_.size())) return a - 1;
    if (is_psi(f)) return event_index(*f->mu->psi).first[a] - 1;
    auto bd = bounds(f);
    if (bd.first == bd.second) return a + static_cast<long long>(bd.first) - 1;
    if (f->kind == FKind::Chop) {
      long long mid = max_end(f->a.get(), a);
      return mid == kUnbounded ? kUnbounded : max_end(f->b.get(), mid);
    }
    if (f->kind == FKind::Or) return std::max(max_end(f->a.get(), a), max_end(f->b.get(), a));
    return kUnbounded;
  }

  /// Smallest k such that f may match [k, b]; -kUnbounded if unknown.
  long long min_start(const Formula *f, long long b) {
    if (b < 0 || b >= static_cast<long long>(t_.size())) return b + 1;
    if (is_psi(f)) return event_index(*f->mu->psi).second[b] + 1;
    auto bd = bounds(f);
    if (bd.first == bd.second) return b - static_cast<long long>(bd.first) + 1;
    if (f->kind == FKind::Chop) {
      long long mid = min_start(f->b.get(), b);
      return mid == -kUnbounded ? -kUnbounded : min_start(f->a.get(), mid);
    }
    if (f->kind == FKind::Or) return std::min(min_start(f->a.get(), b), min_start(f->b.get(), b));
    return -kUnbounded;
  }

  bool eval(const Formula *f, int frame, std::size_t a, std::size_t b) {
    if (stats_) ++stats_->calls;
    std::size_t len = b - a + 1;
    auto bd = bounds(f);
    if (len < bd.first || len > bd.second) return false;
    switch (f->kind) {
    case FKind::Pred: {
      if (!state_[a]) return false;
      const State &s = state_of(t_[a]);
      auto v = try_eval_pred(s, frames_[frame].beta, f->pred);
      return v && *v;
    }
    case FKind::NoEv: return !involves(a, f->name);
    case FKind::Start: return start_match(f, frame, a);
    case FKind::Finish: return finish_match(f, frame, a);
    case FKind::RecApp: {
      auto it = frames_[frame].rec.find(f->name);
      if (it == frames_[frame].rec.end()) return false;
      return apply(it->second, f->args, frame, a, b);
    }
    case FKind::MuApp:
      if (f->mu->psi && f->args.empty()) return psi_match(*f->mu->psi, a, b);
      return apply(f->mu, f->args, frame, a, b);
    default: return composite(f, frame, a, b);
    }
  }

  bool start_match(const Formula *f, int frame, std::size_t a) {
    if (a + 4 >= t_.size() || !state_[a] || state_[a + 1] || state_[a + 3]) return false;
    const EventMarker &c = event_of(t_[a + 1]);
    const EventMarker &p = event_of(t_[a + 3]);
    if (c.kind != EvKind::Call || p.kind != EvKind::Push) return false;
    const State &s = state_of(t_[a]);
    if (!state_[a + 2] || !state_[a + 4] || state_of(t_[a + 2]) != s || state_of(t_[a + 4]) != s)
      return false;
    auto v = value(f->e, frame);
    auto id = value(f->id, frame);
    if (!v || !id) return false;
    return c.proc == f->name && c.arg == *v && c.id == *id && p.proc == f->name && p.id == *id;
  }

  bool finish_match(const Formula *f, int frame, std::size_t a) {
    if (a + 5 >= t_.size()) return false;
    for (std::size_t k : {a, a + 2, a + 3, a + 5})
      if (!state_[k]) return false;
    if (state_[a + 1] || state_[a + 4]) return false;
    const EventMarker &r = event_of(t_[a + 1]);
    const EventMarker &p = event_of(t_[a + 4]);
    if (r.kind != EvKind::Ret || p.kind != EvKind::Pop) return false;
    auto v = value(f->e, frame);
    auto id = value(f->id, frame);
    if (!v || !id || r.val != *v || p.proc != f->name || p.id != *id) return false;
    const State &s = state_of(t_[a]);
    if (state_of(t_[a + 2]) != s) return false;
    State bound = update_state(s, res_name(*id), *v);
    return state_of(t_[a + 3]) == bound && state_of(t_[a + 5]) == bound;
  }

  std::string frame_key(const MuDefPtr &def, const std::vector<Int> &vals, int outer) {
    std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(def.get()));
    for (const auto &v : vals) key += "," + v.str();
    key += "|";
    auto &fv = free_cache_[def.get()];
    if (!fv) {
      std::set<std::string> s;
      free_vars(def->body, s);
      for (const auto &p : def->params) s.erase(p);
      fv = std::make_shared<std::set<std::string>>(std::move(s));
    }
    for (const auto &name : *fv) {
      auto it = frames_[outer].beta.find(name);
      key += name + "=" + (it == frames_[outer].beta.end() ? "?" : it->second.str()) + ";";
    }
    for (const auto &[n, d] : frames_[outer].rec)
      key += n + "@" + std::to_string(reinterpret_cast<std::uintptr_t>(d.get())) + ";";
    return key;
  }

  int frame_for(const MuDefPtr &def, const std::vector<Int> &vals, int outer) {
    auto direct = std::make_tuple(def.get(), vals, outer);
    if (auto it = frame_direct_.find(direct); it != frame_direct_.end()) return it->second;
    int id = shared_frame(def, vals, outer);
    frame_direct_.emplace(std::move(direct), id);
    return id;
  }

  int shared_frame(const MuDefPtr &def, const std::vector<Int> &vals, int outer) {
    std::string key = frame_key(def, vals, outer);
    if (auto it = frame_ids_.find(key); it != frame_ids_.end()) return it->second;
    Frame fr = frames_[outer];
    for (std::size_t i = 0; i < def->params.size(); ++i) fr.beta[def->params[i]] = vals[i];
    fr.rec[def->name] = def;
    frames_.push_back(std::move(fr));
    int id = static_cast<int>(frames_.size() - 1);
    frame_ids_.emplace(key, id);
    return id;
  }

  bool apply(const MuDefPtr &def, const std::vector<ExprPtr> &args, int frame, std::size_t a,
             std::size_t b) {
    if (def->params.size() != args.size()) return false;
    std::vector<std::vector<Int>> choices(1);
    for (const auto &arg : args) {
      std::vector<Int> options;
      if (arg->kind == ExprKind::Fresh) {
        auto base = value(arg->a, frame);
        for (std::size_t k = a; k <= b; ++k) {
          if (state_[k]) continue;
          const EventMarker &e = event_of(t_[k]);
          if (e.kind == EvKind::Call && (!base || e.id != *base)) options.push_back(e.id);
        }
      } else {
        auto v = value(arg, frame);
        if (!v) return false;
        options.push_back(*v);
      }
      std::vector<std::vector<Int>> next;
      for (const auto &c : choices)
        for (const auto &o : options) {
          auto c2 = c;
          c2.push_back(o);
          next.push_back(std::move(c2));
        }
      choices = std::move(next);
    }
    for (const auto &vals : choices)
      if (apply_values(def, vals, frame, a, b)) return true;
    return false;
  }

  bool apply_values(const MuDefPtr &def, const std::vector<Int> &vals, int frame, std::size_t a,
                    std::size_t b) {
    int inner = frame_for(def, vals, frame);
    NodeKey key{inner, nullptr, a, b};
    if (auto it = mu_memo_.find(key); it != mu_memo_.end()) return it->second;
    if (auto it = on_stack_.find(key); it != on_stack_.end()) {
      min_dep_ = std::min(min_dep_, it->second);
      return false;
    }
    std::size_t depth = on_stack_.size();
    on_stack_.emplace(key, depth);
    std::size_t saved = min_dep_;
    min_dep_ = kInf;
    bool r = eval(def->body.get(), inner, a, b);
    std::size_t dep = min_dep_;
    on_stack_.erase(key);
    if (r || dep >= depth) mu_memo_.emplace(key, r);
    min_dep_ = std::min(saved, dep < depth ? dep : kInf);
    return r;
  }

  /// Tightens the split range [lo, hi] using psi segments; false if it is empty.
  /// `gap` is 0 for chop (shared split state) and 1 for concatenation.
  bool narrow(const Formula *x, const Formula *y, std::size_t a, std::size_t b, long long gap, std::size_t &lo,
              std::size_t &hi) {
    long long l = static_cast<long long>(lo), h = static_cast<long long>(hi);
    long long e = max_end(x, static_cast<long long>(a));
    if (e != kUnbounded) h = std::min(h, e);
    long long st = min_start(y, static_cast<long long>(b));
    if (st != -kUnbounded) l = std::max(l, st - gap);
    if (l > h || h < 0) return false;
    lo = static_cast<std::size_t>(l);
    hi = static_cast<std::size_t>(h);
    return true;
  }

  bool composite(const Formula *f, int frame, std::size_t a, std::size_t b) {
    NodeKey key{frame, f, a, b};
    if (auto it = node_memo_.find(key); it != node_memo_.end()) return it->second;
    std::size_t depth = on_stack_.size();
    std::size_t saved = min_dep_;
    min_dep_ = kInf;
    bool r = false;
    const Formula *x = f->a.get();
    const Formula *y = f->b.get();
    switch (f->kind) {
    case FKind::And: r = eval(x, frame, a, b) && eval(y, frame, a, b); break;
    case FKind::Or: r = eval(x, frame, a, b) || eval(y, frame, a, b); break;
    case FKind::Chop: {
      auto bx = bounds(x), by = bounds(y);
      if (b + 1 < a + by.first) break;
      std::size_t lo = a + bx.first - 1;
      if (by.second < kInf && b + 1 >= by.second) lo = std::max(lo, b + 1 - by.second);
      std::size_t hi = b + 1 - by.first;
      if (bx.second < kInf) hi = std::min(hi, a + bx.second - 1);
      if (!narrow(x, y, a, b, 0, lo, hi)) break;
      for (std::size_t k = lo; k <= hi && !r; ++k)
        r = state_[k] && eval(x, frame, a, k) && eval(y, frame, k, b);
      break;
    }
    case FKind::Concat: {
      auto bx = bounds(x), by = bounds(y);
      if (b - a + 1 < bx.first + by.first) break;
      std::size_t lo = a + bx.first - 1;
      std::size_t hi = b - by.first;
      if (bx.second < kInf) hi = std::min(hi, a + bx.second - 1);
      if (by.second < kInf && b >= by.second) lo = std::max(lo, b - by.second);
      if (!narrow(x, y, a, b, 1, lo, hi)) break;
      for (std::size_t k = lo; k <= hi && !r; ++k)
        r = eval(x, frame, a, k) && eval(y, frame, k + 1, b);
      break;
    }
    default: break;
    }
    std::size_t dep = min_dep_;
    if (r || dep >= depth) node_memo_.emplace(key, r);
    min_dep_ = std::min(saved, dep < depth ? dep : kInf);
    return r;
  }

  const Trace &t_;
  MemberStats *stats_;
  std::vector<std::string> procs_;
  std::vector<bool> state_;
  std::vector<Frame> frames_;
  std::map<std::string, int> frame_ids_;
  std::map<std::tuple<const MuDef *, std::vector<Int>, int>, int> frame_direct_;
  std::unordered_map<NodeKey, bool, NodeKeyHash> node_memo_;
  std::unordered_map<NodeKey, bool, NodeKeyHash> mu_memo_;
  std::unordered_map<NodeKey, std::size_t, NodeKeyHash> on_stack_;
  std::unordered_map<const Formula *, std::pair<std::size_t, std::size_t>> bounds_;
  std::map<const MuDef *, std::shared_ptr<std::set<std::string>>> free_cache_;
  std::map<std::string, std::vector<std::size_t>> psi_prefix_;
  std::map<std::string, std::pair<std::vector<long long>, std::vector<long long>>> event_index_;
  std::size_t min_dep_ = kInf;
};

}  // namespace

bool member(const Trace &t, const FormulaPtr &f, const LogicalEnv &beta, MemberStats *stats) {
  Member m(t, stats);
  return m.top(f, beta);
}

std::string explain_failure(const Trace &t, const FormulaPtr &f, const LogicalEnv &beta) {
  if (member(t, f, beta)) return "member";
  FormulaPtr cur = f;
  std::string path;
  for (int guard = 0; guard < 8; ++guard) {
    if (cur->kind == FKind::MuApp && !cur->mu->psi) {
      path += "mu " + cur->mu->name + " > ";
      cur = unfold(cur);
      continue;
    }
    if (cur->kind == FKind::Or) {
      auto ds = disjuncts(cur);
      path += "\\/ (all " + std::to_string(ds.size()) + " disjuncts fail)";
      return path;
    }
    if (cur->kind == FKind::And) {
      bool left = member(t, cur->a, beta);
      path += std::string("/\\ > ") + (left ? "right" : "left") + " conjunct fails: ";
      cur = left ? cur->b : cur->a;
      continue;
    }
    if (cur->kind == FKind::Chop) {
      auto fs = chop_factors(cur);
      for (std::size_t k = 1; k <= fs.size(); ++k) {
        FormulaPtr prefix = f_chop(chop_all({fs.begin(), fs.begin() + k}), psi(""));
        if (!member(t, prefix, beta))
          return path + "** factor " + std::to_string(k) + " of " + std::to_string(fs.size()) +
                 " (" + to_string(fs[k - 1]) + ") has no match after the preceding factors";
      }
      return path + "** chain matches only a proper prefix of the trace";
    }
    return path + to_string(cur) + " does not match";
  }
  return path;
}

}  // namespace tracelet
