#include "qqc/checkers.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace qqc {

std::size_t cut_bound() {
  if (const char* env = std::getenv("QQC_MAX_EVENTS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultPrefixBound;
}

namespace {

struct Pair {
  std::string call;              // call event name
  Label call_label;
  std::optional<std::string> ret_payload;  // absent for open calls
};

std::vector<Pair> trace_pairs(const OperationalTrace& t) {
  std::vector<Pair> out;
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (!e.is_call()) continue;
    Pair p{e.name, e.label, std::nullopt};
    if (auto r = t.trace.matching_return(e.name))
      p.ret_payload = t.trace.at(*r).label.payload;
    out.push_back(std::move(p));
  }
  return out;
}

void match_search(const std::vector<Pair>& tp, const SequentialTrace& spec,
                  std::size_t k, Matching& cur, std::set<std::string>& used,
                  std::vector<Matching>& out) {
  if (k == tp.size()) {
    Matching m = cur;
    m.total = m.pairs.size() == spec.op_count();
    out.push_back(std::move(m));
    return;
  }
  const Pair& p = tp[k];
  for (std::size_t j = 1; j <= spec.op_count(); ++j) {
    const Event& sc = spec.call_at(j);
    if (used.count(sc.name)) continue;
    if (sc.label != p.call_label) continue;
    if (p.ret_payload && spec.ret_at(j).label.payload != *p.ret_payload) continue;
    cur.pairs.emplace(p.call, sc.name);
    used.insert(sc.name);
    match_search(tp, spec, k + 1, cur, used, out);
    cur.pairs.erase(p.call);
    used.erase(sc.name);
  }
}

// Per-matching plumbing shared by every checker.
struct Ctx {
  std::map<std::string, std::size_t> specidx;  // trace call name -> 1-based j
  std::map<std::size_t, std::string> idx_call; // j -> trace call name (if matched)
};

Ctx make_ctx(const SequentialTrace& spec, const Matching& m) {
  Ctx ctx;
  std::map<std::string, std::size_t> spec_pos;
  for (std::size_t j = 1; j <= spec.op_count(); ++j)
    spec_pos.emplace(spec.call_at(j).name, j);
  for (const auto& [tc, sc] : m.pairs) {
    auto it = spec_pos.find(sc);
    if (it == spec_pos.end()) throw ParseError("matching references unknown spec pair");
    ctx.specidx.emplace(tc, it->second);
    ctx.idx_call.emplace(it->second, tc);
  }
  return ctx;
}

std::set<std::string> calls_before(const OperationalTrace& t, const std::string& ret) {
  std::set<std::string> out;
  for (const auto& e : t.trace.events())
    if (e.is_call() && t.trace.precedes(e.name, ret)) out.insert(e.name);
  return out;
}

CheckVerdict reject_at(const OperationalTrace& t, const std::string& ret,
                       std::size_t j, std::string detail) {
  CheckVerdict v;
  v.accept = false;
  v.offending_return = ret;
  v.spec_index = j;
  v.preceding_calls = calls_before(t, ret);
  v.detail = std::move(detail);
  return v;
}

}  // namespace

std::vector<Matching> match_names(const OperationalTrace& t,
                                  const SequentialTrace& spec) {
  auto tp = trace_pairs(t);
  std::vector<Matching> out;
  Matching cur;
  std::set<std::string> used;
  match_search(tp, spec, 0, cur, used, out);
  return out;
}

CheckVerdict lin_counting(const OperationalTrace& t, const SequentialTrace& spec,
                          const Matching& m) {
  Ctx ctx = make_ctx(spec, m);
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (!e.is_ret()) continue;
    std::size_t j = ctx.specidx.at(e.brak);
    for (std::size_t i = 1; i <= j; ++i) {
      auto it = ctx.idx_call.find(i);
      if (it == ctx.idx_call.end() || !t.trace.precedes(it->second, name)) {
        std::ostringstream os;
        os << "spec call " << i << " does not precede return at spec index " << j;
        return reject_at(t, name, j, os.str());
      }
    }
  }
  return {};
}

CheckVerdict qqc_counting(const OperationalTrace& t, const SequentialTrace& spec,
                          const Matching& m) {
  Ctx ctx = make_ctx(spec, m);
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (!e.is_ret()) continue;
    std::size_t j = ctx.specidx.at(e.brak);
    std::size_t count = calls_before(t, name).size();
    if (count < j) {
      std::ostringstream os;
      os << "only " << count << " calls precede return at spec index " << j;
      return reject_at(t, name, j, os.str());
    }
  }
  return {};
}

CheckVerdict qc_counting(const OperationalTrace& t, const SequentialTrace& spec,
                         const Matching& m) {
  Ctx ctx = make_ctx(spec, m);
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (!e.is_ret()) continue;
    std::size_t j = ctx.specidx.at(e.brak);
    std::size_t before = calls_before(t, name).size();
    // calls after the return not separated from it by a quiescent prefix
    auto closure = quiescent_closure(t.trace, name);
    std::size_t conc = 0;
    for (const auto& c : t.trace.events()) {
      if (!c.is_call() || !t.trace.precedes(name, c.name)) continue;
      if (!closure || closure->count(c.name)) ++conc;
    }
    if (before + conc < j) {
      std::ostringstream os;
      os << before << " preceding + " << conc
         << " quiescently-concurrent calls < spec index " << j;
      return reject_at(t, name, j, os.str());
    }
  }
  return {};
}

SequentialTrace align_spec(const OperationalTrace& t, const SequentialTrace& spec,
                           const Matching& m) {
  std::map<std::string, std::string> rename;  // spec call name -> new name
  for (const auto& [tc, sc] : m.pairs) rename.emplace(sc, tc);
  std::size_t fresh = 0;
  auto taken = [&](const std::string& n) {
    if (t.trace.contains(n) || t.trace.contains(n + "!")) return true;
    for (const auto& [sc, nn] : rename)
      if (nn == n) return true;
    return false;
  };
  std::vector<Token> tokens;
  for (std::size_t j = 1; j <= spec.op_count(); ++j) {
    const Event& sc = spec.call_at(j);
    auto it = rename.find(sc.name);
    std::string name;
    if (it != rename.end()) {
      name = it->second;
    } else {
      do name = "_e" + std::to_string(++fresh);
      while (taken(name));
      rename.emplace(sc.name, name);
    }
    tokens.push_back({Polarity::call, name, sc.label.method, sc.label.payload});
    tokens.push_back({Polarity::ret, name, "", spec.ret_at(j).label.payload});
  }
  return as_sequential(from_tokens(tokens));
}

namespace {

// Shared cut-based machinery over the extended trace.
struct CutCtx {
  OperationalTrace ext;
  std::map<std::string, std::size_t> specidx;  // call name in ext -> 1-based j
  std::vector<std::set<std::string>> cuts;
};

CutCtx make_cut_ctx(const OperationalTrace& t, const SequentialTrace& spec,
                    const Matching& m) {
  CutCtx ctx;
  SequentialTrace aligned = align_spec(t, spec, m);
  ctx.ext = extend_to(t, aligned);
  for (std::size_t j = 1; j <= aligned.op_count(); ++j)
    ctx.specidx.emplace(aligned.call_at(j).name, j);
  if (ctx.ext.size() > cut_bound())
    throw BoundError("definitional checker bound exceeded: " +
                     std::to_string(ctx.ext.size()));
  ctx.cuts = prefixes(ctx.ext.trace, cut_bound());
  return ctx;
}

std::size_t arrangement_pos(const OperationalTrace& t, const std::string& name) {
  for (std::size_t i = 0; i < t.arrangement.size(); ++i)
    if (t.arrangement[i] == name) return i;
  return t.arrangement.size();  // extension events sort after the trace
}

bool quiescent_cut(const Trace& t, const std::set<std::string>& cut) {
  for (const auto& n : cut) {
    const Event& e = t.at(n);
    if (!e.is_call()) continue;
    auto r = t.matching_return(n);
    if (!r || !cut.count(*r)) return false;
  }
  return true;
}

std::vector<std::string> open_in_cut(const Trace& t, const std::set<std::string>& cut) {
  std::vector<std::string> out;
  for (const auto& n : cut) {
    const Event& e = t.at(n);
    if (!e.is_call()) continue;
    auto r = t.matching_return(n);
    if (!r || !cut.count(*r)) out.push_back(n);
  }
  return out;
}

CheckVerdict cut_reject(const OperationalTrace& t, const CutCtx& ctx,
                        const std::string& ret, const std::set<std::string>& cut,
                        std::string detail) {
  CheckVerdict v;
  v.accept = false;
  v.offending_return = ret;
  const Event& r = ctx.ext.trace.at(ret);
  v.spec_index = ctx.specidx.at(r.brak);
  if (t.trace.contains(ret)) v.preceding_calls = calls_before(t, ret);
  v.violating_prefix = cut;
  v.detail = std::move(detail);
  return v;
}

// Calls outside the cut that follow r in the extended trace but not in the
// spec: the violations the cut rule (and Def. 5's C) must account for.
std::vector<std::string> violating_calls(const CutCtx& ctx,
                                         const std::set<std::string>& cut,
                                         const std::string& ret) {
  std::vector<std::string> out;
  std::size_t j = ctx.specidx.at(ctx.ext.trace.at(ret).brak);
  for (const auto& e : ctx.ext.trace.events()) {
    if (!e.is_call() || cut.count(e.name)) continue;
    if (!ctx.ext.trace.precedes(ret, e.name)) continue;
    if (ctx.specidx.at(e.name) <= j) out.push_back(e.name);
  }
  return out;
}

template <typename Filter, typename Bound>
CheckVerdict cut_check(const OperationalTrace& t, const SequentialTrace& spec,
                       const Matching& m, Filter use_cut, Bound bound_for) {
  CutCtx ctx = make_cut_ctx(t, spec, m);
  std::optional<CheckVerdict> worst;
  for (const auto& cut : ctx.cuts) {
    if (!use_cut(ctx, cut)) continue;
    for (const auto& n : cut) {
      const Event& e = ctx.ext.trace.at(n);
      if (!e.is_ret()) continue;
      auto viol = violating_calls(ctx, cut, n);
      std::size_t allowed = bound_for(ctx, cut, n);
      if (viol.size() > allowed) {
        std::ostringstream os;
        os << viol.size() << " out-of-order calls after the cut, only " << allowed
           << " excusable";
        CheckVerdict v = cut_reject(t, ctx, n, cut, os.str());
        if (!worst || arrangement_pos(t, n) < arrangement_pos(t, worst->offending_return))
          worst = std::move(v);
      }
    }
  }
  if (worst) return *worst;
  return {};
}

}  // namespace

CheckVerdict lin_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                        const Matching& m) {
  return cut_check(
      t, spec, m, [](const CutCtx&, const std::set<std::string>&) { return true; },
      [](const CutCtx&, const std::set<std::string>&, const std::string&) {
        return std::size_t{0};
      });
}

CheckVerdict qc_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                       const Matching& m) {
  return cut_check(
      t, spec, m,
      [](const CutCtx& ctx, const std::set<std::string>& cut) {
        return quiescent_cut(ctx.ext.trace, cut);
      },
      [](const CutCtx&, const std::set<std::string>&, const std::string&) {
        return std::size_t{0};
      });
}

CheckVerdict qqc_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                        const Matching& m) {
  return cut_check(
      t, spec, m, [](const CutCtx&, const std::set<std::string>&) { return true; },
      [](const CutCtx& ctx, const std::set<std::string>& cut, const std::string& ret) {
        // |open(cut) \ down_spec(ret)|: open calls with spec index above the
        // return's
        std::size_t j = ctx.specidx.at(ctx.ext.trace.at(ret).brak);
        std::size_t n = 0;
        for (const auto& c : open_in_cut(ctx.ext.trace, cut))
          if (ctx.specidx.at(c) > j) ++n;
        return n;
      });
}

CheckVerdict qqc_exists_form(const OperationalTrace& t, const SequentialTrace& spec,
                             const Matching& m) {
  CutCtx ctx = make_cut_ctx(t, spec, m);
  std::optional<CheckVerdict> worst;
  for (const auto& cut : ctx.cuts) {
    std::set<std::string> shared;   // one C serving every return in the cut
    std::string first_ret;
    std::size_t first_pos = t.arrangement.size() + 1;
    for (const auto& n : cut) {
      const Event& e = ctx.ext.trace.at(n);
      if (!e.is_ret()) continue;
      for (const auto& c : violating_calls(ctx, cut, n)) shared.insert(c);
      if (!violating_calls(ctx, cut, n).empty() && arrangement_pos(t, n) < first_pos) {
        first_pos = arrangement_pos(t, n);
        first_ret = n;
      }
    }
    // early-open calls: open in the cut, with no return in the cut at a spec
    // index at or above theirs
    std::size_t early = 0;
    for (const auto& c : open_in_cut(ctx.ext.trace, cut)) {
      std::size_t i = ctx.specidx.at(c);
      bool capped = false;
      for (const auto& n : cut) {
        const Event& e = ctx.ext.trace.at(n);
        if (e.is_ret() && ctx.specidx.at(e.brak) >= i) { capped = true; break; }
      }
      if (!capped) ++early;
    }
    if (shared.size() > early) {
      std::ostringstream os;
      os << shared.size() << " out-of-order calls, only " << early
         << " early open calls";
      CheckVerdict v = cut_reject(t, ctx, first_ret, cut, os.str());
      if (!worst ||
          arrangement_pos(t, first_ret) < arrangement_pos(t, worst->offending_return))
        worst = std::move(v);
    }
  }
  if (worst) return *worst;
  return {};
}

namespace {

CheckVerdict run_one(const OperationalTrace& t, const SequentialTrace& spec,
                     const Matching& m, Criterion c, bool cutdef) {
  switch (c) {
    case Criterion::LIN:
      return cutdef ? lin_cutdef(t, spec, m) : lin_counting(t, spec, m);
    case Criterion::QQC:
      return cutdef ? qqc_cutdef(t, spec, m) : qqc_counting(t, spec, m);
    case Criterion::QC:
      return cutdef ? qc_cutdef(t, spec, m) : qc_counting(t, spec, m);
    case Criterion::WEAK:
      throw ParseError("weak QC is checked against an object, not a spec");
  }
  throw ParseError("bad criterion");
}

CheckVerdict check_existential(const OperationalTrace& t, const SequentialTrace& spec,
                               Criterion c, bool cutdef) {
  auto matchings = match_names(t, spec);
  if (matchings.empty()) {
    CheckVerdict v;
    v.accept = false;
    v.detail = "no label-preserving matching into the specification";
    return v;
  }
  std::optional<CheckVerdict> first_reject;
  for (const auto& m : matchings) {
    CheckVerdict v = run_one(t, spec, m, c, cutdef);
    if (v.accept) return v;
    if (!first_reject) first_reject = std::move(v);
  }
  return *first_reject;
}

}  // namespace

CheckVerdict check_counting(const OperationalTrace& t, const SequentialTrace& spec,
                            Criterion c) {
  return check_existential(t, spec, c, false);
}

CheckVerdict check_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                          Criterion c) {
  return check_existential(t, spec, c, true);
}

CheckVerdict weak_qc(const OperationalTrace& t, const SequentialObject& obj,
                     std::size_t extension_budget) {
  auto pool = payload_candidates(t);
  std::vector<OpLabel> run;
  std::set<std::string> open;
  auto flush = [&](const std::string& at) -> std::optional<CheckVerdict> {
    if (run.empty()) return std::nullopt;
    bool ok = embeds_as_subtrace(run, obj, extension_budget, pool);
    std::vector<OpLabel> done = std::move(run);
    run.clear();
    if (ok) return std::nullopt;
    CheckVerdict v;
    v.accept = false;
    v.offending_return = at;
    std::ostringstream os;
    os << "isolated run of " << done.size() << " ops matches no " << obj.name
       << " trace";
    v.detail = os.str();
    return v;
  };
  for (std::size_t i = 0; i < t.arrangement.size(); ++i) {
    const Event& e = t.trace.at(t.arrangement[i]);
    if (open.empty() && e.is_call() && i + 1 < t.arrangement.size()) {
      const Event& next = t.trace.at(t.arrangement[i + 1]);
      if (next.is_ret() && next.brak == e.name) {
        run.push_back({e.label, next.label.payload});
        ++i;
        continue;
      }
    }
    if (auto v = flush(t.arrangement[i])) return *v;
    if (e.is_call()) open.insert(e.name);
    else open.erase(e.brak);
  }
  if (auto v = flush(t.arrangement.empty() ? "" : t.arrangement.back())) return *v;
  return {};
}

Strength classify(const OperationalTrace& t, const SequentialTrace& spec) {
  if (check_counting(t, spec, Criterion::LIN).accept) return Strength::LIN;
  if (check_counting(t, spec, Criterion::QQC).accept) return Strength::QQC;
  if (check_counting(t, spec, Criterion::QC).accept) return Strength::QC;
  return Strength::NONE;
}

}  // namespace qqc
