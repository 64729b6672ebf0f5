#include "qqc/compose.hpp"

#include <algorithm>
#include <map>

#include "qqc/checkers.hpp"

namespace qqc {

SplitPair split(const OperationalTrace& alpha,
                const std::set<std::string>& names_for_first) {
  std::set<std::string> sel;
  for (const auto& n : names_for_first) {
    if (!alpha.trace.contains(n)) throw ParseError("split: unknown name " + n);
    const Event& e = alpha.trace.at(n);
    if (e.is_ret()) {
      sel.insert(e.name);
      sel.insert(e.brak);
    } else {
      sel.insert(e.name);
      if (auto r = alpha.trace.matching_return(e.name)) sel.insert(*r);
    }
  }
  std::set<std::string> rest;
  for (const auto& e : alpha.trace.events())
    if (!sel.count(e.name)) rest.insert(e.name);
  return {po_difference(alpha, rest), po_difference(alpha, sel)};
}

std::optional<bool> cross_order_lemma(const Trace& alpha, const std::string& x0,
                                      const std::string& x1, const std::string& y0,
                                      const std::string& y1) {
  for (const auto& n : {x0, x1, y0, y1})
    if (!alpha.contains(n) || !alpha.at(n).is_call()) return std::nullopt;
  auto rx0 = alpha.matching_return(x0);
  auto ry0 = alpha.matching_return(y0);
  if (!rx0 || !ry0) return std::nullopt;
  if (!alpha.is_operational()) return std::nullopt;
  bool hyp = alpha.precedes(x0, *ry0) && alpha.precedes(y0, *rx0) &&
             alpha.precedes(x1, *rx0) && alpha.precedes(y1, *ry0);
  if (!hyp) return std::nullopt;
  return alpha.precedes(x1, *ry0) || alpha.precedes(y1, *rx0);
}

namespace {

struct PairRef {
  int side;
  std::size_t idx;  // 1-based
};

struct MergeCtx {
  const SequentialTrace& b1;
  const SequentialTrace& b2;
  const OperationalTrace& alpha;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::vector<PairRef>>>
      memo;

  const SequentialTrace& side(int s) const { return s == 1 ? b1 : b2; }

  // Pair k of side s may take merge position p iff its return has at least p
  // calls of alpha before it: the counting condition, applied right to left.
  bool admissible(int s, std::size_t k, std::size_t position) const {
    std::string r = side(s).ret_at(k).name;
    std::size_t calls_before = 0;
    for (const auto& e : alpha.trace.events())
      if (e.is_call() && alpha.trace.precedes(e.name, r)) ++calls_before;
    return calls_before >= position;
  }

  const std::vector<std::vector<PairRef>>& merges(std::size_t i, std::size_t j) {
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<std::vector<PairRef>> out;
    if (i == 0 || j == 0) {
      bool ok = true;
      for (std::size_t k = 1; k <= i; ++k) ok = ok && admissible(1, k, k);
      for (std::size_t k = 1; k <= j; ++k) ok = ok && admissible(2, k, k);
      if (ok) {
        std::vector<PairRef> only;
        for (std::size_t k = 1; k <= i; ++k) only.push_back({1, k});
        for (std::size_t k = 1; k <= j; ++k) only.push_back({2, k});
        out.push_back(std::move(only));
      }
    } else {
      if (admissible(1, i, i + j)) {
        for (auto m : merges(i - 1, j)) {
          m.push_back({1, i});
          out.push_back(std::move(m));
        }
      }
      if (admissible(2, j, i + j)) {
        for (auto m : merges(i, j - 1)) {
          m.push_back({2, j});
          out.push_back(std::move(m));
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

SequentialTrace realize(const MergeCtx& ctx, const std::vector<PairRef>& m) {
  std::vector<Token> tokens;
  for (const auto& p : m) {
    const SequentialTrace& b = ctx.side(p.side);
    const Event& c = b.call_at(p.idx);
    tokens.push_back({Polarity::call, c.name, c.label.method, c.label.payload});
    tokens.push_back({Polarity::ret, c.name, "", b.ret_at(p.idx).label.payload});
  }
  return as_sequential(from_tokens(tokens));
}

}  // namespace

std::vector<SequentialTrace> fmerge(const SequentialTrace& b1,
                                    const SequentialTrace& b2,
                                    const OperationalTrace& alpha) {
  for (const auto& e : b1.trace.events())
    if (b2.trace.contains(e.name))
      throw ParseError("fmerge: name collision on " + e.name);
  for (const auto& b : {&b1, &b2})
    for (const auto& e : b->trace.events())
      if (!alpha.trace.contains(e.name))
        throw ParseError("fmerge: alpha does not cover " + e.name);
  MergeCtx ctx{b1, b2, alpha, {}};
  std::vector<SequentialTrace> out;
  for (const auto& m : ctx.merges(b1.op_count(), b2.op_count()))
    out.push_back(realize(ctx, m));
  return out;
}

namespace {

// Pair-level order for LIN composition: chain edges along each spec plus
// cross edges where one pair's return precedes the other's call in alpha.
std::optional<std::vector<PairRef>> lin_pair_order(const SequentialTrace& b1,
                                                   const SequentialTrace& b2,
                                                   const OperationalTrace& alpha) {
  std::size_t m = b1.op_count(), n = b2.op_count();
  std::size_t total = m + n;
  std::vector<std::vector<bool>> edge(total, std::vector<bool>(total, false));
  for (std::size_t k = 1; k + 1 <= m; ++k) edge[k - 1][k] = true;
  for (std::size_t k = 1; k + 1 <= n; ++k) edge[m + k - 1][m + k] = true;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t l = 1; l <= n; ++l) {
      if (alpha.trace.precedes(b1.ret_at(i).name, b2.call_at(l).name))
        edge[i - 1][m + l - 1] = true;
      if (alpha.trace.precedes(b2.ret_at(l).name, b1.call_at(i).name))
        edge[m + l - 1][i - 1] = true;
    }
  }
  std::vector<std::size_t> indeg(total, 0);
  for (std::size_t a = 0; a < total; ++a)
    for (std::size_t b = 0; b < total; ++b)
      if (edge[a][b]) ++indeg[b];
  std::vector<PairRef> order;
  std::vector<bool> done(total, false);
  for (std::size_t step = 0; step < total; ++step) {
    std::size_t pick = total;
    for (std::size_t a = 0; a < total; ++a)
      if (!done[a] && indeg[a] == 0) { pick = a; break; }
    if (pick == total) return std::nullopt;  // cycle
    done[pick] = true;
    for (std::size_t b = 0; b < total; ++b)
      if (edge[pick][b]) --indeg[b];
    order.push_back(pick < m ? PairRef{1, pick + 1} : PairRef{2, pick - m + 1});
  }
  return order;
}

}  // namespace

ComposeResult check_compositional(const OperationalTrace& alpha,
                                  const std::set<std::string>& names_for_first,
                                  const SequentialTrace& b1,
                                  const SequentialTrace& b2, Criterion c) {
  if (c == Criterion::WEAK)
    return {false, {}, "weak QC has no compositional construction"};
  SplitPair parts = split(alpha, names_for_first);
  if (!check_counting(parts.first, b1, c).accept)
    return {false, {}, "first component fails " + to_string(c)};
  if (!check_counting(parts.second, b2, c).accept)
    return {false, {}, "second component fails " + to_string(c)};

  if (c == Criterion::LIN) {
    auto order = lin_pair_order(b1, b2, alpha);
    if (!order) return {false, {}, "internal: cyclic pair order"};
    MergeCtx ctx{b1, b2, alpha, {}};
    SequentialTrace witness = realize(ctx, *order);
    if (!check_counting(alpha, witness, Criterion::LIN).accept)
      return {false, {}, "internal: constructed order not linearizable"};
    return {true, witness, ""};
  }
  for (const auto& w : fmerge(b1, b2, alpha))
    if (check_counting(alpha, w, c).accept) return {true, w, ""};
  return {false, {}, "no fmerge interleaving accepted"};
}

}  // namespace qqc
