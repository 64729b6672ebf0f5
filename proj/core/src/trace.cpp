#include "qqc/trace.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace qqc {

namespace {

std::map<std::string, std::size_t> build_index(const std::vector<Event>& events) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) index.emplace(events[i].name, i);
  return index;
}

}  // namespace

ValidityReport validate(const std::vector<Event>& events) {
  ValidityReport report;
  auto index = build_index(events);

  // 1: names unique
  {
    std::set<std::string> seen;
    for (const auto& e : events) {
      if (!seen.insert(e.name).second)
        report.violations.push_back({1, {e.name}, "duplicate event name"});
    }
  }
  // 2: preds reference existing names
  for (const auto& e : events) {
    for (const auto& p : e.preds) {
      if (!index.count(p))
        report.violations.push_back({2, {e.name, p}, "pred references unknown name"});
    }
  }
  // 3: brak okay
  for (const auto& e : events) {
    if (e.is_ret()) {
      if (!e.preds.count(e.brak)) {
        report.violations.push_back({3, {e.name, e.brak}, "brak not among preds"});
      } else if (index.count(e.brak) && !events[index.at(e.brak)].is_call()) {
        report.violations.push_back({3, {e.name, e.brak}, "brak names a non-call"});
      }
    } else if (!e.brak.empty()) {
      report.violations.push_back({3, {e.name}, "call carries a brak"});
    }
  }
  if (!report.ok()) return report;  // later checks assume well-formed references

  auto lt = [&](const std::string& a, const std::string& b) {
    return events[index.at(b)].preds.count(a) != 0;
  };

  // 4: input acquires control -- a ≺ call implies some return r with
  //    a ≼ r ≺ call.
  for (const auto& e : events) {
    if (!e.is_call()) continue;
    for (const auto& p : e.preds) {
      const Event& pe = events[index.at(p)];
      bool ok = pe.is_ret();  // a itself may be the output
      if (!ok) {
        for (const auto& q : e.preds) {
          const Event& qe = events[index.at(q)];
          if (qe.is_ret() && (q == p || lt(p, q))) { ok = true; break; }
        }
      }
      if (!ok) report.violations.push_back({4, {p, e.name}, "call ordered after call with no intervening return"});
    }
  }
  // 5: output releases control -- ret ≺ b implies some call c with
  //    ret ≼ c ≺ b ... dual form: the return reaches b through a call.
  for (const auto& e : events) {
    for (const auto& p : e.preds) {
      const Event& pe = events[index.at(p)];
      if (!pe.is_ret()) continue;
      bool ok = e.is_call();
      if (!ok) {
        for (const auto& q : e.preds) {
          const Event& qe = events[index.at(q)];
          if (qe.is_call() && (lt(p, q))) { ok = true; break; }
        }
      }
      if (!ok) report.violations.push_back({5, {p, e.name}, "return ordered before return with no intervening call"});
    }
  }
  // 6: strict partial order (irreflexive, antisymmetric, transitive)
  for (const auto& e : events) {
    if (e.preds.count(e.name))
      report.violations.push_back({6, {e.name}, "reflexive order"});
    for (const auto& p : e.preds) {
      const Event& pe = events[index.at(p)];
      if (pe.preds.count(e.name))
        report.violations.push_back({6, {e.name, p}, "order cycle"});
      for (const auto& q : pe.preds) {
        if (!e.preds.count(q))
          report.violations.push_back({6, {q, p, e.name}, "order not transitive"});
      }
    }
  }
  // a return's matched call precedes it (implied by 3 once preds are valid)
  return report;
}

Trace::Trace(std::vector<Event> events) : events_(std::move(events)) {
  auto report = validate(events_);
  if (!report.ok()) {
    std::ostringstream os;
    os << "invalid trace:";
    for (const auto& v : report.violations) {
      os << " [cond " << v.condition << ": " << v.detail;
      for (const auto& n : v.names) os << " " << n;
      os << "]";
    }
    throw ParseError(os.str());
  }
  index_ = build_index(events_);
}

const Event& Trace::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParseError("unknown event name: " + name);
  return events_[it->second];
}

bool Trace::precedes(const std::string& a, const std::string& b) const {
  return at(b).preds.count(a) != 0;
}

bool Trace::is_operational() const {
  for (const auto& a : events_) {
    if (!a.is_call()) continue;
    for (const auto& b : events_) {
      if (!b.is_ret()) continue;
      if (!precedes(a.name, b.name) && !precedes(b.name, a.name)) return false;
    }
  }
  return true;
}

bool Trace::is_sequential() const {
  for (const auto& a : events_) {
    for (const auto& b : events_) {
      if (a.name == b.name) continue;
      if (!precedes(a.name, b.name) && !precedes(b.name, a.name)) return false;
    }
  }
  return true;
}

std::optional<std::string> Trace::matching_return(const std::string& call_name) const {
  for (const auto& e : events_) {
    if (e.is_ret() && e.brak == call_name) return e.name;
  }
  return std::nullopt;
}

const Event& SequentialTrace::call_at(std::size_t j) const {
  return trace.at(arrangement.at(2 * (j - 1)));
}

const Event& SequentialTrace::ret_at(std::size_t j) const {
  return trace.at(arrangement.at(2 * (j - 1) + 1));
}

// --- tokens ----------------------------------------------------------------

std::vector<Token> tokenize_trc1(const std::string& text) {
  std::vector<Token> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    while (ls >> word) {
      Token t;
      if (word.size() < 2) throw ParseError("malformed token: " + word);
      if (word[0] == '?') {
        t.pol = Polarity::call;
        auto eq = word.find('=');
        auto open = word.find('(');
        if (eq == std::string::npos || open == std::string::npos || word.back() != ')' || open < eq)
          throw ParseError("malformed call token: " + word);
        t.name = word.substr(1, eq - 1);
        t.method = word.substr(eq + 1, open - eq - 1);
        t.payload = word.substr(open + 1, word.size() - open - 2);
        if (t.name.empty() || t.method.empty())
          throw ParseError("malformed call token: " + word);
      } else if (word[0] == '!') {
        t.pol = Polarity::ret;
        auto colon = word.find(':');
        if (colon == std::string::npos) throw ParseError("malformed return token: " + word);
        t.name = word.substr(1, colon - 1);
        t.payload = word.substr(colon + 1);
        if (t.name.empty()) throw ParseError("malformed return token: " + word);
      } else {
        throw ParseError("malformed token: " + word);
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::string format_token(const Token& t) {
  if (t.pol == Polarity::call) return "?" + t.name + "=" + t.method + "(" + t.payload + ")";
  return "!" + t.name + ":" + t.payload;
}

OperationalTrace from_tokens(const std::vector<Token>& tokens) {
  std::vector<Event> events;
  std::map<std::string, std::size_t> call_pos;  // open calls -> event index
  std::vector<std::string> arrangement;
  for (const auto& tok : tokens) {
    Event e;
    e.name = tok.pol == Polarity::call ? tok.name : tok.name + "!";
    e.pol = tok.pol;
    for (const auto& prev : events) {
      if (prev.name == e.name) throw ParseError("duplicate name: " + tok.name);
      if (prev.pol != tok.pol) {
        e.preds.insert(prev.name);
        e.preds.insert(prev.preds.begin(), prev.preds.end());
      }
    }
    if (tok.pol == Polarity::call) {
      e.label = {tok.method, tok.payload};
      call_pos.emplace(tok.name, events.size());
    } else {
      auto it = call_pos.find(tok.name);
      if (it == call_pos.end())
        throw ParseError("return without open call: " + tok.name);
      const Event& call = events[it->second];
      e.label = {call.label.method, tok.payload};
      e.name = tok.name + "!";
      e.brak = tok.name;
      e.preds.insert(tok.name);
      call_pos.erase(it);
    }
    arrangement.push_back(e.name);
    events.push_back(std::move(e));
  }
  return {Trace(std::move(events)), std::move(arrangement)};
}

std::vector<Token> to_tokens(const OperationalTrace& t) {
  std::vector<Token> out;
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    Token tok;
    tok.pol = e.pol;
    if (e.is_call()) {
      tok.name = e.name;
      tok.method = e.label.method;
      tok.payload = e.label.payload;
    } else {
      tok.name = e.brak;
      tok.payload = e.label.payload;
    }
    out.push_back(std::move(tok));
  }
  return out;
}

OperationalTrace parse_trc1(const std::string& text) {
  return from_tokens(tokenize_trc1(text));
}

std::string format_trc1(const OperationalTrace& t) {
  std::string out;
  for (const auto& tok : to_tokens(t)) {
    if (!out.empty()) out += " ";
    out += format_token(tok);
  }
  return out;
}

SequentialTrace as_sequential(const OperationalTrace& t) {
  for (std::size_t i = 0; i < t.arrangement.size(); ++i) {
    const Event& e = t.trace.at(t.arrangement[i]);
    if (i % 2 == 0) {
      if (!e.is_call()) throw ParseError("spec must alternate call/return");
    } else {
      const Event& call = t.trace.at(t.arrangement[i - 1]);
      if (!e.is_ret() || e.brak != call.name)
        throw ParseError("spec return must match immediately preceding call");
    }
  }
  if (t.arrangement.size() % 2 != 0) throw ParseError("spec has an open call");
  return {t.trace, t.arrangement};
}

SequentialTrace parse_spec_trc1(const std::string& text) {
  return as_sequential(parse_trc1(text));
}

// --- TRP1 ------------------------------------------------------------------

Trace parse_trp1(const std::string& text) {
  std::vector<Event> events;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw != "event") throw ParseError("TRP1: expected 'event', got: " + kw);
    Event e;
    std::string pol, labeled, pred, brak;
    if (!(ls >> e.name >> pol >> labeled >> pred >> brak))
      throw ParseError("TRP1: malformed line: " + line);
    if (pol == "call") e.pol = Polarity::call;
    else if (pol == "ret") e.pol = Polarity::ret;
    else throw ParseError("TRP1: bad polarity: " + pol);
    auto open = labeled.find('(');
    if (open == std::string::npos || labeled.back() != ')')
      throw ParseError("TRP1: bad label: " + labeled);
    e.label.method = labeled.substr(0, open);
    e.label.payload = labeled.substr(open + 1, labeled.size() - open - 2);
    if (pred.rfind("pred=", 0) != 0 || brak.rfind("brak=", 0) != 0)
      throw ParseError("TRP1: malformed line: " + line);
    std::string preds = pred.substr(5);
    if (preds != "-") {
      std::istringstream ps(preds);
      std::string p;
      while (std::getline(ps, p, ',')) if (!p.empty()) e.preds.insert(p);
    }
    std::string b = brak.substr(5);
    if (b != "-") e.brak = b;
    events.push_back(std::move(e));
  }
  return Trace(std::move(events));
}

std::string format_trp1(const Trace& t) {
  std::ostringstream os;
  for (const auto& e : t.events()) {
    os << "event " << e.name << " " << (e.is_call() ? "call" : "ret") << " "
       << e.label.method << "(" << e.label.payload << ") pred=";
    if (e.preds.empty()) {
      os << "-";
    } else {
      bool first = true;
      for (const auto& p : e.preds) {
        if (!first) os << ",";
        os << p;
        first = false;
      }
    }
    os << " brak=" << (e.brak.empty() ? "-" : e.brak) << "\n";
  }
  return os.str();
}

// --- algebra ---------------------------------------------------------------

std::vector<std::string> open_calls(const Trace& t) {
  std::set<std::string> closed;
  for (const auto& e : t.events())
    if (e.is_ret()) closed.insert(e.brak);
  std::vector<std::string> out;
  for (const auto& e : t.events())
    if (e.is_call() && !closed.count(e.name)) out.push_back(e.name);
  return out;
}

bool is_quiescent(const Trace& t) { return open_calls(t).empty(); }

std::vector<std::set<std::string>> prefixes(const Trace& t, std::size_t bound) {
  if (t.size() > bound)
    throw BoundError("prefix enumeration bound exceeded: " + std::to_string(t.size()));
  // Extend down-sets one maximal-eligible event at a time; dedupe via a set.
  std::set<std::set<std::string>> seen;
  std::vector<std::set<std::string>> out;
  std::vector<std::set<std::string>> frontier{{}};
  seen.insert({});
  while (!frontier.empty()) {
    auto cur = std::move(frontier.back());
    frontier.pop_back();
    out.push_back(cur);
    for (const auto& e : t.events()) {
      if (cur.count(e.name)) continue;
      bool eligible = true;
      for (const auto& p : e.preds)
        if (!cur.count(p)) { eligible = false; break; }
      if (!eligible) continue;
      auto next = cur;
      next.insert(e.name);
      if (seen.insert(next).second) frontier.push_back(std::move(next));
    }
  }
  return out;
}

std::set<std::string> down_closure(const Trace& t, const std::string& name) {
  const Event& e = t.at(name);  // throws on unknown name
  std::set<std::string> out = e.preds;
  out.insert(e.name);
  return out;
}

std::optional<std::set<std::string>> quiescent_closure(const Trace& t,
                                                       const std::string& name) {
  std::set<std::string> cur = down_closure(t, name);
  for (;;) {
    bool grew = false;
    for (const auto& n : std::set<std::string>(cur)) {
      const Event& e = t.at(n);
      if (!e.is_call()) continue;
      bool closed = false;
      for (const auto& r : t.events()) {
        if (r.is_ret() && r.brak == n) {
          closed = true;
          if (!cur.count(r.name)) {
            auto down = down_closure(t, r.name);
            cur.insert(down.begin(), down.end());
            grew = true;
          }
          break;
        }
      }
      if (!closed) return std::nullopt;  // open at trace level: never quiescent
    }
    if (!grew) return cur;
  }
}

namespace {
bool same_event_shape(const Event& a, const Event& b) {
  return a.pol == b.pol && a.label == b.label && a.brak == b.brak;
}
}  // namespace

bool permeq(const Trace& t1, const Trace& t2) {
  if (t1.size() != t2.size()) return false;
  for (const auto& e : t1.events()) {
    if (!t2.contains(e.name)) return false;
    if (!same_event_shape(e, t2.at(e.name))) return false;
  }
  return true;
}

bool permlt(const Trace& t1, const Trace& t2) {
  for (const auto& e : t1.events()) {
    if (!t2.contains(e.name)) return false;
    if (!same_event_shape(e, t2.at(e.name))) return false;
  }
  return true;
}

namespace {

bool renaming_search(const Trace& t1, const Trace& t2,
                     std::vector<const Event*>& order, std::size_t k,
                     std::map<std::string, std::string>& fwd,
                     std::set<std::string>& used) {
  if (k == order.size()) return true;
  const Event& e1 = *order[k];
  for (const auto& e2 : t2.events()) {
    if (used.count(e2.name)) continue;
    if (e2.pol != e1.pol || e2.label != e1.label) continue;
    if (e1.is_ret()) {
      auto it = fwd.find(e1.brak);
      if (it == fwd.end() || it->second != e2.brak) continue;
    }
    // order preservation against already-mapped events
    bool ok = true;
    for (const auto& [n1, n2] : fwd) {
      bool p1 = t1.at(e1.name).preds.count(n1) != 0;
      bool p2 = e2.preds.count(n2) != 0;
      bool q1 = t1.at(n1).preds.count(e1.name) != 0;
      bool q2 = t2.at(n2).preds.count(e2.name) != 0;
      if (p1 != p2 || q1 != q2) { ok = false; break; }
    }
    if (!ok) continue;
    fwd.emplace(e1.name, e2.name);
    used.insert(e2.name);
    if (renaming_search(t1, t2, order, k + 1, fwd, used)) return true;
    fwd.erase(e1.name);
    used.erase(e2.name);
  }
  return false;
}

}  // namespace

std::optional<std::map<std::string, std::string>> find_renaming(const Trace& t1,
                                                                const Trace& t2) {
  if (t1.size() != t2.size()) return std::nullopt;
  std::vector<const Event*> order;
  for (const auto& e : t1.events()) if (e.is_call()) order.push_back(&e);
  for (const auto& e : t1.events()) if (e.is_ret()) order.push_back(&e);
  std::map<std::string, std::string> fwd;
  std::set<std::string> used;
  if (renaming_search(t1, t2, order, 0, fwd, used)) return fwd;
  return std::nullopt;
}

Trace restrict_to(const Trace& t, const std::set<std::string>& names) {
  std::vector<Event> events;
  for (const auto& e : t.events()) {
    if (!names.count(e.name)) continue;
    Event copy = e;
    std::set<std::string> preds;
    for (const auto& p : copy.preds)
      if (names.count(p)) preds.insert(p);
    copy.preds = std::move(preds);
    events.push_back(std::move(copy));
  }
  return Trace(std::move(events));
}

Trace po_difference(const Trace& t, const std::set<std::string>& removed) {
  // removed must be bracketed: every return's call is also removed
  for (const auto& n : removed) {
    if (!t.contains(n)) throw ParseError("po_difference: unknown name " + n);
    const Event& e = t.at(n);
    if (e.is_ret() && !removed.count(e.brak))
      throw ParseError("po_difference: set not bracketed at " + n);
  }
  for (const auto& e : t.events()) {
    if (e.is_ret() && removed.count(e.brak) && !removed.count(e.name))
      throw ParseError("po_difference: set not bracketed at " + e.brak);
  }
  std::set<std::string> keep;
  for (const auto& e : t.events())
    if (!removed.count(e.name)) keep.insert(e.name);
  // Restrict preds, then drop same-polarity pairs whose mediating event was
  // removed (a call precedes a call only through a return, and dually).
  std::vector<Event> events;
  for (const auto& e : t.events()) {
    if (!keep.count(e.name)) continue;
    Event copy = e;
    std::set<std::string> preds;
    for (const auto& p : copy.preds)
      if (keep.count(p)) preds.insert(p);
    copy.preds = std::move(preds);
    events.push_back(std::move(copy));
  }
  std::map<std::string, std::size_t> index = [&] {
    std::map<std::string, std::size_t> ix;
    for (std::size_t i = 0; i < events.size(); ++i) ix.emplace(events[i].name, i);
    return ix;
  }();
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& e : events) {
      for (auto it = e.preds.begin(); it != e.preds.end();) {
        const Event& p = events[index.at(*it)];
        bool ok = p.pol != e.pol;
        if (!ok) {
          for (const auto& q : e.preds) {
            const Event& qe = events[index.at(q)];
            if (qe.pol != e.pol && qe.preds.count(*it)) { ok = true; break; }
          }
        }
        if (ok) ++it;
        else { it = e.preds.erase(it); changed = true; }
      }
    }
  }
  return Trace(std::move(events));
}

OperationalTrace po_difference(const OperationalTrace& t,
                               const std::set<std::string>& removed) {
  po_difference(t.trace, removed);  // validates bracketing of the removed set
  std::vector<Token> tokens;
  for (const auto& tok : to_tokens(t)) {
    const std::string& name =
        tok.pol == Polarity::call ? tok.name : tok.name + "!";
    if (!removed.count(name)) tokens.push_back(tok);
  }
  return from_tokens(tokens);
}

OperationalTrace extend_to(const OperationalTrace& partial, const SequentialTrace& spec) {
  if (!permlt(partial.trace, spec.trace))
    throw ParseError("extend_to: trace is not a sub-permutation of the spec");
  std::vector<Token> tokens = to_tokens(partial);
  for (const auto& n : spec.arrangement) {
    const Event& e = spec.trace.at(n);
    bool present = e.is_call() ? partial.trace.contains(e.name)
                               : partial.trace.contains(e.name);
    if (present) continue;
    Token tok;
    tok.pol = e.pol;
    tok.name = e.is_call() ? e.name : e.brak;
    tok.method = e.label.method;
    tok.payload = e.label.payload;
    tokens.push_back(std::move(tok));
  }
  return from_tokens(tokens);
}

std::vector<SequentialTrace> interleavings(const SequentialTrace& s1,
                                           const SequentialTrace& s2,
                                           std::size_t bound) {
  if (s1.op_count() + s2.op_count() > bound)
    throw BoundError("interleaving bound exceeded");
  for (const auto& e : s1.trace.events())
    if (s2.trace.contains(e.name))
      throw ParseError("interleavings: name collision on " + e.name);
  std::vector<SequentialTrace> out;
  std::vector<Token> tok1 = to_tokens(s1.as_operational());
  std::vector<Token> tok2 = to_tokens(s2.as_operational());
  std::size_t m = s1.op_count(), n = s2.op_count();
  std::vector<bool> pick(m + n, false);  // true = take from s2
  std::fill(pick.begin() + static_cast<long>(m), pick.end(), true);
  std::sort(pick.begin(), pick.end());
  do {
    std::vector<Token> merged;
    std::size_t i = 0, j = 0;
    for (bool take2 : pick) {
      if (take2) {
        merged.push_back(tok2[2 * j]);
        merged.push_back(tok2[2 * j + 1]);
        ++j;
      } else {
        merged.push_back(tok1[2 * i]);
        merged.push_back(tok1[2 * i + 1]);
        ++i;
      }
    }
    out.push_back(as_sequential(from_tokens(merged)));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

}  // namespace qqc
