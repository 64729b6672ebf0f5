#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <random>

#include "doctest.h"
#include "qqc/trace.hpp"

using namespace qqc;

namespace {

Event call(const std::string& name, const std::string& method,
           const std::set<std::string>& preds = {}) {
  return {Polarity::call, {method, ""}, name, preds, ""};
}

Event ret(const std::string& name, const std::string& value,
          const std::string& brak, const std::set<std::string>& preds) {
  return {Polarity::ret, {"", value}, name, preds, brak};
}

// Independent down-set enumerator: subsets closed under predecessors.
std::size_t brute_force_downsets(const Trace& t) {
  const auto& es = t.events();
  std::size_t n = es.size(), count = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    bool closed = true;
    for (std::size_t i = 0; i < n && closed; ++i) {
      if (!(mask & (std::size_t{1} << i))) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (es[i].preds.count(es[j].name) && !(mask & (std::size_t{1} << j))) {
          closed = false;
          break;
        }
    }
    if (closed) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("validate: minimal call/return pair") {
  std::vector<Event> es = {call("a", "inc"), ret("a!", "0", "a", {"a"})};
  CHECK(validate(es).ok());
}

TEST_CASE("validate: dangling bracket") {
  std::vector<Event> es = {ret("b", "0", "a", {"a"})};
  auto rep = validate(es);
  CHECK(!rep.ok());
  bool cond23 = false;
  for (const auto& v : rep.violations) cond23 |= v.condition == 2 || v.condition == 3;
  CHECK(cond23);
}

TEST_CASE("validate: two calls ordered with no intervening return") {
  std::vector<Event> es = {call("a", "inc"), call("b", "inc", {"a"})};
  auto rep = validate(es);
  CHECK(!rep.ok());
  bool cond4 = false;
  for (const auto& v : rep.violations) cond4 |= v.condition == 4;
  CHECK(cond4);
}

TEST_CASE("from_tokens: single op") {
  auto t = parse_trc1("?a=inc() !a:0");
  CHECK(t.size() == 2);
  CHECK(t.trace.precedes("a", "a!"));
}

TEST_CASE("from_tokens: quartet first execution order") {
  auto t = parse_trc1("?c=inc() ?a=inc() !a:0 ?b=inc() !b:1 !c:2");
  CHECK(!t.trace.precedes("c", "a"));
  CHECK(!t.trace.precedes("a", "c"));
  CHECK(t.trace.precedes("c", "a!"));
  CHECK(t.trace.precedes("a!", "b"));
  CHECK(t.trace.precedes("b", "c!"));
  // adjacent returns with no mediating call stay unordered
  CHECK(!t.trace.precedes("b!", "c!"));
}

TEST_CASE("from_tokens: empty") { CHECK(parse_trc1("").empty()); }

TEST_CASE("from_tokens: comments") {
  auto t = parse_trc1("# header\n?a=inc() # call\n!a:0\n");
  CHECK(t.size() == 2);
}

TEST_CASE("from_tokens: errors") {
  CHECK_THROWS_AS(parse_trc1("!a:0"), ParseError);
  CHECK_THROWS_AS(parse_trc1("?a=inc() ?a=inc()"), ParseError);
  CHECK_THROWS_AS(parse_trc1("junk"), ParseError);
}

TEST_CASE("to_tokens round trip") {
  std::string text = "?c=inc() ?a=inc() !a:0 ?b=inc() !b:1 !c:2";
  auto t = parse_trc1(text);
  CHECK(format_trc1(t) == text);
  auto t2 = from_tokens(to_tokens(t));
  for (const auto& e : t.trace.events())
    CHECK(t2.trace.at(e.name).preds == e.preds);
  CHECK(format_trc1(parse_trc1("")) == "");
}

TEST_CASE("open_calls and quiescence") {
  CHECK(open_calls(parse_trc1("?a=inc()").trace) == std::vector<std::string>{"a"});
  auto prefix = parse_trc1("?c=inc() ?b=inc() !b:1");
  CHECK(open_calls(prefix.trace) == std::vector<std::string>{"c"});
  CHECK(is_quiescent(parse_trc1("?a=inc() !a:0").trace));
  CHECK(!is_quiescent(parse_trc1("?a=inc()").trace));
  CHECK(is_quiescent(parse_trc1("?a=inc() ?c=inc() !c:2 !a:0").trace));
}

TEST_CASE("prefixes: chain and bound") {
  auto t = parse_trc1("?a=inc() !a:0");
  CHECK(prefixes(t.trace).size() == 3);
  auto spec = parse_trc1("?a=inc() !a:0 ?b=inc() !b:1 ?c=inc() !c:2");
  CHECK(prefixes(spec.trace).size() == 7);
}

TEST_CASE("prefixes agree with brute-force down-set enumeration") {
  std::vector<std::string> samples = {
      "?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2",
      "?a=inc() ?c=inc() !c:2 ?b=inc() !b:1 !a:0",
      "?a=push(x) ?b=pop() !b:x !a:() ?c=push(y)",
      "?a=inc() ?b=inc() ?c=inc() !a:0 !b:1 !c:2",
  };
  for (const auto& s : samples) {
    auto t = parse_trc1(s);
    auto ps = prefixes(t.trace);
    CHECK(ps.size() == brute_force_downsets(t.trace));
    std::set<std::set<std::string>> seen;
    for (const auto& p : ps) {
      CHECK(seen.insert(p).second);  // exactly once
      for (const auto& n : p)        // down-closed
        for (const auto& q : t.trace.at(n).preds) CHECK(p.count(q));
    }
  }
}

TEST_CASE("prefixes: bound exceeded") {
  std::string text;
  for (int k = 0; k < 9; ++k) {
    text += "?x" + std::to_string(k) + "=inc() ";
    text += "!x" + std::to_string(k) + ":" + std::to_string(k) + " ";
  }
  CHECK_THROWS_AS(prefixes(parse_trc1(text).trace), BoundError);
}

TEST_CASE("down_closure") {
  auto t = parse_trc1("?b=inc() ?a=inc() !a:0");
  CHECK(down_closure(t.trace, "a!") == std::set<std::string>{"b", "a", "a!"});
  CHECK(down_closure(t.trace, "b") == std::set<std::string>{"b"});
  auto seq = parse_trc1("?a=inc() !a:0 ?b=inc() !b:1");
  CHECK(down_closure(seq.trace, "b!").size() == 4);
}

TEST_CASE("permeq / permlt / find_renaming") {
  auto exec2 = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  auto spec = parse_trc1("?a=inc() !a:0 ?b=inc() !b:1 ?c=inc() !c:2");
  CHECK(permeq(exec2.trace, spec.trace));
  CHECK(permeq(exec2.trace, exec2.trace));
  auto other = parse_trc1("?x=inc() !x:0 ?y=inc() !y:1 ?z=inc() !z:2");
  CHECK(!permeq(exec2.trace, other.trace));

  CHECK(permlt(parse_trc1("?a=inc() !a:0").trace, spec.trace));
  CHECK(!permlt(parse_trc1("?a=inc() !a:5").trace, spec.trace));
  CHECK(permlt(exec2.trace, exec2.trace));

  auto id = find_renaming(exec2.trace, exec2.trace);
  REQUIRE(id.has_value());
  for (const auto& [k, v] : *id) CHECK(k == v);
  auto fresh = find_renaming(exec2.trace, parse_trc1(
      "?z=inc() ?y=inc() !y:1 ?x=inc() !x:0 !z:2").trace);
  CHECK(fresh.has_value());
  CHECK(!find_renaming(exec2.trace, parse_trc1("?a=inc() !a:0").trace).has_value());
}

TEST_CASE("po_difference: footnote example") {
  auto t = parse_trc1("?a=inc() !a:0 ?b=inc() !b:1 ?c=inc()");
  auto d = po_difference(t, {"b", "b!"});
  CHECK(d.trace.size() == 3);
  CHECK(d.trace.at("c").preds == std::set<std::string>{"a", "a!"});
  auto same = po_difference(t, {});
  CHECK(same.trace.size() == 5);
  CHECK(po_difference(t, {"a", "a!", "b", "b!", "c"}).trace.empty());
}

TEST_CASE("po_difference drops orders mediated only by removed events") {
  auto t = parse_trc1("?x=inc() ?u=inc() !u:0 ?y=inc()");
  // x < u! < y; removing the u pair leaves x, y unordered
  auto d = po_difference(t, {"u", "u!"});
  CHECK(!d.trace.precedes("x", "y"));
  CHECK(!d.trace.precedes("y", "x"));
}

TEST_CASE("po_difference validates for every bracketed subset") {
  auto t = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  std::vector<std::vector<std::string>> pairs = {{"a", "a!"}, {"b", "b!"}, {"c", "c!"}};
  for (std::size_t mask = 0; mask < 8; ++mask) {
    std::set<std::string> removed;
    for (std::size_t k = 0; k < 3; ++k)
      if (mask & (std::size_t{1} << k))
        removed.insert(pairs[k].begin(), pairs[k].end());
    auto d = po_difference(t.trace, removed);
    CHECK(validate(d.events()).ok());
  }
  CHECK_THROWS_AS(po_difference(t.trace, std::set<std::string>{"a"}), ParseError);
}

TEST_CASE("extend_to") {
  auto spec = parse_spec_trc1("?a=inc() !a:0 ?b=inc() !b:1 ?c=inc() !c:2");
  auto partial = parse_trc1("?c=inc() ?b=inc() !b:1");
  auto ext = extend_to(partial, spec);
  CHECK(permeq(ext.trace, spec.trace));
  // the partial trace is a prefix: its events keep their mutual order and
  // precede all appended opposite-polarity events
  CHECK(ext.trace.precedes("c", "b!"));
  CHECK(ext.trace.precedes("b!", "a"));
  CHECK(ext.trace.precedes("c", "c!"));

  auto complete = parse_trc1("?a=inc() !a:0 ?b=inc() !b:1 ?c=inc() !c:2");
  CHECK(format_trc1(extend_to(complete, spec)) == format_trc1(complete));
  auto from_empty = extend_to(parse_trc1(""), spec);
  CHECK(format_trc1(from_empty) == format_trc1(spec.as_operational()));
}

TEST_CASE("interleavings") {
  auto s1 = parse_spec_trc1("?a=inc() !a:0");
  auto s2 = parse_spec_trc1("?b=inc() !b:0");
  CHECK(interleavings(s1, s2).size() == 2);
  auto l1 = parse_spec_trc1("?a=inc() !a:0 ?b=inc() !b:1");
  auto l2 = parse_spec_trc1("?c=inc() !c:0 ?d=inc() !d:1");
  CHECK(interleavings(l1, l2).size() == 6);
  CHECK(interleavings(l1, parse_spec_trc1("")).size() == 1);
}

TEST_CASE("homomorphism soundness on random token sequences") {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Token> tokens;
    std::vector<std::string> open;
    int n = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n; ++k) {
      std::string name = "e" + std::to_string(k);
      tokens.push_back({Polarity::call, name, "inc", ""});
      open.push_back(name);
    }
    // random valid positions for returns
    std::vector<Token> seq;
    std::size_t ci = 0;
    std::vector<std::string> started;
    while (ci < tokens.size() || !started.empty()) {
      bool can_call = ci < tokens.size();
      bool do_call = can_call && (started.empty() || rng() % 2 == 0);
      if (do_call) {
        seq.push_back(tokens[ci]);
        started.push_back(tokens[ci].name);
        ++ci;
      } else {
        std::size_t pick = rng() % started.size();
        seq.push_back({Polarity::ret, started[pick], "", "0"});
        started.erase(started.begin() + static_cast<long>(pick));
      }
    }
    auto t = from_tokens(seq);
    CHECK(validate(t.trace.events()).ok());
    CHECK(t.trace.is_operational());
  }
}

TEST_CASE("sequential traces begin with a call and alternate") {
  CHECK_THROWS_AS(parse_spec_trc1("?a=inc() ?b=inc() !a:0 !b:1"), ParseError);
  auto s = parse_spec_trc1("?a=inc() !a:0 ?b=inc() !b:1");
  CHECK(s.op_count() == 2);
  CHECK(s.call_at(1).name == "a");
  CHECK(s.ret_at(2).name == "b!");
  CHECK(s.trace.is_sequential());
}

TEST_CASE("TRP1 round trip") {
  auto t = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  std::string text = format_trp1(t.trace);
  auto back = parse_trp1(text);
  CHECK(back.size() == t.trace.size());
  for (const auto& e : t.trace.events()) {
    CHECK(back.contains(e.name));
    CHECK(back.at(e.name).preds == e.preds);
    CHECK(back.at(e.name).brak == e.brak);
  }
}

TEST_CASE("quiescent_closure") {
  auto t = parse_trc1("?a=inc() ?c=inc() !c:2 !a:0 ?b=inc() !b:1");
  auto q = quiescent_closure(t.trace, "c!");
  REQUIRE(q.has_value());
  CHECK(*q == std::set<std::string>{"a", "c", "c!", "a!"});
  auto open = parse_trc1("?a=inc() ?c=inc() !c:2");
  CHECK(!quiescent_closure(open.trace, "c!").has_value());
}
