#include "fixtures.hpp"

#include <functional>
#include <sstream>

#include "qqc/checkers.hpp"
#include "qqc/compose.hpp"
#include "qqc/objects.hpp"
#include "qqc/proxy.hpp"
#include "qqc/structures.hpp"
#include "qqc/trace.hpp"

namespace qqc::fixtures {

namespace {

const char* kCounterSpec3 = "?s1=inc() !s1:0 ?s2=inc() !s2:1 ?s3=inc() !s3:2";
const char* kCounterSpec5 =
    "?s1=inc() !s1:0 ?s2=inc() !s2:1 ?s3=inc() !s3:2 ?s4=inc() !s4:3 "
    "?s5=inc() !s5:4";

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  template <typename T>
  void expect_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
      pass = false;
      std::ostringstream os;
      os << what << ": got " << got << ", want " << want;
      detail << (detail.str().empty() ? "" : "; ") << os.str();
    }
  }
};

std::vector<std::string> states_of(const ExecutionRecord& r) {
  std::vector<std::string> out;
  for (const auto& s : r.steps) out.push_back(s.state);
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? " " : "") + xs[k];
  return out;
}

std::vector<std::string> call_order(const SequentialTrace& s) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= s.op_count(); ++j) out.push_back(s.call_at(j).name);
  return out;
}

std::string emitted_str(const ExecutionRecord& r) {
  std::vector<std::string> parts;
  for (const auto& a : r.emitted)
    parts.push_back((a.method == "push" ? "+" : "-") + a.payload);
  return join(parts);
}

void check_strength(Check& c, const std::string& trace_text, Strength want) {
  auto t = parse_trc1(trace_text);
  auto spec = parse_spec_trc1(kCounterSpec3);
  c.expect_eq(to_string(classify(t, spec)), to_string(want), "classification");
}

void check_both(Check& c, const std::string& trace_text, const std::string& spec_text,
                Criterion crit, bool want_accept) {
  auto t = parse_trc1(trace_text);
  auto spec = parse_spec_trc1(spec_text);
  c.expect_eq(check_counting(t, spec, crit).accept, want_accept, "counting verdict");
  c.expect_eq(check_cutdef(t, spec, crit).accept, want_accept, "cut verdict");
}

struct Fixture {
  std::string name;
  std::function<void(Check&)> run;
};

const std::vector<Fixture>& catalog() {
  static const std::vector<Fixture> fs = {
      {"ex1.1", [](Check& c) {
         check_strength(c, "?c=inc() ?a=inc() !a:0 ?b=inc() !b:1 !c:2",
                        Strength::LIN);
       }},
      {"ex1.2", [](Check& c) {
         check_strength(c, "?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2",
                        Strength::QQC);
       }},
      {"ex1.3", [](Check& c) {
         check_strength(c, "?a=inc() ?c=inc() !c:2 ?b=inc() !b:1 !a:0",
                        Strength::QC);
       }},
      {"ex1.4", [](Check& c) {
         check_strength(c, "?a=inc() ?c=inc() !c:2 !a:0 ?b=inc() !b:1",
                        Strength::NONE);
       }},
      {"sec31.accept", [](Check& c) {
         check_both(c, "?b=inc() ?a=inc() !b:1 ?c=inc() !a:0 !c:2", kCounterSpec3,
                    Criterion::LIN, true);
       }},
      {"sec31.reject", [](Check& c) {
         check_both(c, "?b=inc() ?c=inc() !b:1 ?a=inc() !c:2 !a:0", kCounterSpec3,
                    Criterion::LIN, false);
       }},
      {"sec42.accept", [](Check& c) {
         check_both(c,
                    "?e=inc() ?b=inc() !b:1 ?d=inc() ?a=inc() !a:0 !d:3 "
                    "?c=inc() !c:2 !e:4",
                    kCounterSpec5, Criterion::QQC, true);
       }},
      {"sec42.reject", [](Check& c) {
         std::string text =
             "?e=inc() ?b=inc() !b:1 ?d=inc() !d:3 ?a=inc() !a:0 "
             "?c=inc() !c:2 !e:4";
         check_both(c, text, kCounterSpec5, Criterion::QQC, false);
         auto v = check_counting(parse_trc1(text), parse_spec_trc1(kCounterSpec5),
                                 Criterion::QQC);
         c.expect_eq(v.offending_return, std::string("d!"), "offending return");
       }},
      {"ex2.seq", [](Check& c) {
         std::vector<OpSpec> ops = {{"1", "inc", ""}, {"3", "inc", ""}, {"2", "inc", ""}};
         auto r = run_schedule("counter", 2, ops, {"1", "1", "3", "3", "2", "2"});
         c.expect_eq(join(states_of(r)),
                     std::string("(1|0,1) (1|2,1) (0|2,1) (0|2,3) (1|2,3) (1|4,3)"),
                     "state table");
         c.expect_eq(format_trc1(linearized_trace(r)),
                     std::string("?1=inc() !1:0 ?3=inc() !3:1 ?2=inc() !2:2"),
                     "trace");
       }},
      {"ex2.conc", [](Check& c) {
         std::vector<OpSpec> ops = {{"1", "inc", ""}, {"3", "inc", ""}, {"2", "inc", ""}};
         auto r = run_schedule("counter", 2, ops, {"2", "3", "3", "1", "1", "2"});
         c.expect_eq(join(states_of(r)),
                     std::string("(1|0,1) (0|0,1) (0|0,3) (1|0,3) (1|2,3) (1|4,3)"),
                     "state table");
         c.expect_eq(format_trc1(linearized_trace(r)),
                     std::string("?2=inc() ?3=inc() !3:1 ?1=inc() !1:0 !2:2"),
                     "trace");
       }},
      {"ex3.run", [](Check& c) {
         std::vector<OpSpec> ops = {
             {"1", "inc", ""}, {"3", "inc", ""}, {"2", "dec", ""}, {"4", "dec", ""}};
         auto r = run_schedule("counter", 2, ops,
                               {"1", "3", "2", "4", "4", "1", "3", "2"});
         c.expect_eq(join(states_of(r)),
                     std::string("(1|0,1) (0|0,1) (1|0,1) (0|0,1) (0|-2,1) "
                                 "(0|0,1) (0|0,3) (0|0,1)"),
                     "state table");
         c.expect_eq(format_trc1(linearized_trace(r)),
                     std::string("?1=inc() ?3=inc() ?2=dec() ?4=dec() !4:-2 "
                                 "!1:-2 !3:1 !2:1"),
                     "trace");
       }},
      {"ex3.noqc", [](Check& c) {
         auto t = parse_trc1(
             "?1=inc() ?3=inc() ?2=dec() ?4=dec() !4:-2 !1:-2 !3:1 !2:1");
         c.expect(!find_witness(t, counter_object(), Criterion::QC).has_value(),
                  "unexpected QC counter witness");
       }},
      {"ex3.weak", [](Check& c) {
         auto t = parse_trc1(
             "?1=inc() ?3=inc() ?2=dec() ?4=dec() !4:-2 !1:-2 !3:1 !2:1");
         c.expect(weak_qc(t, counter_object()).accept, "weak QC rejected");
       }},
      {"ex4.run", [](Check& c) {
         std::vector<OpSpec> ops = {
             {"1", "push", "a"}, {"2", "push", "b"}, {"3", "push", "c"}, {"4", "pop", ""}};
         auto r = run_schedule("stack", 2, ops,
                               {"1", "1", "2", "2", "3", "4", "4", "3"});
         c.expect_eq(join(states_of(r)),
                     std::string("(1||) (1|a|) (0|a|) (0|a|b) (1|a|b) (0|a|b) "
                                 "(0||b) (0|c|b)"),
                     "state table");
         auto t = linearized_trace(r);
         c.expect_eq(format_trc1(t),
                     std::string("?1=push(a) !1:() ?2=push(b) !2:() ?3=push(c) "
                                 "?4=pop() !4:a !3:()"),
                     "trace");
         auto v = properly_popped(r);
         c.expect(v.has_value(), "expected a properly-popped violation");
         if (v) {
           c.expect_eq(v->push_op, std::string("3"), "violating push");
           c.expect_eq(v->pop_op, std::string("4"), "violating pop");
         }
         c.expect(!find_witness(t, stack_object(), Criterion::QC).has_value(),
                  "unexpected QC stack witness");
       }},
      {"ex4.variant", [](Check& c) {
         std::vector<OpSpec> ops = {{"x", "push", "x"}, {"y", "push", "y"},
                                    {"1", "push", "a"}, {"2", "push", "b"},
                                    {"3", "push", "c"}, {"4", "pop", ""}};
         auto r = run_schedule(
             "stack", 2, ops,
             {"x", "x", "y", "y", "1", "1", "2", "2", "3", "4", "4", "3"});
         auto t = linearized_trace(r);
         c.expect_eq(format_trc1(t),
                     std::string("?x=push(x) !x:() ?y=push(y) !y:() ?1=push(a) "
                                 "!1:() ?2=push(b) !2:() ?3=push(c) ?4=pop() "
                                 "!4:a !3:()"),
                     "trace");
         auto v = properly_popped(r);
         c.expect(v && v->push_op == "3" && v->pop_op == "4",
                  "expected the same push/pop violation");
         c.expect(!find_witness(t, stack_object(), Criterion::QC).has_value(),
                  "unexpected QC stack witness");
       }},
      {"sec43.noncausal", [](Check& c) {
         auto target = parse_spec_trc1(
             "?x1=push(a) !x1:() ?x2=pop() !x2:a ?x3=push(c) !x3:()");
         std::vector<ProxyRequest> reqs = {{"c", {"push", "c"}},
                                           {"g", {"pop", ""}},
                                           {"p", {"push", "a"}}};
         std::vector<ProxyStep> sched = {
             {ProxyStepKind::Arrive, "", ""},   {ProxyStepKind::Consume, "c", ""},
             {ProxyStepKind::Arrive, "", ""},   {ProxyStepKind::Consume, "g", ""},
             {ProxyStepKind::Deliver, "g", ""}, {ProxyStepKind::Arrive, "", ""},
             {ProxyStepKind::Consume, "p", ""}, {ProxyStepKind::Deliver, "p", ""},
             {ProxyStepKind::Deliver, "c", ""}};
         auto oracle = replay_oracle(target);
         auto res = run_proxy(stack_object(), reqs, *oracle, sched, false);
         c.expect_eq(format_trc1(res.trace),
                     std::string("?c=push(c) ?g=pop() !g:a ?p=push(a) !p:() !c:()"),
                     "trace");
         c.expect(check_counting(res.trace, res.executed_spec, Criterion::QQC).accept,
                  "not QQC against the executed spec");
       }},
      {"sec43.guard", [](Check& c) {
         auto target = parse_spec_trc1(
             "?x1=push(a) !x1:() ?x2=pop() !x2:a ?x3=push(c) !x3:()");
         std::vector<ProxyRequest> reqs = {{"c", {"push", "c"}},
                                           {"g", {"pop", ""}},
                                           {"p", {"push", "a"}}};
         std::vector<ProxyStep> sched = {
             {ProxyStepKind::Arrive, "", ""},   {ProxyStepKind::Consume, "c", ""},
             {ProxyStepKind::Arrive, "", ""},   {ProxyStepKind::Consume, "g", ""}};
         auto oracle = replay_oracle(target);
         bool stuck = false;
         try {
           run_proxy(stack_object(), reqs, *oracle, sched, true);
         } catch (const StuckError&) {
           stuck = true;
         }
         c.expect(stuck, "causal guard did not refuse the speculative pop");
       }},
      {"sec44.first", [](Check& c) {
         auto b1 = parse_spec_trc1("?1=inc() !1:0 ?2=inc() !2:1 ?3=inc() !3:2");
         auto b2 = parse_spec_trc1("?8=inc() !8:0 ?5=inc() !5:1 ?6=inc() !6:2");
         auto a = parse_trc1(
             "?6=inc() ?5=inc() !5:1 ?3=inc() ?8=inc() !8:0 ?2=inc() !2:1 "
             "?1=inc() !1:0 !3:2 !6:2");
         auto ms = fmerge(b1, b2, a);
         c.expect_eq(ms.size(), std::size_t{4}, "merge count");
         std::vector<std::vector<std::string>> want = {
             {"8", "5", "6", "1", "2", "3"},
             {"8", "5", "1", "6", "2", "3"},
             {"8", "5", "1", "2", "6", "3"},
             {"8", "5", "1", "2", "3", "6"}};
         for (std::size_t k = 0; k < ms.size() && k < want.size(); ++k) {
           c.expect(call_order(ms[k]) == want[k], "merge order " + std::to_string(k + 1));
           c.expect(check_counting(a, ms[k], Criterion::QQC).accept,
                    "merge " + std::to_string(k + 1) + " not QQC");
         }
       }},
      {"sec44.second", [](Check& c) {
         auto b1 = parse_spec_trc1("?1=inc() !1:0 ?2=inc() !2:1 ?3=inc() !3:2");
         auto b2 = parse_spec_trc1("?8=inc() !8:0 ?5=inc() !5:1 ?6=inc() !6:2");
         auto a = parse_trc1(
             "?6=inc() ?5=inc() !5:1 ?3=inc() ?8=inc() ?2=inc() !2:1 !8:0 "
             "!6:2 ?1=inc() !1:0 !3:2");
         auto ms = fmerge(b1, b2, a);
         c.expect_eq(ms.size(), std::size_t{3}, "merge count");
         std::vector<std::vector<std::string>> want = {
             {"8", "5", "6", "1", "2", "3"},
             {"8", "5", "1", "6", "2", "3"},
             {"8", "5", "1", "2", "6", "3"}};
         for (std::size_t k = 0; k < ms.size() && k < want.size(); ++k) {
           c.expect(call_order(ms[k]) == want[k], "merge order " + std::to_string(k + 1));
           c.expect(check_counting(a, ms[k], Criterion::QQC).accept,
                    "merge " + std::to_string(k + 1) + " not QQC");
         }
       }},
      {"sec45.stack1", [](Check& c) {
         auto t = parse_trc1(
             "?c=push(c) ?a=push(a) !a:() ?b=push(b) !b:() ?g=pop() !g:a !c:()");
         c.expect(find_witness(t, stack_object(), Criterion::QQC).has_value(),
                  "no QQC stack witness");
         auto listed = parse_spec_trc1(
             "?w2=push(b) !w2:() ?w1=push(a) !w1:() ?w4=pop() !w4:a "
             "?w3=push(c) !w3:()");
         c.expect(check_counting(t, listed, Criterion::QQC).accept,
                  "listed witness rejected");
       }},
      {"sec45.stack2", [](Check& c) {
         auto t = parse_trc1(
             "?c=push(c) ?a=push(a) !a:() ?b=push(b) !b:() !c:() ?g=pop() !g:a");
         c.expect(!find_witness(t, stack_object(), Criterion::QQC).has_value(),
                  "unexpected QQC stack witness");
       }},
      {"sec45.queue.n1", [](Check& c) {
         auto t = parse_trc1(
             "?p=enq(a) ?b1=enq(b1) !b1:() ?pc=enq(c) !pc:() ?g=deq() !g:c !p:()");
         c.expect(find_witness(t, queue_object(), Criterion::QQC).has_value(),
                  "no QQC queue witness");
       }},
      {"sec45.queue.n2", [](Check& c) {
         auto t = parse_trc1(
             "?p=enq(a) ?b1=enq(b1) !b1:() ?b2=enq(b2) !b2:() ?pc=enq(c) !pc:() "
             "?g=deq() !g:c !p:()");
         c.expect(find_witness(t, queue_object(), Criterion::QQC).has_value(),
                  "no QQC queue witness");
       }},
      {"sec45.queue.n3", [](Check& c) {
         auto t = parse_trc1(
             "?p=enq(a) ?b1=enq(b1) !b1:() ?b2=enq(b2) !b2:() ?b3=enq(b3) !b3:() "
             "?pc=enq(c) !pc:() ?g=deq() !g:c !p:()");
         c.expect(find_witness(t, queue_object(), Criterion::QQC).has_value(),
                  "no QQC queue witness");
       }},
      {"sec5.stack", [](Check& c) {
         std::vector<OpSpec> ops = {{"c", "push", "c"}, {"b", "push", "b"},
                                    {"a", "push", "a"}, {"gc", "pop", ""},
                                    {"gb", "pop", ""},  {"ga", "pop", ""}};
         auto r = run_schedule("istack", 2, ops,
                               {"c", "b", "b", "a", "a", "c", "gc", "gc", "gb",
                                "gb", "ga", "ga"});
         c.expect_eq(join(states_of(r)),
                     std::string("(1|||0||) (0|||0||) (0||b|0||+b) (1||b|0||+b) "
                                 "(1|a|b|0||) (1|a.c|b|1||) (0|a.c|b|1||) "
                                 "(0|a|b|0||) (1|a|b|0||) (1|a||1||) (0|a||1||) "
                                 "(0|||0||)"),
                     "state table");
         auto t = linearized_trace(r);
         c.expect_eq(format_trc1(t),
                     std::string("?c=push(c) ?b=push(b) !b:() ?a=push(a) !a:() "
                                 "!c:() ?gc=pop() !gc:c ?gb=pop() !gb:b "
                                 "?ga=pop() !ga:a"),
                     "trace");
         c.expect_eq(emitted_str(r), std::string("+a +b +c -c -b -a"), "emitted");
         c.expect(!properly_popped(r).has_value(), "not properly popped");
         auto spec = emitted_spec(r);
         c.expect(is_spec(spec, stack_object()), "emitted is not a stack spec");
         c.expect(check_counting(t, spec, Criterion::QQC).accept,
                  "linearized trace not QQC vs emitted spec");
         for (const auto& [chains, open] : r.chain_open)
           c.expect(chains <= open, "chain invariant violated");
       }},
      {"sec5.pending", [](Check& c) {
         std::vector<OpSpec> ops = {{"p0", "push", "0"}, {"a", "push", "a"},
                                    {"ga", "pop", ""},   {"b", "push", "b"},
                                    {"p1", "push", "1"}, {"cc", "push", "c"}};
         auto r = run_schedule("istack", 2, ops,
                               {"p0", "a", "a", "ga", "ga", "b", "b", "p1", "cc",
                                "cc", "p0", "p1"});
         auto t = linearized_trace(r);
         c.expect_eq(format_trc1(t),
                     std::string("?p0=push(0) ?a=push(a) !a:() ?ga=pop() !ga:a "
                                 "?b=push(b) !b:() ?p1=push(1) ?cc=push(c) "
                                 "!cc:() !p0:() !p1:()"),
                     "trace");
         c.expect_eq(emitted_str(r), std::string("+0 +a -a +b +1 +c"), "emitted");
         c.expect(check_counting(t, emitted_spec(r), Criterion::QQC).accept,
                  "linearized trace not QQC vs emitted spec");
         for (const auto& [chains, open] : r.chain_open)
           c.expect(chains <= open, "chain invariant violated");
       }},
      {"elim.depth2", [](Check& c) {
         std::vector<OpSpec> ops = {{"e", "push", "e"},  {"b", "push", "b"},
                                    {"a", "push", "a"},  {"d", "push", "d"},
                                    {"cc", "push", "c"}, {"ge", "pop", ""},
                                    {"gd", "pop", ""},   {"gc", "pop", ""},
                                    {"gb", "pop", ""},   {"ga", "pop", ""}};
         std::vector<std::string> sched = {"e"};
         for (const char* o : {"b", "a", "d", "cc"})
           for (int k = 0; k < 3; ++k) sched.push_back(o);
         sched.push_back("e");
         sched.push_back("e");
         for (const char* o : {"ge", "gd", "gc", "gb", "ga"})
           for (int k = 0; k < 3; ++k) sched.push_back(o);
         auto r = elim_tree_run(2, ops, sched);
         // reference rows, one per op arrival/completion (clock of its last atomic)
         std::vector<std::pair<std::size_t, std::string>> rows = {
             {1, "(1,0,0||||)"},        {4, "(0,0,1|||b|)"},
             {7, "(1,1,1|a||b|)"},      {10, "(0,1,0|a||b|d)"},
             {13, "(1,0,0|a|c|b|d)"},   {15, "(1,1,0|a.e|c|b|d)"},
             {18, "(0,0,0|a|c|b|d)"},   {21, "(1,0,1|a|c|b|)"},
             {24, "(0,1,1|a||b|)"},     {27, "(1,1,0|a|||)"},
             {30, "(0,0,0||||)"}};
         for (const auto& [clock, want] : rows) {
           c.expect(clock <= r.steps.size(), "missing step");
           if (clock <= r.steps.size())
             c.expect_eq(r.steps[clock - 1].state, want,
                         "state at step " + std::to_string(clock));
         }
         auto t = linearized_trace(r);
         c.expect_eq(format_trc1(t),
                     std::string("?e=push(e) ?b=push(b) !b:() ?a=push(a) !a:() "
                                 "?d=push(d) !d:() ?cc=push(c) !cc:() !e:() "
                                 "?ge=pop() !ge:e ?gd=pop() !gd:d ?gc=pop() "
                                 "!gc:c ?gb=pop() !gb:b ?ga=pop() !ga:a"),
                     "trace");
         auto spec = parse_spec_trc1(
             "?m1=push(a) !m1:() ?m2=push(b) !m2:() ?m3=push(c) !m3:() "
             "?m4=push(d) !m4:() ?m5=push(e) !m5:() ?m6=pop() !m6:e "
             "?m7=pop() !m7:d ?m8=pop() !m8:c ?m9=pop() !m9:b ?m10=pop() !m10:a");
         c.expect(check_counting(t, spec, Criterion::QQC).accept,
                  "trace not QQC vs listed spec");
       }},
  };
  return fs;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& f : catalog()) out.push_back(f.name);
  return out;
}

std::vector<FixtureResult> run_fixtures(const std::string& filter) {
  std::vector<FixtureResult> out;
  for (const auto& f : catalog()) {
    if (!filter.empty() && f.name.rfind(filter, 0) != 0) continue;
    Check c;
    try {
      f.run(c);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail << (c.detail.str().empty() ? "" : "; ") << "exception: " << e.what();
    }
    out.push_back({f.name, c.pass, c.detail.str()});
  }
  return out;
}

}  // namespace qqc::fixtures
