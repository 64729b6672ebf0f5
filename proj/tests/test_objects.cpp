#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <functional>
#include <random>

#include "doctest.h"
#include "qqc/checkers.hpp"
#include "qqc/objects.hpp"
#include "qqc/trace.hpp"

using namespace qqc;

TEST_CASE("gen_spec counter") {
  auto spec = gen_spec(counter_object(), {{"inc", ""}, {"inc", ""}, {"inc", ""}});
  REQUIRE(spec.op_count() == 3);
  CHECK(spec.ret_at(1).label.payload == "0");
  CHECK(spec.ret_at(2).label.payload == "1");
  CHECK(spec.ret_at(3).label.payload == "2");
}

TEST_CASE("gen_spec stack and illegal pop") {
  auto spec = gen_spec(stack_object(), {{"push", "a"}, {"pop", ""}});
  CHECK(spec.ret_at(1).label.payload == "()");
  CHECK(spec.ret_at(2).label.payload == "a");
  CHECK_THROWS_AS(gen_spec(stack_object(), {{"pop", ""}}), ParseError);
}

TEST_CASE("counter semantics: inc pre-value, dec post-value, may go negative") {
  auto spec = gen_spec(counter_object(),
                       {{"dec", ""}, {"dec", ""}, {"inc", ""}, {"inc", ""}});
  CHECK(spec.ret_at(1).label.payload == "-1");
  CHECK(spec.ret_at(2).label.payload == "-2");
  CHECK(spec.ret_at(3).label.payload == "-2");
  CHECK(spec.ret_at(4).label.payload == "-1");
}

TEST_CASE("is_spec") {
  auto obj = stack_object();
  CHECK(is_spec(parse_spec_trc1(
                    "?1=push(a) !1:() ?2=push(b) !2:() ?3=pop() !3:b ?4=pop() !4:a"),
                obj));
  CHECK(!is_spec(parse_spec_trc1(
                     "?1=push(a) !1:() ?2=push(b) !2:() ?3=pop() !3:a"),
                 obj));
  // emitted sequence push a, push b, pop:a, push c is not a stack trace
  CHECK(!is_spec(parse_spec_trc1(
                     "?1=push(a) !1:() ?2=push(b) !2:() ?3=pop() !3:a ?4=push(c) !4:()"),
                 obj));
}

TEST_CASE("counter object matches a reference integer on random programs") {
  std::mt19937 rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    auto obj = counter_object();
    ObjState st = obj.initial;
    long long ref = 0;
    for (int k = 0; k < 8; ++k) {
      bool inc = rng() % 2 == 0;
      auto resp = obj.step(st, {inc ? "inc" : "dec", ""});
      REQUIRE(resp.has_value());
      long long want = inc ? ref++ : --ref;
      CHECK(*resp == std::to_string(want));
    }
  }
}

TEST_CASE("queue is FIFO on every legal program up to 6 ops") {
  auto obj = queue_object();
  // enumerate programs over {enq(v_k), deq} with distinct values
  std::function<void(ObjState, std::vector<std::string>, std::size_t, int)> go =
      [&](ObjState st, std::vector<std::string> pending, std::size_t enqs, int left) {
        if (left == 0) return;
        {
          ObjState s2 = st;
          std::string v = "v" + std::to_string(enqs);
          auto r = obj.step(s2, {"enq", v});
          REQUIRE(r.has_value());
          CHECK(*r == "()");
          auto p2 = pending;
          p2.push_back(v);
          go(s2, p2, enqs + 1, left - 1);
        }
        {
          ObjState s2 = st;
          auto r = obj.step(s2, {"deq", ""});
          if (pending.empty()) {
            CHECK(!r.has_value());
          } else {
            REQUIRE(r.has_value());
            CHECK(*r == pending.front());  // FIFO
            auto p2 = pending;
            p2.erase(p2.begin());
            go(s2, p2, enqs, left - 1);
          }
        }
      };
  go(obj.initial, {}, 0, 6);
}

TEST_CASE("find_witness: QQC witness for the quartet's second execution") {
  auto t = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  auto w = find_witness(t, counter_object(), Criterion::QQC);
  REQUIRE(w.has_value());
  CHECK(w->op_count() == 3);
  CHECK(is_spec(*w, counter_object()));
  CHECK(check_counting(t, *w, Criterion::QQC).accept);
  CHECK(!find_witness(t, counter_object(), Criterion::LIN).has_value());
}

TEST_CASE("find_witness: no QC witness for the inc/dec interlock") {
  auto ex3 = parse_trc1(
      "?1=inc() ?3=inc() ?2=dec() ?4=dec() !4:-2 !1:-2 !3:1 !2:1");
  CHECK(!find_witness(ex3, counter_object(), Criterion::QC, 0).has_value());
}

TEST_CASE("find_witness: LIN witness is the obvious one for a sequential run") {
  auto t = parse_trc1("?p=push(a) !p:() ?g=pop() !g:a");
  auto w = find_witness(t, stack_object(), Criterion::LIN);
  REQUIRE(w.has_value());
  CHECK(w->op_count() == 2);
  CHECK(w->call_at(1).label == Label{"push", "a"});
  CHECK(w->call_at(2).label == Label{"pop", ""});
}

TEST_CASE("find_witness: open push justifies an early pop") {
  // the pop's value comes from a push that never returns
  auto t = parse_trc1("?p=push(a) ?g=pop() !g:a");
  auto w = find_witness(t, stack_object(), Criterion::QQC, 0);
  REQUIRE(w.has_value());
  CHECK(is_spec(*w, stack_object()));
  CHECK(w->call_at(1).label == Label{"push", "a"});
  // without the open push the value is unjustifiable at any budget
  CHECK(!find_witness(parse_trc1("?g=pop() !g:a"), stack_object(), Criterion::QQC)
             .has_value());
}

TEST_CASE("find_witness respects the op bound") {
  std::string text;
  for (int k = 0; k < 9; ++k)
    text += "?x" + std::to_string(k) + "=inc() !x" + std::to_string(k) + ":" +
            std::to_string(k) + " ";
  CHECK_THROWS_AS(find_witness(parse_trc1(text), counter_object(), Criterion::LIN),
                  BoundError);
}

TEST_CASE("classify_vs_type on the quartet") {
  auto obj = counter_object();
  CHECK(classify_vs_type(parse_trc1("?c=inc() ?a=inc() !a:0 ?b=inc() !b:1 !c:2"),
                         obj) == Strength::LIN);
  CHECK(classify_vs_type(parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2"),
                         obj) == Strength::QQC);
  CHECK(classify_vs_type(parse_trc1("?a=inc() ?c=inc() !c:2 ?b=inc() !b:1 !a:0"),
                         obj) == Strength::QC);
}

TEST_CASE("classify_vs_type: stack pair with a late pop") {
  auto obj = stack_object();
  // pop inside the span of the pending push(c): QQC
  auto good = parse_trc1(
      "?c=push(c) ?a=push(a) !a:() ?b=push(b) !b:() ?g=pop() !g:a !c:()");
  CHECK(classify_vs_type(good, obj) == Strength::QQC);
  // pop after push(c) returned: not QQC
  auto late = parse_trc1(
      "?c=push(c) ?a=push(a) !a:() ?b=push(b) !b:() !c:() ?g=pop() !g:a");
  CHECK(classify_vs_type(late, obj) != Strength::LIN);
  CHECK(classify_vs_type(late, obj) != Strength::QQC);
}

TEST_CASE("embeds_as_subtrace") {
  auto obj = counter_object();
  CHECK(embeds_as_subtrace({{{"inc", ""}, "0"}, {{"inc", ""}, "1"}}, obj, 0, {}));
  CHECK(!embeds_as_subtrace({{{"inc", ""}, "7"}}, obj, 2, {}));
  // inc:1 embeds after one inserted inc
  CHECK(!embeds_as_subtrace({{{"inc", ""}, "1"}}, obj, 0, {}));
  CHECK(embeds_as_subtrace({{{"inc", ""}, "1"}}, obj, 1, {}));
  // pop:w embeds into push(w);pop using the fresh payload
  CHECK(embeds_as_subtrace({{{"pop", ""}, "w"}}, stack_object(), 1, {"w"}));
}

TEST_CASE("payload_candidates") {
  auto t = parse_trc1("?p=push(x) !p:() ?q=push(y) !q:()");
  auto cs = payload_candidates(t);
  CHECK(std::count(cs.begin(), cs.end(), "x") == 1);
  CHECK(std::count(cs.begin(), cs.end(), "y") == 1);
  bool fresh = false;
  for (const auto& c : cs) fresh |= c != "x" && c != "y";
  CHECK(fresh);
}

TEST_CASE("object_by_name") {
  CHECK(object_by_name("counter").name == "counter");
  CHECK(object_by_name("stack").name == "stack");
  CHECK(object_by_name("queue").name == "queue");
  CHECK_THROWS_AS(object_by_name("deque"), ParseError);
}
