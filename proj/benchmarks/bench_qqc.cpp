#include <benchmark/benchmark.h>

#include "qqc/checkers.hpp"
#include "qqc/objects.hpp"
#include "qqc/structures.hpp"
#include "qqc/trace.hpp"

using namespace qqc;

namespace {

SequentialTrace counter_spec(int n) {
  std::vector<Label> invs(static_cast<std::size_t>(n), Label{"inc", ""});
  return gen_spec(counter_object(), invs);
}

void BM_qqc_counting(benchmark::State& state) {
  auto t = parse_trc1(
      "?e=inc() ?b=inc() !b:1 ?d=inc() ?a=inc() !a:0 !d:3 ?c=inc() !c:2 !e:4");
  auto spec = counter_spec(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_counting(t, spec, Criterion::QQC).accept);
}
BENCHMARK(BM_qqc_counting);

void BM_qqc_cutdef(benchmark::State& state) {
  auto t = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  auto spec = counter_spec(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_cutdef(t, spec, Criterion::QQC).accept);
}
BENCHMARK(BM_qqc_cutdef);

void BM_prefix_enumeration(benchmark::State& state) {
  auto n = state.range(0);
  std::string text;
  for (long k = 0; k < n; ++k) text += "?x" + std::to_string(k) + "=inc() ";
  for (long k = 0; k < n; ++k)
    text += "!x" + std::to_string(k) + ":" + std::to_string(k) + " ";
  auto t = parse_trc1(text);
  for (auto _ : state) benchmark::DoNotOptimize(prefixes(t.trace).size());
}
BENCHMARK(BM_prefix_enumeration)->Arg(3)->Arg(5)->Arg(7);

void BM_schedule_enumeration(benchmark::State& state) {
  std::vector<OpSpec> ops;
  for (long k = 0; k < state.range(0); ++k)
    ops.push_back({"i" + std::to_string(k), "inc", ""});
  for (auto _ : state)
    benchmark::DoNotOptimize(enumerate_schedules(ops, 2).size());
}
BENCHMARK(BM_schedule_enumeration)->Arg(3)->Arg(4)->Arg(5);

void BM_find_witness(benchmark::State& state) {
  auto t = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  auto obj = counter_object();
  for (auto _ : state)
    benchmark::DoNotOptimize(find_witness(t, obj, Criterion::QQC).has_value());
}
BENCHMARK(BM_find_witness);

}  // namespace

BENCHMARK_MAIN();
