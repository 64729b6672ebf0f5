// Acceptance gate: one pass/fail line per criterion.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qqc/checkers.hpp"
#include "qqc/compose.hpp"
#include "qqc/objects.hpp"
#include "qqc/proxy.hpp"
#include "qqc/structures.hpp"
#include "qqc/trace.hpp"

using namespace qqc;

namespace {

struct Criterion13 {
  int id;
  std::string title;
  std::function<bool(std::string&)> run;
};

bool fixtures_pass(const std::string& filter, std::string& why) {
  auto rs = fixtures::run_fixtures(filter);
  if (rs.empty()) {
    why = "no fixtures matched " + filter;
    return false;
  }
  for (const auto& r : rs)
    if (!r.pass) {
      why = r.name + ": " + r.detail;
      return false;
    }
  return true;
}

SequentialTrace counter_spec(int n) {
  std::vector<Label> invs(static_cast<std::size_t>(n), Label{"inc", ""});
  return gen_spec(counter_object(), invs);
}

std::vector<SequentialTrace> counter_specs_upto(int max_ops) {
  std::vector<SequentialTrace> out;
  auto obj = counter_object();
  std::function<void(std::vector<Label>)> go = [&](std::vector<Label> invs) {
    if (!invs.empty()) out.push_back(gen_spec(obj, invs));
    if (static_cast<int>(invs.size()) == max_ops) return;
    for (const char* m : {"inc", "dec"}) {
      auto next = invs;
      next.push_back({m, ""});
      go(next);
    }
  };
  go({});
  return out;
}

std::vector<OperationalTrace> all_orders(const SequentialTrace& spec) {
  auto base = to_tokens(spec.as_operational());
  std::vector<std::size_t> idx(base.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<OperationalTrace> out;
  do {
    std::vector<Token> seq;
    std::set<std::string> called;
    bool ok = true;
    for (std::size_t i : idx) {
      if (base[i].pol == Polarity::ret && !called.count(base[i].name)) {
        ok = false;
        break;
      }
      called.insert(base[i].name);
      seq.push_back(base[i]);
    }
    if (ok) out.push_back(from_tokens(seq));
  } while (std::next_permutation(idx.begin(), idx.end()));
  return out;
}

OperationalTrace random_order(const SequentialTrace& spec, std::mt19937& rng) {
  auto base = to_tokens(spec.as_operational());
  std::vector<Token> calls, rets, seq, returnable;
  for (const auto& tk : base)
    (tk.pol == Polarity::call ? calls : rets).push_back(tk);
  std::size_t next_call = 0;
  while (next_call < calls.size() || !returnable.empty()) {
    bool do_call =
        next_call < calls.size() && (returnable.empty() || rng() % 2 == 0);
    if (do_call) {
      for (const auto& r : rets)
        if (r.name == calls[next_call].name) returnable.push_back(r);
      seq.push_back(calls[next_call++]);
    } else {
      std::size_t pick = rng() % returnable.size();
      seq.push_back(returnable[pick]);
      returnable.erase(returnable.begin() + static_cast<long>(pick));
    }
  }
  return from_tokens(seq);
}

// schedules of 2-atomic ops with at most max_open concurrently started ops
bool open_bounded(const std::vector<std::string>& sched, std::size_t max_open) {
  std::map<std::string, int> stage;
  std::size_t open = 0, peak = 0;
  for (const auto& id : sched) {
    int s = ++stage[id];
    if (s == 1) ++open;
    if (s == 2) --open;
    peak = std::max(peak, open);
  }
  return peak <= max_open;
}

std::vector<OpSpec> push_pop_ops(int pushes, int pops) {
  std::vector<OpSpec> ops;
  for (int k = 0; k < pushes; ++k)
    ops.push_back({"p" + std::to_string(k), "push", "x" + std::to_string(k)});
  for (int k = 0; k < pops; ++k)
    ops.push_back({"g" + std::to_string(k), "pop", ""});
  return ops;
}

bool crit1(std::string& why) {
  auto start = std::chrono::steady_clock::now();
  auto spec = counter_spec(3);
  struct Row {
    const char* text;
    Strength want;
  } rows[] = {
      {"?c=inc() ?a=inc() !a:0 ?b=inc() !b:1 !c:2", Strength::LIN},
      {"?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2", Strength::QQC},
      {"?a=inc() ?c=inc() !c:2 ?b=inc() !b:1 !a:0", Strength::QC},
      {"?a=inc() ?c=inc() !c:2 !a:0 ?b=inc() !b:1", Strength::NONE},
  };
  for (const auto& row : rows) {
    auto got = classify(parse_trc1(row.text), spec);
    if (got != row.want) {
      why = std::string(row.text) + " classified " + to_string(got);
      return false;
    }
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
  if (ms >= 1000) {
    why = "took " + std::to_string(ms) + "ms";
    return false;
  }
  return true;
}

bool crit2(std::string& why) {
  for (const auto& spec : counter_specs_upto(3)) {
    for (const auto& t : all_orders(spec)) {
      for (Criterion c : {Criterion::LIN, Criterion::QC, Criterion::QQC}) {
        if (check_counting(t, spec, c).accept != check_cutdef(t, spec, c).accept) {
          why = to_string(c) + " disagreement on " + format_trc1(t);
          return false;
        }
      }
    }
  }
  std::mt19937 rng(20260823);
  auto obj = counter_object();
  for (int iter = 0; iter < 1000; ++iter) {
    int n = 4 + static_cast<int>(rng() % 2);
    std::vector<Label> invs;
    for (int k = 0; k < n; ++k)
      invs.push_back(rng() % 3 == 0 ? Label{"dec", ""} : Label{"inc", ""});
    auto spec = gen_spec(obj, invs);
    auto t = random_order(spec, rng);
    for (Criterion c : {Criterion::LIN, Criterion::QC, Criterion::QQC}) {
      if (check_counting(t, spec, c).accept != check_cutdef(t, spec, c).accept) {
        why = to_string(c) + " disagreement on seeded " + format_trc1(t);
        return false;
      }
    }
  }
  return true;
}

bool crit3(std::string& why) {
  for (const auto& spec : counter_specs_upto(3)) {
    for (const auto& t : all_orders(spec)) {
      bool lin = check_counting(t, spec, Criterion::LIN).accept;
      bool qqc = check_counting(t, spec, Criterion::QQC).accept;
      bool qc = check_counting(t, spec, Criterion::QC).accept;
      if ((lin && !qqc) || (qqc && !qc)) {
        why = "chain broken on " + format_trc1(t);
        return false;
      }
    }
  }
  auto spec3 = counter_spec(3);
  auto qqc_not_lin = parse_trc1("?c=inc() ?b=inc() !b:1 ?a=inc() !a:0 !c:2");
  auto qc_not_qqc = parse_trc1("?a=inc() ?c=inc() !c:2 ?b=inc() !b:1 !a:0");
  if (check_counting(qqc_not_lin, spec3, Criterion::LIN).accept ||
      !check_counting(qqc_not_lin, spec3, Criterion::QQC).accept) {
    why = "first separating witness wrong";
    return false;
  }
  if (check_counting(qc_not_qqc, spec3, Criterion::QQC).accept ||
      !check_counting(qc_not_qqc, spec3, Criterion::QC).accept) {
    why = "second separating witness wrong";
    return false;
  }
  return true;
}

bool crit4(std::string& why) {
  for (int n = 1; n <= 5; ++n) {
    std::vector<OpSpec> ops;
    for (int k = 0; k < n; ++k) ops.push_back({"i" + std::to_string(k), "inc", ""});
    for (const auto& sched : enumerate_schedules(ops, 2)) {
      if (!open_bounded(sched, 2)) continue;
      auto r = run_schedule("counter", 2, ops, sched);
      auto t = linearized_trace(r);
      auto w = find_witness(t, counter_object(), Criterion::QQC, 0);
      if (!w.has_value()) {
        why = "no QQC witness for " + format_trc1(t);
        return false;
      }
      std::size_t rank = 0;
      for (const auto& name : t.arrangement) {
        const Event& e = t.trace.at(name);
        if (!e.is_ret()) continue;
        ++rank;
        long long v = std::stoll(e.label.payload);
        long long dev = v - static_cast<long long>(rank - 1);
        if (dev < -2 || dev > 2) {
          why = "deviation " + std::to_string(dev) + " in " + format_trc1(t);
          return false;
        }
      }
    }
  }
  return true;
}

bool crit5(std::string& why) {
  if (!fixtures_pass("ex2", why) || !fixtures_pass("ex3", why)) return false;
  auto ex3 = parse_trc1(
      "?1=inc() ?3=inc() ?2=dec() ?4=dec() !4:-2 !1:-2 !3:1 !2:1");
  if (find_witness(ex3, counter_object(), Criterion::QC, 0).has_value()) {
    why = "unexpected QC witness for the inc/dec interlock";
    return false;
  }
  return true;
}

bool crit6(std::string& why) { return fixtures_pass("ex4", why); }

bool crit7(std::string& why) {
  for (int n = 1; n <= 5; ++n) {
    for (int pushes = n; pushes >= 0; --pushes) {
      auto ops = push_pop_ops(pushes, n - pushes);
      for (const auto& sched : enumerate_schedules(ops, 2)) {
        ExecutionRecord r;
        try {
          r = run_schedule("istack", 2, ops, sched);
        } catch (const StuckError&) {
          continue;  // a pop hit an empty leaf under this schedule
        }
        if (properly_popped(r).has_value()) continue;
        for (const auto& [chains, open] : r.chain_open)
          if (chains > open) {
            why = "chain invariant broken under schedule of " +
                  std::to_string(n) + " ops";
            return false;
          }
        auto spec = emitted_spec(r);
        if (!is_spec(spec, stack_object())) {
          why = "emitted sequence is not a stack trace: " +
                format_trc1(spec.as_operational());
          return false;
        }
        auto t = linearized_trace(r);
        if (!check_counting(t, spec, Criterion::QQC).accept) {
          why = "linearized trace not QQC vs emitted: " + format_trc1(t);
          return false;
        }
      }
    }
  }
  return true;
}

bool crit8(std::string& why) {
  std::mt19937 mix(8);
  std::size_t completed = 0;
  for (int run = 0; run < 10000; ++run) {
    bool use_stack = run % 2 == 1;
    auto obj = use_stack ? stack_object() : counter_object();
    std::vector<ProxyRequest> reqs;
    int n = 1 + static_cast<int>(mix() % 6);
    for (int k = 0; k < n; ++k) {
      std::string name = "t" + std::to_string(k);
      if (use_stack)
        reqs.push_back({name, mix() % 2 ? Label{"push", "v" + std::to_string(k)}
                                        : Label{"pop", ""}});
      else
        reqs.push_back({name, mix() % 2 ? Label{"inc", ""} : Label{"dec", ""}});
    }
    auto oracle = random_oracle(static_cast<unsigned>(run), obj, reqs);
    ProxyRunResult res;
    try {
      res = run_proxy_seeded(obj, reqs, *oracle,
                             static_cast<unsigned>(run) * 2654435761u + 1);
    } catch (const StuckError&) {
      continue;  // oracle ran out of legal predictions
    }
    ++completed;
    if (!check_counting(res.trace, res.executed_spec, Criterion::QQC).accept) {
      why = "run " + std::to_string(run) + " not QQC: " + format_trc1(res.trace);
      return false;
    }
  }
  if (completed < 5000) {
    why = "only " + std::to_string(completed) + " runs completed";
    return false;
  }
  return true;
}

bool crit9(std::string& why) {
  std::size_t reproduced = 0;
  for (const auto& spec : counter_specs_upto(3)) {
    for (const auto& t : all_orders(spec)) {
      if (!check_counting(t, spec, Criterion::QQC).accept) continue;
      auto oracle = replay_oracle(spec);
      ProxyRunResult res;
      try {
        res = run_proxy(counter_object(), requests_of(t), *oracle,
                        derive_replay_schedule(t));
      } catch (const std::exception& e) {
        why = "replay stuck on " + format_trc1(t) + ": " + e.what();
        return false;
      }
      if (format_trc1(res.trace) != format_trc1(t)) {
        why = "reproduced " + format_trc1(res.trace) + " for " + format_trc1(t);
        return false;
      }
      ++reproduced;
    }
  }
  if (reproduced == 0) {
    why = "empty QQC corpus";
    return false;
  }
  return true;
}

bool crit10(std::string& why) { return fixtures_pass("sec44", why); }

bool crit11(std::string& why) {
  std::mt19937 rng(11);
  auto obj = counter_object();
  for (int iter = 0; iter < 200; ++iter) {
    int n1 = 1 + static_cast<int>(rng() % 3);
    int n2 = 1 + static_cast<int>(rng() % 3);
    std::vector<Token> seq;
    std::vector<std::vector<Token>> streams(2);
    for (int side = 0; side < 2; ++side) {
      int n = side == 0 ? n1 : n2;
      std::vector<Label> invs(static_cast<std::size_t>(n), Label{"inc", ""});
      auto spec = gen_spec(obj, invs);
      auto toks = to_tokens(spec.as_operational());
      for (auto& tk : toks) tk.name = (side == 0 ? "a" : "b") + tk.name;
      streams[static_cast<std::size_t>(side)] = toks;
    }
    std::size_t i = 0, j = 0;
    while (i < streams[0].size() || j < streams[1].size()) {
      bool take0 = j == streams[1].size() ||
                   (i < streams[0].size() && rng() % 2 == 0);
      seq.push_back(take0 ? streams[0][i++] : streams[1][j++]);
    }
    auto alpha = from_tokens(seq);
    std::set<std::string> first;
    std::vector<Token> s1 = streams[0], s2 = streams[1];
    for (const auto& tk : s1)
      if (tk.pol == Polarity::call) first.insert(tk.name);
    auto b1 = as_sequential(from_tokens(s1));
    auto b2 = as_sequential(from_tokens(s2));
    for (Criterion c : {Criterion::QQC, Criterion::LIN}) {
      auto res = check_compositional(alpha, first, b1, b2, c);
      if (!res.ok) {
        why = to_string(c) + " no witness for " + format_trc1(alpha) + ": " +
              res.error;
        return false;
      }
      if (!check_counting(alpha, res.witness, c).accept) {
        why = to_string(c) + " witness rejected for " + format_trc1(alpha);
        return false;
      }
    }
  }
  return true;
}

bool crit12(std::string& why) { return fixtures_pass("sec45", why); }

bool crit13(std::string& why) {
  if (!fixtures_pass("elim.depth2", why)) return false;
  for (int n = 1; n <= 4; ++n) {
    for (int pushes = n; pushes >= 0; --pushes) {
      auto ops = push_pop_ops(pushes, n - pushes);
      for (const auto& sched : enumerate_schedules(ops, 2)) {
        bool stuck1 = false, stuck2 = false;
        ExecutionRecord r1, r2;
        try {
          r1 = run_schedule("stack", 2, ops, sched);
        } catch (const StuckError&) {
          stuck1 = true;
        }
        try {
          r2 = elim_tree_run(1, ops, sched);
        } catch (const StuckError&) {
          stuck2 = true;
        }
        if (stuck1 != stuck2) {
          why = "stuck behavior differs on a " + std::to_string(n) +
                "-op schedule";
          return false;
        }
        if (stuck1) continue;
        if (r1.results != r2.results ||
            format_trc1(linearized_trace(r1)) !=
                format_trc1(linearized_trace(r2))) {
          why = "depth-1 tree and 2-Stack diverge on a " + std::to_string(n) +
                "-op schedule";
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion13> criteria = {
      {1, "worked-example quartet classifies LIN/QQC/QC/NONE", crit1},
      {2, "counting and cut-based checkers agree (exhaustive + 1000 seeded)", crit2},
      {3, "refinement chain with separating witnesses", crit3},
      {4, "2-Counter bounded-deviation sweep (<= 2 open calls)", crit4},
      {5, "counter state tables and inc/dec interlock without QC witness", crit5},
      {6, "stack overtaking example and its variant", crit6},
      {7, "exhaustive 2-Stack sweep: properly popped => stack spec + QQC", crit7},
      {8, "10000 seeded speculative proxy runs stay QQC", crit8},
      {9, "proxy replay reproduces every small QQC counter trace", crit9},
      {10, "fmerge reproduces the worked interleaving lists", crit10},
      {11, "200 seeded two-object runs compose for QQC and LIN", crit11},
      {12, "stack/queue comparison family", crit12},
      {13, "elimination tree table and depth-1 bisimulation", crit13},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::string why;
    bool ok = false;
    try {
      ok = c.run(why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("criterion %2d: %s - %s%s%s\n", c.id, ok ? "PASS" : "FAIL",
                c.title.c_str(), why.empty() ? "" : " | ", why.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
