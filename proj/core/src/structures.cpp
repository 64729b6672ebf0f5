#include "qqc/structures.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace qqc {

namespace {

struct SimState {
  std::string kind;
  std::size_t N = 2;
  std::size_t depth = 0;
  // counter
  std::vector<long long> c;
  // stack families
  std::vector<std::vector<std::string>> s;
  std::size_t b = 0;
  // instrumented
  std::size_t e = 0;
  std::vector<std::vector<Label>> q;
  std::vector<Label> emitted;
  // elimination tree
  std::vector<int> toggles;  // heap layout, 2^depth - 1 nodes
};

struct OpProgress {
  OpSpec spec;
  std::size_t stage = 0;     // atomic sections completed
  std::size_t node = 0;      // elimtree: current node (heap index)
  std::size_t leafbits = 0;  // elimtree: accumulated path
  std::size_t i = 0;         // chosen leaf index
  std::optional<std::string> result;
};

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += sep;
    out += xs[k];
  }
  return out;
}

std::string queue_str(const std::vector<Label>& q) {
  std::vector<std::string> parts;
  for (const auto& a : q)
    parts.push_back((a.method == "push" ? "+" : "-") + a.payload);
  return join(parts, ".");
}

std::string state_str(const SimState& st) {
  std::ostringstream os;
  if (st.kind == "counter") {
    os << "(" << st.b << "|";
    for (std::size_t i = 0; i < st.N; ++i) os << (i ? "," : "") << st.c[i];
    os << ")";
  } else if (st.kind == "elimtree") {
    os << "(";
    for (std::size_t i = 0; i < st.toggles.size(); ++i)
      os << (i ? "," : "") << st.toggles[i];
    os << "|";
    for (std::size_t i = 0; i < st.s.size(); ++i)
      os << (i ? "|" : "") << join(st.s[i], ".");
    os << ")";
  } else {
    os << "(" << st.b;
    for (std::size_t i = 0; i < st.N; ++i) os << "|" << join(st.s[i], ".");
    if (st.kind == "istack") {
      os << "|" << st.e;
      for (std::size_t i = 0; i < st.N; ++i) os << "|" << queue_str(st.q[i]);
    }
    os << ")";
  }
  return os.str();
}

void emit(SimState& st) {
  auto first_is = [&](std::size_t i, const char* m) {
    return !st.q[i].empty() && st.q[i].front().method == m;
  };
  auto prev = [&] { return (st.e + st.N - 1) % st.N; };
  while (first_is(st.e, "push") || first_is(prev(), "pop")) {
    if (first_is(st.e, "push")) {
      st.emitted.push_back(st.q[st.e].front());
      st.q[st.e].erase(st.q[st.e].begin());
      st.e = (st.e + 1) % st.N;
    }
    if (first_is(prev(), "pop")) {
      std::size_t i = prev();
      st.emitted.push_back(st.q[i].front());
      st.q[i].erase(st.q[i].begin());
      st.e = i;
    }
  }
}

// One atomic section of a two-atomic op.  Returns true when the op finished.
bool step_two_atomic(SimState& st, OpProgress& op) {
  const std::string& m = op.spec.method;
  if (op.stage == 0) {
    if (m == "inc" || m == "push") {
      op.i = st.b;
      st.b = (st.b + 1) % st.N;
    } else if (m == "dec" || m == "pop") {
      st.b = (st.b + st.N - 1) % st.N;
      op.i = st.b;
    } else {
      throw ParseError("unknown method: " + m);
    }
    return false;
  }
  if (m == "inc") {
    op.result = std::to_string(st.c[op.i]);
    st.c[op.i] += static_cast<long long>(st.N);
  } else if (m == "dec") {
    st.c[op.i] -= static_cast<long long>(st.N);
    op.result = std::to_string(st.c[op.i]);
  } else if (m == "push") {
    st.s[op.i].push_back(op.spec.arg);
    op.result = "()";
    if (st.kind == "istack") {
      st.q[op.i].push_back({"push", op.spec.arg});
      emit(st);
    }
  } else {  // pop
    if (st.s[op.i].empty())
      throw StuckError("stuck-op: " + op.spec.id + " pops empty leaf " +
                       std::to_string(op.i));
    std::string v = st.s[op.i].back();
    st.s[op.i].pop_back();
    op.result = v;
    if (st.kind == "istack") {
      st.q[op.i].push_back({"pop", v});
      emit(st);
    }
  }
  return true;
}

// One atomic section of an elimination-tree op (d toggles, then leaf action).
bool step_elim(SimState& st, OpProgress& op) {
  bool is_push = op.spec.method == "push";
  if (op.stage < st.depth) {
    int& t = st.toggles[op.node];
    bool go_right = is_push ? (t == 1) : (t == 0);
    t ^= 1;
    op.leafbits = (op.leafbits << 1) | (go_right ? 1 : 0);
    op.node = 2 * op.node + (go_right ? 2 : 1);
    return false;
  }
  op.i = op.leafbits;
  if (is_push) {
    st.s[op.i].push_back(op.spec.arg);
    op.result = "()";
  } else {
    if (st.s[op.i].empty())
      throw StuckError("stuck-op: " + op.spec.id + " pops empty leaf " +
                       std::to_string(op.i));
    op.result = st.s[op.i].back();
    st.s[op.i].pop_back();
  }
  return true;
}

ExecutionRecord run(const std::string& kind, std::size_t N, std::size_t depth,
                    const std::vector<OpSpec>& ops,
                    const std::vector<std::string>& schedule) {
  ExecutionRecord rec;
  rec.kind = kind;
  rec.N = N;
  rec.depth = depth;
  rec.ops = ops;
  rec.schedule = schedule;
  rec.instrumented = kind == "istack";

  SimState st;
  st.kind = kind;
  st.N = N;
  st.depth = depth;
  if (kind == "counter") {
    st.c.resize(N);
    for (std::size_t i = 0; i < N; ++i) st.c[i] = static_cast<long long>(i);
  } else if (kind == "elimtree") {
    st.toggles.assign((std::size_t{1} << depth) - 1, 0);
    st.s.resize(std::size_t{1} << depth);
  } else {
    st.s.resize(N);
    if (kind == "istack") st.q.resize(N);
  }

  std::map<std::string, OpProgress> prog;
  for (const auto& op : ops) {
    if (!prog.emplace(op.id, OpProgress{op, 0, 0, 0, 0, std::nullopt}).second)
      throw ParseError("duplicate op id: " + op.id);
  }
  std::size_t sections = kind == "elimtree" ? depth + 1 : 2;

  std::size_t clock = 0;
  for (const auto& id : schedule) {
    auto it = prog.find(id);
    if (it == prog.end()) throw ParseError("schedule references unknown op: " + id);
    OpProgress& op = it->second;
    if (op.stage >= sections)
      throw ParseError("schedule references finished op: " + id);
    ++clock;
    bool done = kind == "elimtree" ? step_elim(st, op) : step_two_atomic(st, op);
    if (op.stage == 0) rec.ftime1.emplace(id, clock);
    ++op.stage;
    if (done) {
      rec.ftime2.emplace(id, clock);
      rec.results.emplace(id, *op.result);
      if (kind != "counter") rec.leaf.emplace(id, op.i);
    }
    rec.steps.push_back({clock, id, static_cast<int>(op.stage), state_str(st)});
    if (rec.instrumented) {
      InstrumentedQueues iq{st.N, st.e, st.q};
      std::size_t open = 0;
      for (const auto& [oid, p] : prog)
        if (p.stage > 0 && p.stage < sections) ++open;
      rec.chain_open.push_back({chain_count(iq), open});
    }
  }
  rec.emitted = st.emitted;
  return rec;
}

}  // namespace

ExecutionRecord run_schedule(const std::string& kind, std::size_t N,
                             const std::vector<OpSpec>& ops,
                             const std::vector<std::string>& schedule) {
  if (kind != "counter" && kind != "stack" && kind != "istack")
    throw ParseError("unknown structure kind: " + kind);
  if (N < 1) throw ParseError("N must be positive");
  return run(kind, N, 0, ops, schedule);
}

ExecutionRecord elim_tree_run(std::size_t depth, const std::vector<OpSpec>& ops,
                              const std::vector<std::string>& schedule) {
  if (depth < 1) throw ParseError("depth must be at least 1");
  return run("elimtree", std::size_t{1} << depth, depth, ops, schedule);
}

std::vector<std::vector<std::string>> enumerate_schedules(
    const std::vector<OpSpec>& ops, std::size_t steps_per_op, std::size_t bound) {
  if (ops.size() * steps_per_op > bound)
    throw BoundError("schedule enumeration bound exceeded");
  std::vector<std::string> base;
  for (const auto& op : ops)
    for (std::size_t k = 0; k < steps_per_op; ++k) base.push_back(op.id);
  std::sort(base.begin(), base.end());
  std::vector<std::vector<std::string>> out;
  do {
    out.push_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

OperationalTrace linearized_trace(const ExecutionRecord& r) {
  std::vector<std::pair<std::size_t, Token>> timed;
  for (const auto& op : r.ops) {
    auto f1 = r.ftime1.find(op.id);
    if (f1 == r.ftime1.end()) continue;
    timed.push_back({f1->second, {Polarity::call, op.id, op.method, op.arg}});
    auto f2 = r.ftime2.find(op.id);
    if (f2 != r.ftime2.end())
      timed.push_back({f2->second, {Polarity::ret, op.id, "", r.results.at(op.id)}});
  }
  std::sort(timed.begin(), timed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Token> tokens;
  for (auto& [_, tok] : timed) tokens.push_back(std::move(tok));
  return from_tokens(tokens);
}

SequentialTrace emitted_spec(const ExecutionRecord& r) {
  if (!r.instrumented) throw ParseError("record has no emitted specification");
  std::vector<Token> tokens;
  std::size_t k = 0;
  for (const auto& a : r.emitted) {
    std::string name = "m" + std::to_string(++k);
    if (a.method == "push") {
      tokens.push_back({Polarity::call, name, "push", a.payload});
      tokens.push_back({Polarity::ret, name, "", "()"});
    } else {
      tokens.push_back({Polarity::call, name, "pop", ""});
      tokens.push_back({Polarity::ret, name, "", a.payload});
    }
  }
  return as_sequential(from_tokens(tokens));
}

std::optional<PopViolation> properly_popped(const ExecutionRecord& r) {
  for (const auto& a : r.ops) {
    if (a.method != "push" || !r.ftime2.count(a.id)) continue;
    for (const auto& b : r.ops) {
      if (b.method != "pop" || !r.ftime2.count(b.id)) continue;
      // crossing in either direction: the pair passes each other between the
      // balancer atomic and the leaf atomic.  The reverse crossing (pop first
      // at the balancer, push first at the leaf) also starves the emitter:
      // schedule g,p,p,g on one push and one pop leaves a pending chain at
      // quiescence, so it must count as overtaking too.  Cross-leaf pairs
      // matter as well: a pop that grabs a leaf before a push completes
      // elsewhere can return a stale top that the emitter can never print
      // (p0,g0,p0,p1,p2,p2,g0,p1 on three pushes and one pop), so no leaf
      // filter is applied.
      bool fwd = r.ftime1.at(a.id) < r.ftime1.at(b.id) &&
                 r.ftime2.at(b.id) < r.ftime2.at(a.id);
      bool rev = r.ftime1.at(b.id) < r.ftime1.at(a.id) &&
                 r.ftime2.at(a.id) < r.ftime2.at(b.id);
      if (fwd || rev) return PopViolation{a.id, b.id};
    }
  }
  return std::nullopt;
}

std::size_t chain_count(const InstrumentedQueues& s) {
  std::size_t chains = 0;
  for (const auto& q : s.q) {
    if (q.empty()) continue;
    ++chains;
    for (std::size_t k = 1; k < q.size(); ++k)
      if (q[k].method == q[k - 1].method) ++chains;
  }
  return chains;
}

std::string format_record(const ExecutionRecord& r) {
  std::ostringstream os;
  os << "run " << r.kind << " N=" << r.N << " seed=" << r.seed << "\n";
  for (const auto& s : r.steps)
    os << "step " << s.clock << " op=" << s.op << " atomic=" << s.atomic
       << " state=" << s.state << "\n";
  os << format_trc1(linearized_trace(r)) << "\n";
  if (r.instrumented) {
    std::vector<std::string> parts;
    for (const auto& a : r.emitted)
      parts.push_back((a.method == "push" ? "+" : "-") + a.payload);
    os << "emitted " << join(parts, " ") << "\n";
  }
  return os.str();
}

ExecutionRecord run_stress(const std::string& kind, std::size_t N,
                           const std::vector<OpSpec>& ops, unsigned seed) {
  // Threads race for a global lock; the winning order becomes the schedule,
  // which is then replayed deterministically for the state snapshots.
  std::mutex mu;
  std::vector<std::string> schedule;
  std::vector<std::thread> threads;
  std::mt19937 rng(seed);
  std::vector<unsigned> delays;
  for (std::size_t k = 0; k < ops.size() * 2; ++k)
    delays.push_back(rng() % 50);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    threads.emplace_back([&, k] {
      for (int sec = 0; sec < 2; ++sec) {
        std::this_thread::sleep_for(std::chrono::microseconds(delays[2 * k + sec]));
        std::lock_guard<std::mutex> lock(mu);
        schedule.push_back(ops[k].id);
      }
    });
  }
  for (auto& t : threads) t.join();
  ExecutionRecord rec = run_schedule(kind, N, ops, schedule);
  rec.seed = seed;
  return rec;
}

}  // namespace qqc
