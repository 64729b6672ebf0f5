#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qqc/trace.hpp"

// Deterministic atomic-step simulators for the balancer-based structures:
// N-Counter, N-Stack, instrumented (emitter) N-Stack, and the binary
// elimination-tree stack.  A schedule is an explicit sequence of op ids, each
// entry consuming that op's next atomic section.

namespace qqc {

class StuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OpSpec {
  std::string id;
  std::string method;  // inc | dec | push | pop
  std::string arg;     // push only
};

struct StepRecord {
  std::size_t clock = 0;  // 1-based global step index
  std::string op;
  int atomic = 0;  // which atomic section of the op (1-based)
  std::string state;
};

struct ExecutionRecord {
  std::string kind;  // counter | stack | istack | elimtree
  std::size_t N = 2;
  std::size_t depth = 0;  // elimtree only
  unsigned seed = 0;
  std::vector<OpSpec> ops;
  std::vector<std::string> schedule;
  std::vector<StepRecord> steps;
  std::map<std::string, std::size_t> ftime1, ftime2;
  std::map<std::string, std::string> results;
  std::map<std::string, std::size_t> leaf;  // stack families: assigned leaf
  bool instrumented = false;
  std::vector<Label> emitted;  // method push/pop, payload = value
  // per-step (chain count, open calls), instrumented runs only
  std::vector<std::pair<std::size_t, std::size_t>> chain_open;

  bool complete() const {
    return ftime2.size() == ops.size();
  }
};

inline constexpr std::size_t kDefaultScheduleBound = 14;

// kind: counter | stack | istack.  Two atomic sections per op.
ExecutionRecord run_schedule(const std::string& kind, std::size_t N,
                             const std::vector<OpSpec>& ops,
                             const std::vector<std::string>& schedule);

// Binary elimination tree of the given depth; d+1 atomic sections per op.
ExecutionRecord elim_tree_run(std::size_t depth, const std::vector<OpSpec>& ops,
                              const std::vector<std::string>& schedule);

// All interleavings of the ops' atomic-step sequences.
std::vector<std::vector<std::string>> enumerate_schedules(
    const std::vector<OpSpec>& ops, std::size_t steps_per_op,
    std::size_t bound = kDefaultScheduleBound);

// Calls ordered by first-atomic time, returns by second-atomic time, merged
// on the global clock.  Unfinished ops stay open calls.
OperationalTrace linearized_trace(const ExecutionRecord& r);

// The instrumented run's printed action sequence as an alternating spec.
SequentialTrace emitted_spec(const ExecutionRecord& r);

struct PopViolation {
  std::string push_op;
  std::string pop_op;
};

// Violation of: every completed push a and pop b must order their balancer
// atomics and leaf atomics consistently (t1(a) < t1(b) iff t2(a) < t2(b)).
// nullopt = properly popped.
std::optional<PopViolation> properly_popped(const ExecutionRecord& r);

struct InstrumentedQueues {
  std::size_t N = 2;
  std::size_t e = 0;
  std::vector<std::vector<Label>> q;
};

// Pending chains: per queue, one per maximal alternating-polarity run.
std::size_t chain_count(const InstrumentedQueues& s);

// Line-oriented serialization: run header, step lines, TRC1 trace, emitted
// spec for instrumented runs.
std::string format_record(const ExecutionRecord& r);

// Real-thread stress run: one thread per op, atomic sections under a global
// mutex, timestamps from a monotone step counter.  Returns a record that
// passes the same validators; states are not recorded.
ExecutionRecord run_stress(const std::string& kind, std::size_t N,
                           const std::vector<OpSpec>& ops, unsigned seed);

}  // namespace qqc
