#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qqc/objects.hpp"
#include "qqc/structures.hpp"
#include "qqc/trace.hpp"

// Speculative flat-combining proxy: a single service loop moves arrived
// invocations from called to received, runs an oracle-predicted invocation on
// the sequential object instead, and delivers a response once an invocation
// is both received and executed.  The loop's nondeterministic choices are
// externalized into an explicit step schedule so runs are reproducible.

namespace qqc {

struct ProxyRequest {
  std::string name;  // ticket id, used as the event name
  Label invocation;
};

enum class ProxyStepKind { Arrive, Consume, Deliver };

struct ProxyStep {
  ProxyStepKind kind = ProxyStepKind::Arrive;
  std::string ticket;  // Consume/Deliver
  std::string value;   // Deliver: which executed response to hand out;
                       // empty = first available for the ticket's invocation
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  // received: invocations received but not yet covered by an execution, in
  // arrival order (the view Fig. 1's predict() may inspect).
  virtual Label predict(const ObjState& state, const std::vector<Label>& received) = 0;
};

// Predicts the target's invocations in order.
std::unique_ptr<Oracle> replay_oracle(const SequentialTrace& target);
// Predicts the oldest received-but-unexecuted invocation: flat combining
// without speculation.
std::unique_ptr<Oracle> fifo_oracle();
// Seeded choice among legal invocations drawn from the full request stream,
// running at most `lookahead` invocations ahead of the received set.
std::unique_ptr<Oracle> random_oracle(unsigned seed, const SequentialObject& obj,
                                      const std::vector<ProxyRequest>& requests,
                                      std::size_t lookahead = 2);

struct ProxyRunResult {
  OperationalTrace trace;         // externally observable calls/returns
  SequentialTrace executed_spec;  // what actually ran on the object
  std::vector<std::string> log;   // step lines for serialization
};

// Throws StuckError on an illegal step (including causal-guard refusals) and
// ParseError on malformed schedules.
ProxyRunResult run_proxy(const SequentialObject& obj,
                         const std::vector<ProxyRequest>& requests, Oracle& oracle,
                         const std::vector<ProxyStep>& schedule,
                         bool causal_guard = false);

// Seeded driver: repeatedly picks a random legal step until every ticket is
// delivered or no step is legal.
ProxyRunResult run_proxy_seeded(const SequentialObject& obj,
                                const std::vector<ProxyRequest>& requests,
                                Oracle& oracle, unsigned seed,
                                bool causal_guard = false);

// Schedule reproducing t through a replay oracle: Arrive+Consume at each
// call, Deliver with t's value at each return.
std::vector<ProxyStep> derive_replay_schedule(const OperationalTrace& t);
std::vector<ProxyRequest> requests_of(const OperationalTrace& t);

std::string format_proxy_session(const ProxyRunResult& r);

}  // namespace qqc
