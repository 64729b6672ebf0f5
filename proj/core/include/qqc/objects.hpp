#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qqc/trace.hpp"

// Deterministic sequential data types (counter, stack, queue), specification
// generation, and bounded witness search.

namespace qqc {

struct ObjState {
  long long counter = 0;
  std::vector<std::string> items;  // stack: back = top; queue: front = head

  auto operator<=>(const ObjState&) const = default;
};

struct SequentialObject {
  std::string name;
  ObjState initial;
  // Runs one invocation; returns the response payload, or nullopt if the
  // invocation is illegal in the current state (pop/deq on empty).
  std::function<std::optional<std::string>(ObjState&, const Label&)> step;
  std::vector<std::string> methods;
  std::vector<std::string> value_methods;  // methods taking a value argument
};

// inc = getAndIncrement (returns pre-increment value)
// dec = decrementAndGet (returns post-decrement value)
SequentialObject counter_object();
SequentialObject stack_object();  // push(x) -> (), pop() -> value
SequentialObject queue_object();  // enq(x) -> (), deq() -> value
SequentialObject object_by_name(const std::string& name);

// Alternating call/return spec with responses computed by step.
// Throws ParseError on an illegal invocation.
SequentialTrace gen_spec(const SequentialObject& obj,
                         const std::vector<Label>& invocations);

// Replaying the calls reproduces every recorded response.
bool is_spec(const SequentialTrace& spec, const SequentialObject& obj);

enum class Criterion { LIN, QQC, QC, WEAK };
enum class Strength { LIN, QQC, QC, WEAK, NONE };

std::string to_string(Criterion c);
std::string to_string(Strength s);

inline constexpr std::size_t kDefaultExtensionBudget = 2;
inline constexpr std::size_t kWitnessOpBound = 8;

// Searches object specs over t's invocation multiset plus at most
// extension_budget additional ops for one making the counting checker for c
// accept.  Deterministic: call orders are tried in lexicographic label order.
std::optional<SequentialTrace> find_witness(
    const OperationalTrace& t, const SequentialObject& obj, Criterion c,
    std::size_t extension_budget = kDefaultExtensionBudget);

// Strongest criterion with a witness, walking LIN, QQC, QC, then weak
// quiescent consistency.
Strength classify_vs_type(const OperationalTrace& t, const SequentialObject& obj,
                          std::size_t extension_budget = kDefaultExtensionBudget);

// Can obj produce a run whose subsequence matches ops exactly (invocation and
// response), inserting at most budget extra ops drawn from candidate payloads?
struct OpLabel {
  Label invocation;
  std::string response;
};
bool embeds_as_subtrace(const std::vector<OpLabel>& ops, const SequentialObject& obj,
                        std::size_t budget,
                        const std::vector<std::string>& payload_pool);

// Candidate call-argument payloads: every non-unit payload appearing in t
// (call arguments and return values) plus one fresh value.
std::vector<std::string> payload_candidates(const OperationalTrace& t);

}  // namespace qqc
