#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Polarized, bracketed labelled partial orders and their algebra.
//
// A trace is a finite set of named events.  Each event carries a polarity
// (call or return), a label, a name, the set of names of its predecessors
// (kept transitively closed), and -- for returns -- the name of the call it
// closes.  Operational traces additionally store a linear arrangement that
// witnesses an interleaving; sequential traces are totally ordered and
// alternate call / matching return.

namespace qqc {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Polarity { call, ret };

struct Label {
  std::string method;
  std::string payload;  // argument for calls, return value for returns; "()" is unit

  auto operator<=>(const Label&) const = default;
};

struct Event {
  Polarity pol = Polarity::call;
  Label label;
  std::string name;
  std::set<std::string> preds;  // transitively closed predecessor names
  std::string brak;             // nonempty iff pol == ret

  bool is_call() const { return pol == Polarity::call; }
  bool is_ret() const { return pol == Polarity::ret; }
};

struct Violation {
  int condition = 0;  // 1..6
  std::vector<std::string> names;
  std::string detail;
};

struct ValidityReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidityReport validate(const std::vector<Event>& events);

class Trace {
 public:
  Trace() = default;
  // Throws ParseError if the events do not satisfy the six trace conditions.
  explicit Trace(std::vector<Event> events);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Event& at(const std::string& name) const;

  // a strictly precedes b
  bool precedes(const std::string& a, const std::string& b) const;

  bool is_operational() const;
  bool is_sequential() const;

  // For a return name, the name of the matched call; for a call with a
  // matching return, that return's name.
  std::optional<std::string> matching_return(const std::string& call_name) const;

 private:
  std::vector<Event> events_;
  std::map<std::string, std::size_t> index_;
};

// A trace together with a linear arrangement of its event names consistent
// with (and regenerating, via the string homomorphism) its order.
struct OperationalTrace {
  Trace trace;
  std::vector<std::string> arrangement;

  std::size_t size() const { return trace.size(); }
  bool empty() const { return trace.empty(); }
};

// Totally ordered, strictly alternating call/return trace.
struct SequentialTrace {
  Trace trace;
  std::vector<std::string> arrangement;  // c1 r1 c2 r2 ...

  std::size_t op_count() const { return arrangement.size() / 2; }
  // 1-based spec position of a pair; names are call names.
  const Event& call_at(std::size_t j) const;  // j in [1, op_count]
  const Event& ret_at(std::size_t j) const;

  OperationalTrace as_operational() const { return {trace, arrangement}; }
};

// --- token form (TRC1) -----------------------------------------------------

struct Token {
  Polarity pol = Polarity::call;
  std::string name;
  std::string method;   // calls only
  std::string payload;  // call argument / return value
};

std::vector<Token> tokenize_trc1(const std::string& text);
std::string format_token(const Token& t);

// String homomorphism: every call is ordered before each later return and
// every return before each later call.  Throws ParseError on malformed input,
// dangling returns, or duplicate names.
OperationalTrace from_tokens(const std::vector<Token>& tokens);
std::vector<Token> to_tokens(const OperationalTrace& t);

OperationalTrace parse_trc1(const std::string& text);
std::string format_trc1(const OperationalTrace& t);

// Requires that the operational trace alternates strictly.
SequentialTrace parse_spec_trc1(const std::string& text);
SequentialTrace as_sequential(const OperationalTrace& t);

// --- partial-order form (TRP1) ---------------------------------------------

Trace parse_trp1(const std::string& text);
std::string format_trp1(const Trace& t);

// --- trace algebra ---------------------------------------------------------

std::vector<std::string> open_calls(const Trace& t);
bool is_quiescent(const Trace& t);

inline constexpr std::size_t kDefaultPrefixBound = 16;

// All down-closed subsets, as name sets.  Throws BoundError above the bound.
std::vector<std::set<std::string>> prefixes(const Trace& t,
                                            std::size_t bound = kDefaultPrefixBound);

// Smallest down-closed subset containing the named event.
std::set<std::string> down_closure(const Trace& t, const std::string& name);

// Smallest quiescent down-closed subset containing the named event, if any.
std::optional<std::set<std::string>> quiescent_closure(const Trace& t,
                                                       const std::string& name);

bool permeq(const Trace& t1, const Trace& t2);
// t1's events are a subset, by name/label/brak, of (a permutation of) t2.
bool permlt(const Trace& t1, const Trace& t2);

std::optional<std::map<std::string, std::string>> find_renaming(const Trace& t1,
                                                                const Trace& t2);

Trace restrict_to(const Trace& t, const std::set<std::string>& names);

// Partial order difference: removes the bracketed subset, deletes all
// references to the removed names from the remaining preds, and drops
// same-polarity order pairs whose only mediating event was removed.
Trace po_difference(const Trace& t, const std::set<std::string>& removed);
OperationalTrace po_difference(const OperationalTrace& t,
                               const std::set<std::string>& removed);

// Appends spec \ partial after the partial trace (shared names); the result
// is permeq to the spec and has the partial trace as a prefix.
OperationalTrace extend_to(const OperationalTrace& partial, const SequentialTrace& spec);

// Pair-level shuffles of two sequential traces (names must be disjoint).
std::vector<SequentialTrace> interleavings(const SequentialTrace& s1,
                                           const SequentialTrace& s2,
                                           std::size_t bound = kDefaultPrefixBound);

}  // namespace qqc
