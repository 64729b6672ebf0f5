#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qqc/objects.hpp"
#include "qqc/trace.hpp"

// Criterion checkers: linearizability, quiescent consistency, and
// quantitative quiescent consistency, each in a counting form (the production
// path) and a definitional cut-based form (a bounded oracle).

namespace qqc {

// Injective correspondence from the trace's call/return pairs to the spec's
// pairs, preserving call labels and, for completed calls, return labels.
// Keyed by call event name on both sides.
struct Matching {
  std::map<std::string, std::string> pairs;  // trace call name -> spec call name
  bool total = false;                        // covers every spec pair
};

struct CheckVerdict {
  bool accept = true;
  // Rejection witness: the leftmost offending return (arrangement order),
  // its spec index, the calls preceding it, and for cut-based checks the
  // violating prefix.
  std::string offending_return;
  std::size_t spec_index = 0;
  std::set<std::string> preceding_calls;
  std::set<std::string> violating_prefix;
  std::string detail;
};

// All label/bracket-preserving injections from t's pairs into spec's pairs.
std::vector<Matching> match_names(const OperationalTrace& t,
                                  const SequentialTrace& spec);

// Definitional-checker bound: QQC_MAX_EVENTS env override, else 16.
std::size_t cut_bound();

CheckVerdict lin_counting(const OperationalTrace& t, const SequentialTrace& spec,
                          const Matching& m);
CheckVerdict lin_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                        const Matching& m);

CheckVerdict qc_counting(const OperationalTrace& t, const SequentialTrace& spec,
                         const Matching& m);
CheckVerdict qc_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                       const Matching& m);

CheckVerdict qqc_counting(const OperationalTrace& t, const SequentialTrace& spec,
                          const Matching& m);
CheckVerdict qqc_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                        const Matching& m);
// Single excuse set per prefix, bounded by the early-open calls.
CheckVerdict qqc_exists_form(const OperationalTrace& t, const SequentialTrace& spec,
                             const Matching& m);

// Existential over matchings: accept iff some matching accepts.
CheckVerdict check_counting(const OperationalTrace& t, const SequentialTrace& spec,
                            Criterion c);
CheckVerdict check_cutdef(const OperationalTrace& t, const SequentialTrace& spec,
                          Criterion c);

// Maximal runs of isolated complete calls between quiescent arrangement
// points must embed, as label sequences, into some trace of obj.
CheckVerdict weak_qc(const OperationalTrace& t, const SequentialObject& obj,
                     std::size_t extension_budget = kDefaultExtensionBudget);

// Strongest accepting criterion over all matchings, by counting checkers.
// Weak QC needs an object, not a spec, so the floor here is NONE; see
// classify_vs_type for the object-level chain.
Strength classify(const OperationalTrace& t, const SequentialTrace& spec);

// Spec renamed through the matching so that matched pairs carry the trace's
// names; unmatched pairs get fresh names.  Shared plumbing for the cut-based
// checkers and the proxy completeness construction.
SequentialTrace align_spec(const OperationalTrace& t, const SequentialTrace& spec,
                           const Matching& m);

}  // namespace qqc
