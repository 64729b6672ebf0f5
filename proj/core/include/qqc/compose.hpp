#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qqc/objects.hpp"
#include "qqc/trace.hpp"

// Compositionality: splitting a trace into object-local components, the
// pairwise cross-order lemma, and the fmerge construction of a joint
// specification witness.

namespace qqc {

struct SplitPair {
  OperationalTrace first;
  OperationalTrace second;
};

// names_for_first may list call names; matching returns are pulled in
// automatically.  Throws if the selection is not bracket-closed.
SplitPair split(const OperationalTrace& alpha,
                const std::set<std::string>& names_for_first);

// For completed pairs x0, y0 and calls x1, y1 with x?0 < y!0, y?0 < x!0,
// x?1 < x!0, y?1 < y!0 in alpha: does x?1 < y!0 or y?1 < x!0 hold?
// nullopt = hypothesis configuration absent or alpha not operational.
std::optional<bool> cross_order_lemma(const Trace& alpha, const std::string& x0,
                                      const std::string& x1, const std::string& y0,
                                      const std::string& y1);

// All interleavings of b1 and b2 admissible under alpha's order, by the
// recursive last-pair construction.  Every output is a sequential trace over
// the union of pairs.
std::vector<SequentialTrace> fmerge(const SequentialTrace& b1,
                                    const SequentialTrace& b2,
                                    const OperationalTrace& alpha);

struct ComposeResult {
  bool ok = false;
  SequentialTrace witness;
  std::string error;
};

// Verifies each component against its spec under the criterion's counting
// checker, then builds a joint witness: fmerge for QQC/QC, the pair-level
// cross-edge order for LIN.
ComposeResult check_compositional(const OperationalTrace& alpha,
                                  const std::set<std::string>& names_for_first,
                                  const SequentialTrace& b1,
                                  const SequentialTrace& b2, Criterion c);

}  // namespace qqc
