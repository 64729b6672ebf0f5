#include "qqc/objects.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "qqc/checkers.hpp"

namespace qqc {

SequentialObject counter_object() {
  SequentialObject obj;
  obj.name = "counter";
  obj.step = [](ObjState& s, const Label& inv) -> std::optional<std::string> {
    if (inv.method == "inc") return std::to_string(s.counter++);
    if (inv.method == "dec") return std::to_string(--s.counter);
    return std::nullopt;
  };
  obj.methods = {"inc", "dec"};
  return obj;
}

SequentialObject stack_object() {
  SequentialObject obj;
  obj.name = "stack";
  obj.step = [](ObjState& s, const Label& inv) -> std::optional<std::string> {
    if (inv.method == "push") {
      s.items.push_back(inv.payload);
      return "()";
    }
    if (inv.method == "pop") {
      if (s.items.empty()) return std::nullopt;
      std::string v = s.items.back();
      s.items.pop_back();
      return v;
    }
    return std::nullopt;
  };
  obj.methods = {"push", "pop"};
  obj.value_methods = {"push"};
  return obj;
}

SequentialObject queue_object() {
  SequentialObject obj;
  obj.name = "queue";
  obj.step = [](ObjState& s, const Label& inv) -> std::optional<std::string> {
    if (inv.method == "enq") {
      s.items.push_back(inv.payload);
      return "()";
    }
    if (inv.method == "deq") {
      if (s.items.empty()) return std::nullopt;
      std::string v = s.items.front();
      s.items.erase(s.items.begin());
      return v;
    }
    return std::nullopt;
  };
  obj.methods = {"enq", "deq"};
  obj.value_methods = {"enq"};
  return obj;
}

SequentialObject object_by_name(const std::string& name) {
  if (name == "counter") return counter_object();
  if (name == "stack") return stack_object();
  if (name == "queue") return queue_object();
  throw ParseError("unknown object type: " + name);
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::LIN: return "lin";
    case Criterion::QQC: return "qqc";
    case Criterion::QC: return "qc";
    case Criterion::WEAK: return "weak";
  }
  return "?";
}

std::string to_string(Strength s) {
  switch (s) {
    case Strength::LIN: return "LIN";
    case Strength::QQC: return "QQC";
    case Strength::QC: return "QC";
    case Strength::WEAK: return "WEAK";
    case Strength::NONE: return "NONE";
  }
  return "?";
}

SequentialTrace gen_spec(const SequentialObject& obj,
                         const std::vector<Label>& invocations) {
  ObjState state = obj.initial;
  std::vector<Token> tokens;
  std::size_t fresh = 0;
  for (const auto& inv : invocations) {
    auto resp = obj.step(state, inv);
    if (!resp)
      throw ParseError("illegal invocation " + inv.method + "(" + inv.payload +
                       ") for " + obj.name);
    std::string name = "o" + std::to_string(++fresh);
    tokens.push_back({Polarity::call, name, inv.method, inv.payload});
    tokens.push_back({Polarity::ret, name, "", *resp});
  }
  return as_sequential(from_tokens(tokens));
}

bool is_spec(const SequentialTrace& spec, const SequentialObject& obj) {
  ObjState state = obj.initial;
  for (std::size_t j = 1; j <= spec.op_count(); ++j) {
    const Event& call = spec.call_at(j);
    auto resp = obj.step(state, call.label);
    if (!resp || *resp != spec.ret_at(j).label.payload) return false;
  }
  return true;
}

std::vector<std::string> payload_candidates(const OperationalTrace& t) {
  std::set<std::string> seen;
  for (const auto& e : t.trace.events())
    if (!e.label.payload.empty() && e.label.payload != "()")
      seen.insert(e.label.payload);
  std::vector<std::string> out(seen.begin(), seen.end());
  std::string fresh = "w";
  while (seen.count(fresh)) fresh += "w";
  out.push_back(fresh);
  return out;
}

namespace {

std::vector<Label> legal_invocations(const SequentialObject& obj,
                                     const ObjState& state,
                                     const std::vector<std::string>& pool) {
  std::vector<Label> out;
  for (const auto& m : obj.methods) {
    bool takes_value = std::find(obj.value_methods.begin(), obj.value_methods.end(),
                                 m) != obj.value_methods.end();
    std::vector<std::string> args =
        takes_value ? pool : std::vector<std::string>{""};
    for (const auto& a : args) {
      ObjState probe = state;
      if (obj.step(probe, {m, a})) out.push_back({m, a});
    }
  }
  return out;
}

bool embed_search(const std::vector<OpLabel>& ops, const SequentialObject& obj,
                  const ObjState& state, std::size_t i, std::size_t budget,
                  const std::vector<std::string>& pool) {
  if (i == ops.size()) return true;
  {
    ObjState next = state;
    auto resp = obj.step(next, ops[i].invocation);
    if (resp && *resp == ops[i].response &&
        embed_search(ops, obj, next, i + 1, budget, pool))
      return true;
  }
  if (budget > 0) {
    for (const auto& inv : legal_invocations(obj, state, pool)) {
      ObjState next = state;
      obj.step(next, inv);
      if (embed_search(ops, obj, next, i, budget - 1, pool)) return true;
    }
  }
  return false;
}

}  // namespace

bool embeds_as_subtrace(const std::vector<OpLabel>& ops, const SequentialObject& obj,
                        std::size_t budget,
                        const std::vector<std::string>& payload_pool) {
  return embed_search(ops, obj, obj.initial, 0, budget, payload_pool);
}

namespace {

CheckVerdict counting_for(const OperationalTrace& t, const SequentialTrace& spec,
                          Criterion c) {
  return check_counting(t, spec, c);
}

// All nondecreasing index vectors of length k over [0, n).
std::vector<std::vector<std::size_t>> multichoose(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t lo) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = lo; i < n; ++i) {
      cur.push_back(i);
      self(self, i);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace

std::optional<SequentialTrace> find_witness(const OperationalTrace& t,
                                            const SequentialObject& obj,
                                            Criterion c,
                                            std::size_t extension_budget) {
  if (c == Criterion::WEAK) {
    if (weak_qc(t, obj, extension_budget).accept)
      return SequentialTrace{};  // vacuous witness: weak QC has no spec
    return std::nullopt;
  }
  std::vector<Label> base;
  for (const auto& e : t.trace.events())
    if (e.is_call()) base.push_back(e.label);
  if (base.size() + extension_budget > kWitnessOpBound)
    throw BoundError("witness search bound exceeded");
  auto pool = payload_candidates(t);

  std::vector<Label> ext_choices;
  for (const auto& m : obj.methods) {
    bool takes_value = std::find(obj.value_methods.begin(), obj.value_methods.end(),
                                 m) != obj.value_methods.end();
    if (takes_value)
      for (const auto& a : pool) ext_choices.push_back({m, a});
    else
      ext_choices.push_back({m, ""});
  }

  for (std::size_t extra = 0; extra <= extension_budget; ++extra) {
    for (const auto& pick : multichoose(ext_choices.size(), extra)) {
      std::vector<Label> labels = base;
      for (auto k : pick) labels.push_back(ext_choices[k]);
      std::sort(labels.begin(), labels.end());
      do {
        SequentialTrace spec;
        try {
          spec = gen_spec(obj, labels);
        } catch (const ParseError&) {
          continue;  // illegal order (pop on empty)
        }
        if (counting_for(t, spec, c).accept) return spec;
      } while (std::next_permutation(labels.begin(), labels.end()));
    }
  }
  return std::nullopt;
}

Strength classify_vs_type(const OperationalTrace& t, const SequentialObject& obj,
                          std::size_t extension_budget) {
  if (find_witness(t, obj, Criterion::LIN, extension_budget)) return Strength::LIN;
  if (find_witness(t, obj, Criterion::QQC, extension_budget)) return Strength::QQC;
  if (find_witness(t, obj, Criterion::QC, extension_budget)) return Strength::QC;
  if (weak_qc(t, obj, extension_budget).accept) return Strength::WEAK;
  return Strength::NONE;
}

}  // namespace qqc
