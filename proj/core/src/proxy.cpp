#include "qqc/proxy.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace qqc {

namespace {

std::string label_str(const Label& l) { return l.method + "(" + l.payload + ")"; }

struct Executed {
  Label inv;
  std::string resp;
  bool used = false;
};

struct Engine {
  const SequentialObject& obj;
  std::vector<ProxyRequest> requests;
  Oracle& oracle;
  bool guard;

  std::size_t next_arrival = 0;
  std::vector<ProxyRequest> called;
  std::vector<ProxyRequest> received;      // undelivered
  std::vector<Label> received_cum;         // everything ever consumed
  std::vector<Executed> executed;
  std::size_t delivered = 0;
  ObjState state;
  std::vector<Token> tokens;
  std::vector<std::string> log;

  Engine(const SequentialObject& o, std::vector<ProxyRequest> reqs, Oracle& orc,
         bool g)
      : obj(o), requests(std::move(reqs)), oracle(orc), guard(g), state(o.initial) {}

  std::size_t unused_executed() const {
    std::size_t n = 0;
    for (const auto& e : executed)
      if (!e.used) ++n;
    return n;
  }

  void check_invariants() const {
    if (received.size() != unused_executed())
      throw ParseError("internal: |received| != |executed|");
    if (delivered > received_cum.size())
      throw ParseError("internal: returned exceeds received");
  }

  bool can_arrive() const { return next_arrival < requests.size(); }

  void arrive() {
    if (!can_arrive()) throw ParseError("no request left to arrive");
    const ProxyRequest& r = requests[next_arrival++];
    called.push_back(r);
    tokens.push_back({Polarity::call, r.name, r.invocation.method,
                      r.invocation.payload});
    log.push_back("proxy arrive ticket=" + r.name + " inv=" + label_str(r.invocation));
  }

  // Received invocations not yet covered by an execution, in arrival order.
  std::vector<Label> received_view() const {
    std::map<Label, std::size_t> cover;
    for (const auto& e : executed) ++cover[e.inv];
    std::vector<Label> view;
    for (const auto& l : received_cum) {
      auto it = cover.find(l);
      if (it != cover.end() && it->second > 0) {
        --it->second;
        continue;
      }
      view.push_back(l);
    }
    return view;
  }

  void consume(const std::string& ticket) {
    auto it = std::find_if(called.begin(), called.end(),
                           [&](const ProxyRequest& r) { return r.name == ticket; });
    if (it == called.end())
      throw StuckError("consume: ticket not in called: " + ticket);
    ProxyRequest r = *it;
    called.erase(it);
    received.push_back(r);
    received_cum.push_back(r.invocation);

    Label pred = oracle.predict(state, received_view());
    if (guard && pred.method == "pop") {
      ObjState probe = state;
      auto v = obj.step(probe, pred);
      std::size_t pushes = 0, pops = 0;
      if (v) {
        for (const auto& l : received_cum)
          if (l.method == "push" && l.payload == *v) ++pushes;
        for (const auto& e : executed)
          if (e.inv.method == "pop" && e.resp == *v) ++pops;
      }
      if (!v || pops >= pushes)
        throw StuckError("causal guard: pop of unreceived value");
    }
    auto resp = obj.step(state, pred);
    if (!resp) throw StuckError("oracle predicted illegal invocation " + label_str(pred));
    executed.push_back({pred, *resp, false});
    log.push_back("proxy consume ticket=" + r.name + " predict=" + label_str(pred) +
                  " resp=" + *resp);
    check_invariants();
  }

  bool deliverable(const ProxyRequest& r, const std::string& value) const {
    for (const auto& e : executed)
      if (!e.used && e.inv == r.invocation && (value.empty() || e.resp == value))
        return true;
    return false;
  }

  void deliver(const std::string& ticket, const std::string& value) {
    auto it = std::find_if(received.begin(), received.end(),
                           [&](const ProxyRequest& r) { return r.name == ticket; });
    if (it == received.end())
      throw StuckError("deliver: ticket not received: " + ticket);
    auto ex = std::find_if(executed.begin(), executed.end(), [&](const Executed& e) {
      return !e.used && e.inv == it->invocation && (value.empty() || e.resp == value);
    });
    if (ex == executed.end())
      throw StuckError("deliver: no executed response for " +
                       label_str(it->invocation));
    ex->used = true;
    tokens.push_back({Polarity::ret, it->name, "", ex->resp});
    log.push_back("proxy deliver ticket=" + it->name + " value=" + ex->resp);
    received.erase(it);
    ++delivered;
    check_invariants();
  }

  ProxyRunResult finish() {
    ProxyRunResult out;
    out.trace = from_tokens(tokens);
    std::vector<Token> spec_tokens;
    std::size_t k = 0;
    for (const auto& e : executed) {
      std::string name = "x" + std::to_string(++k);
      spec_tokens.push_back({Polarity::call, name, e.inv.method, e.inv.payload});
      spec_tokens.push_back({Polarity::ret, name, "", e.resp});
    }
    out.executed_spec = as_sequential(from_tokens(spec_tokens));
    out.log = log;
    return out;
  }
};

}  // namespace

ProxyRunResult run_proxy(const SequentialObject& obj,
                         const std::vector<ProxyRequest>& requests, Oracle& oracle,
                         const std::vector<ProxyStep>& schedule, bool causal_guard) {
  Engine eng(obj, requests, oracle, causal_guard);
  for (const auto& step : schedule) {
    switch (step.kind) {
      case ProxyStepKind::Arrive: eng.arrive(); break;
      case ProxyStepKind::Consume: eng.consume(step.ticket); break;
      case ProxyStepKind::Deliver: eng.deliver(step.ticket, step.value); break;
    }
  }
  return eng.finish();
}

ProxyRunResult run_proxy_seeded(const SequentialObject& obj,
                                const std::vector<ProxyRequest>& requests,
                                Oracle& oracle, unsigned seed, bool causal_guard) {
  Engine eng(obj, requests, oracle, causal_guard);
  std::mt19937 rng(seed);
  for (;;) {
    // legal choices: arrive, consume any called ticket, deliver any matched one
    std::vector<ProxyStep> options;
    if (eng.can_arrive()) options.push_back({ProxyStepKind::Arrive, "", ""});
    for (const auto& r : eng.called)
      options.push_back({ProxyStepKind::Consume, r.name, ""});
    for (const auto& r : eng.received)
      if (eng.deliverable(r, "")) options.push_back({ProxyStepKind::Deliver, r.name, ""});
    if (options.empty()) break;
    const ProxyStep& step = options[rng() % options.size()];
    switch (step.kind) {
      case ProxyStepKind::Arrive: eng.arrive(); break;
      case ProxyStepKind::Consume: eng.consume(step.ticket); break;
      case ProxyStepKind::Deliver: eng.deliver(step.ticket, step.value); break;
    }
  }
  return eng.finish();
}

namespace {

class ReplayOracle : public Oracle {
 public:
  explicit ReplayOracle(const SequentialTrace& target) : target_(target) {}
  Label predict(const ObjState&, const std::vector<Label>&) override {
    if (next_ >= target_.op_count()) throw StuckError("replay oracle exhausted");
    return target_.call_at(++next_).label;
  }

 private:
  SequentialTrace target_;
  std::size_t next_ = 0;
};

class FifoOracle : public Oracle {
 public:
  Label predict(const ObjState&, const std::vector<Label>& received) override {
    if (received.empty()) throw StuckError("fifo oracle: nothing received");
    return received.front();
  }
};

class RandomOracle : public Oracle {
 public:
  RandomOracle(unsigned seed, const SequentialObject& obj,
               const std::vector<ProxyRequest>& requests, std::size_t lookahead)
      : rng_(seed), obj_(obj), lookahead_(lookahead) {
    for (const auto& r : requests) remaining_.push_back(r.invocation);
  }

  Label predict(const ObjState& state, const std::vector<Label>& received) override {
    std::map<Label, std::size_t> in_view;
    for (const auto& l : received) ++in_view[l];
    std::vector<std::size_t> in_view_idx, ahead_idx;
    for (std::size_t k = 0; k < remaining_.size(); ++k) {
      ObjState probe = state;
      if (!obj_.step(probe, remaining_[k])) continue;
      auto it = in_view.find(remaining_[k]);
      if (it != in_view.end() && it->second > 0) {
        --it->second;
        in_view_idx.push_back(k);
      } else {
        ahead_idx.push_back(k);
      }
    }
    std::vector<std::size_t> pool = in_view_idx;
    if (debt_ < lookahead_)
      pool.insert(pool.end(), ahead_idx.begin(), ahead_idx.end());
    if (pool.empty()) pool = in_view_idx.empty() ? ahead_idx : in_view_idx;
    if (pool.empty()) throw StuckError("random oracle: no legal prediction");
    std::size_t pick = pool[rng_() % pool.size()];
    bool speculative = std::find(in_view_idx.begin(), in_view_idx.end(), pick) ==
                       in_view_idx.end();
    if (speculative) ++debt_;
    else if (debt_ > 0) --debt_;
    Label out = remaining_[pick];
    remaining_.erase(remaining_.begin() + static_cast<long>(pick));
    return out;
  }

 private:
  std::mt19937 rng_;
  SequentialObject obj_;
  std::size_t lookahead_;
  std::vector<Label> remaining_;
  std::size_t debt_ = 0;
};

}  // namespace

std::unique_ptr<Oracle> replay_oracle(const SequentialTrace& target) {
  return std::make_unique<ReplayOracle>(target);
}

std::unique_ptr<Oracle> fifo_oracle() { return std::make_unique<FifoOracle>(); }

std::unique_ptr<Oracle> random_oracle(unsigned seed, const SequentialObject& obj,
                                      const std::vector<ProxyRequest>& requests,
                                      std::size_t lookahead) {
  return std::make_unique<RandomOracle>(seed, obj, requests, lookahead);
}

std::vector<ProxyStep> derive_replay_schedule(const OperationalTrace& t) {
  std::vector<ProxyStep> out;
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (e.is_call()) {
      out.push_back({ProxyStepKind::Arrive, "", ""});
      out.push_back({ProxyStepKind::Consume, e.name, ""});
    } else {
      out.push_back({ProxyStepKind::Deliver, e.brak, e.label.payload});
    }
  }
  return out;
}

std::vector<ProxyRequest> requests_of(const OperationalTrace& t) {
  std::vector<ProxyRequest> out;
  for (const auto& name : t.arrangement) {
    const Event& e = t.trace.at(name);
    if (e.is_call()) out.push_back({e.name, e.label});
  }
  return out;
}

std::string format_proxy_session(const ProxyRunResult& r) {
  std::ostringstream os;
  os << "run proxy N=0 seed=0\n";
  for (std::size_t k = 0; k < r.log.size(); ++k)
    os << "step " << k + 1 << " " << r.log[k] << "\n";
  os << format_trc1(r.trace) << "\n";
  os << "executed " << format_trc1(r.executed_spec.as_operational()) << "\n";
  return os.str();
}

}  // namespace qqc
