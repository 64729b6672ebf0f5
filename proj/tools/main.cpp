#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "qqc/checkers.hpp"
#include "qqc/compose.hpp"
#include "qqc/objects.hpp"
#include "qqc/proxy.hpp"
#include "qqc/structures.hpp"
#include "qqc/trace.hpp"

using nlohmann::json;
using namespace qqc;

namespace {

// Inputs are file paths or inline TRC1 text.
std::string read_input(const std::string& arg) {
  std::ifstream in(arg);
  if (!in) return arg;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Criterion criterion_of(const std::string& s) {
  if (s == "lin") return Criterion::LIN;
  if (s == "qqc") return Criterion::QQC;
  if (s == "qc") return Criterion::QC;
  if (s == "weak") return Criterion::WEAK;
  throw ParseError("unknown criterion: " + s);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "a=inc,b=push(x),g=pop"
std::vector<OpSpec> parse_ops(const std::string& s) {
  std::vector<OpSpec> out;
  for (const auto& item : split_list(s)) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("bad op: " + item);
    OpSpec op;
    op.id = item.substr(0, eq);
    std::string rhs = item.substr(eq + 1);
    auto par = rhs.find('(');
    if (par == std::string::npos) {
      op.method = rhs;
    } else {
      if (rhs.back() != ')') throw ParseError("bad op: " + item);
      op.method = rhs.substr(0, par);
      op.arg = rhs.substr(par + 1, rhs.size() - par - 2);
    }
    out.push_back(op);
  }
  return out;
}

std::vector<ProxyRequest> parse_requests(const std::string& s) {
  std::vector<ProxyRequest> out;
  for (const auto& op : parse_ops(s)) out.push_back({op.id, {op.method, op.arg}});
  return out;
}

// "arrive,consume:c,deliver:g" or "deliver:g=a"
std::vector<ProxyStep> parse_proxy_schedule(const std::string& s) {
  std::vector<ProxyStep> out;
  for (const auto& item : split_list(s)) {
    if (item == "arrive") {
      out.push_back({ProxyStepKind::Arrive, "", ""});
      continue;
    }
    auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError("bad proxy step: " + item);
    std::string kind = item.substr(0, colon);
    std::string rest = item.substr(colon + 1);
    std::string value;
    auto eq = rest.find('=');
    if (eq != std::string::npos) {
      value = rest.substr(eq + 1);
      rest = rest.substr(0, eq);
    }
    if (kind == "consume") out.push_back({ProxyStepKind::Consume, rest, ""});
    else if (kind == "deliver") out.push_back({ProxyStepKind::Deliver, rest, value});
    else throw ParseError("bad proxy step: " + item);
  }
  return out;
}

std::string witness_str(const SequentialTrace& w) {
  return format_trc1(w.as_operational());
}

json verdict_json(const CheckVerdict& v) {
  if (v.accept) return "accept";
  return "reject";
}

json reject_info(const CheckVerdict& v) {
  json j;
  if (!v.offending_return.empty()) {
    j["offending_return"] = v.offending_return;
    j["spec_index"] = v.spec_index;
  }
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

int cmd_check(const std::string& trace_arg, const std::string& spec_arg,
              const std::string& type, const std::string& criterion,
              const std::string& method, std::size_t budget) {
  auto t = parse_trc1(read_input(trace_arg));
  json base;
  base["input"] = trace_arg;
  base["criterion"] = criterion;
  if (criterion == "classify") {
    Strength s;
    if (!type.empty()) {
      s = classify_vs_type(t, object_by_name(type), budget);
    } else {
      s = classify(t, parse_spec_trc1(read_input(spec_arg)));
    }
    base["method"] = "counting";
    base["verdict"] = to_string(s);
    base["witness"] = nullptr;
    std::cout << base.dump() << "\n";
    return s == Strength::NONE ? 1 : 0;
  }
  Criterion c = criterion_of(criterion);
  if (!type.empty()) {
    auto obj = object_by_name(type);
    json j = base;
    j["method"] = "counting";
    if (c == Criterion::WEAK) {
      auto v = weak_qc(t, obj, budget);
      j["verdict"] = verdict_json(v);
      j["witness"] = nullptr;
      std::cout << j.dump() << "\n";
      return v.accept ? 0 : 1;
    }
    auto w = find_witness(t, obj, c, budget);
    j["verdict"] = w ? "accept" : "reject";
    j["witness"] = w ? json(witness_str(*w)) : json(nullptr);
    std::cout << j.dump() << "\n";
    return w ? 0 : 1;
  }
  auto spec = parse_spec_trc1(read_input(spec_arg));
  bool all_accept = true;
  for (const std::string m : {"counting", "cutdef"}) {
    if (method != "both" && method != m) continue;
    auto v = m == "counting" ? check_counting(t, spec, c) : check_cutdef(t, spec, c);
    json j = base;
    j["method"] = m;
    j["verdict"] = verdict_json(v);
    j["witness"] = v.accept ? json(nullptr) : json(reject_info(v));
    std::cout << j.dump() << "\n";
    all_accept = all_accept && v.accept;
  }
  return all_accept ? 0 : 1;
}

int check_one_run(const ExecutionRecord& r, const std::string& schedule_str,
                  const std::string& check, bool require_pp, bool& any_fail) {
  json j;
  j["input"] = schedule_str;
  j["criterion"] = check.empty() ? "none" : check;
  j["method"] = "simulate";
  std::optional<PopViolation> pp;
  if (r.kind != "counter") pp = properly_popped(r);
  if (require_pp && pp) {
    j["verdict"] = "skipped";
    j["witness"] = json{{"push", pp->push_op}, {"pop", pp->pop_op}};
    std::cout << j.dump() << "\n";
    return 0;
  }
  auto t = linearized_trace(r);
  j["trace"] = format_trc1(t);
  if (pp) j["properly_popped"] = false;
  bool ok = true;
  if (!check.empty()) {
    Criterion c = criterion_of(check);
    if (r.instrumented) {
      auto spec = emitted_spec(r);
      ok = is_spec(spec, stack_object()) && check_counting(t, spec, c).accept;
      j["witness"] = witness_str(spec);
    } else {
      auto obj = r.kind == "counter" ? counter_object() : stack_object();
      auto w = find_witness(t, obj, c);
      ok = w.has_value();
      j["witness"] = w ? json(witness_str(*w)) : json(nullptr);
    }
  } else {
    j["witness"] = nullptr;
  }
  j["verdict"] = ok ? "accept" : "reject";
  std::cout << j.dump() << "\n";
  if (!ok) any_fail = true;
  return ok ? 0 : 1;
}

int cmd_simulate(const std::string& structure, std::size_t N, std::size_t depth,
                 const std::string& ops_arg, const std::string& schedule_arg,
                 bool has_seed, unsigned seed, bool exhaustive,
                 const std::string& check, bool require_pp) {
  auto ops = parse_ops(ops_arg);
  std::size_t sections = structure == "elimtree" ? depth + 1 : 2;
  auto run_one = [&](const std::vector<std::string>& sched) {
    return structure == "elimtree" ? elim_tree_run(depth, ops, sched)
                                   : run_schedule(structure, N, ops, sched);
  };
  bool any_fail = false;
  if (exhaustive) {
    auto scheds = enumerate_schedules(ops, sections);
    for (const auto& sched : scheds) {
      std::string s;
      for (std::size_t k = 0; k < sched.size(); ++k) s += (k ? "," : "") + sched[k];
      check_one_run(run_one(sched), s, check, require_pp, any_fail);
    }
    json agg;
    agg["input"] = "aggregate";
    agg["criterion"] = check.empty() ? "none" : check;
    agg["method"] = "simulate";
    agg["verdict"] = any_fail ? "reject" : "accept";
    agg["witness"] = json{{"schedules", scheds.size()}};
    std::cout << agg.dump() << "\n";
    return any_fail ? 1 : 0;
  }
  std::vector<std::string> sched;
  if (!schedule_arg.empty()) {
    sched = split_list(schedule_arg);
  } else if (has_seed) {
    std::mt19937 rng(seed);
    std::map<std::string, std::size_t> left;
    for (const auto& op : ops) left[op.id] = sections;
    std::size_t total = ops.size() * sections;
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<std::string> live;
      for (const auto& op : ops)
        if (left[op.id] > 0) live.push_back(op.id);
      const std::string& pick = live[rng() % live.size()];
      --left[pick];
      sched.push_back(pick);
    }
  } else {
    throw ParseError("one of --schedule, --seed, --exhaustive is required");
  }
  std::string s;
  for (std::size_t k = 0; k < sched.size(); ++k) s += (k ? "," : "") + sched[k];
  int rc = check_one_run(run_one(sched), s, check, require_pp, any_fail);
  return rc;
}

int cmd_proxy(const std::string& object, const std::string& oracle_arg,
              const std::string& requests_arg, const std::string& schedule_arg,
              bool has_seed, unsigned seed, bool causal_guard) {
  auto obj = object_by_name(object);
  auto reqs = parse_requests(requests_arg);
  std::unique_ptr<Oracle> oracle;
  if (oracle_arg == "fifo") {
    oracle = fifo_oracle();
  } else if (oracle_arg.rfind("replay:", 0) == 0) {
    oracle = replay_oracle(parse_spec_trc1(read_input(oracle_arg.substr(7))));
  } else if (oracle_arg.rfind("random:", 0) == 0) {
    oracle = random_oracle(static_cast<unsigned>(std::stoul(oracle_arg.substr(7))),
                           obj, reqs);
  } else {
    throw ParseError("unknown oracle: " + oracle_arg);
  }
  ProxyRunResult res;
  std::string input;
  if (!schedule_arg.empty()) {
    res = run_proxy(obj, reqs, *oracle, parse_proxy_schedule(schedule_arg),
                    causal_guard);
    input = schedule_arg;
  } else if (has_seed) {
    res = run_proxy_seeded(obj, reqs, *oracle, seed, causal_guard);
    input = "seed:" + std::to_string(seed);
  } else {
    throw ParseError("one of --service-schedule, --seed is required");
  }
  auto v = check_counting(res.trace, res.executed_spec, Criterion::QQC);
  json j;
  j["input"] = input;
  j["criterion"] = "qqc";
  j["method"] = "proxy";
  j["verdict"] = verdict_json(v);
  j["trace"] = format_trc1(res.trace);
  j["witness"] = witness_str(res.executed_spec);
  std::cout << j.dump() << "\n";
  return v.accept ? 0 : 1;
}

int cmd_search(const std::string& trace_arg, const std::string& type,
               const std::string& criterion, std::size_t budget) {
  auto t = parse_trc1(read_input(trace_arg));
  auto obj = object_by_name(type);
  json j;
  j["input"] = trace_arg;
  j["criterion"] = criterion;
  j["method"] = "search";
  if (criterion == "weak") {
    auto v = weak_qc(t, obj, budget);
    j["verdict"] = verdict_json(v);
    j["witness"] = nullptr;
    std::cout << j.dump() << "\n";
    return v.accept ? 0 : 1;
  }
  auto w = find_witness(t, obj, criterion_of(criterion), budget);
  j["verdict"] = w ? "accept" : "reject";
  j["witness"] = w ? json(witness_str(*w)) : json(nullptr);
  std::cout << j.dump() << "\n";
  return w ? 0 : 1;
}

int cmd_compose(const std::string& alpha_arg, const std::string& first_names,
                const std::string& b1_arg, const std::string& b2_arg,
                const std::string& criterion) {
  auto alpha = parse_trc1(read_input(alpha_arg));
  auto b1 = parse_spec_trc1(read_input(b1_arg));
  auto b2 = parse_spec_trc1(read_input(b2_arg));
  std::set<std::string> names;
  for (const auto& n : split_list(first_names)) names.insert(n);
  auto r = check_compositional(alpha, names, b1, b2, criterion_of(criterion));
  json j;
  j["input"] = alpha_arg;
  j["criterion"] = criterion;
  j["method"] = "compose";
  j["verdict"] = r.ok ? "accept" : "reject";
  j["witness"] = r.ok ? json(witness_str(r.witness)) : json(r.error);
  std::cout << j.dump() << "\n";
  return r.ok ? 0 : 1;
}

int cmd_fixtures(const std::string& filter) {
  auto results = fixtures::run_fixtures(filter);
  bool any_fail = false;
  for (const auto& r : results) {
    json j;
    j["fixture"] = r.name;
    j["criterion"] = "catalog";
    j["method"] = "fixtures";
    j["verdict"] = r.pass ? "pass" : "fail";
    j["witness"] = r.detail.empty() ? json(nullptr) : json(r.detail);
    std::cout << j.dump() << "\n";
    if (!r.pass) any_fail = true;
  }
  return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace criteria checker and balancer-structure simulator"};
  app.require_subcommand(1);

  std::string trace_arg, spec_arg, type, criterion = "classify", method = "both";
  std::size_t budget = kDefaultExtensionBudget;
  auto* check = app.add_subcommand("check", "check a trace against a spec or type");
  check->add_option("trace", trace_arg, "trace file or inline TRC1")->required();
  check->add_option("--spec", spec_arg, "spec file or inline TRC1");
  check->add_option("--type", type, "counter|stack|queue");
  check->add_option("--criterion", criterion, "lin|qqc|qc|weak|classify");
  check->add_option("--method", method, "counting|cutdef|both");
  check->add_option("--extension-budget", budget, "witness search budget");

  std::string structure, ops_arg, schedule_arg, sim_check;
  std::size_t N = 2, depth = 1;
  unsigned seed = 0;
  bool exhaustive = false, require_pp = false, causal_guard = false;
  auto* sim = app.add_subcommand("simulate", "run a structure schedule");
  sim->add_option("--structure", structure, "counter|stack|istack|elimtree")
      ->required();
  sim->add_option("--N", N, "leaf count");
  sim->add_option("--depth", depth, "elimination tree depth");
  sim->add_option("--ops", ops_arg, "op list, e.g. a=inc,b=push(x),g=pop")
      ->required();
  sim->add_option("--schedule", schedule_arg, "comma list of op ids");
  auto* seed_opt = sim->add_option("--seed", seed, "seeded schedule");
  sim->add_flag("--exhaustive", exhaustive, "all interleavings");
  sim->add_option("--check", sim_check, "lin|qqc|qc");
  sim->add_flag("--require-properly-popped", require_pp,
                "skip not-properly-popped schedules");

  std::string object, oracle_arg, requests_arg, service_arg;
  unsigned proxy_seed = 0;
  auto* proxy = app.add_subcommand("proxy", "run the speculative proxy");
  proxy->add_option("--object", object, "counter|stack|queue")->required();
  proxy->add_option("--oracle", oracle_arg, "replay:<spec>|fifo|random:<seed>")
      ->required();
  proxy->add_option("--requests", requests_arg, "e.g. c=push(c),g=pop")->required();
  proxy->add_option("--service-schedule", service_arg,
                    "arrive,consume:<t>,deliver:<t>[=v]");
  auto* proxy_seed_opt = proxy->add_option("--seed", proxy_seed, "seeded driver");
  proxy->add_flag("--causal-guard", causal_guard, "refuse noncausal pops");

  std::string search_trace, search_type, search_criterion = "qqc";
  std::size_t search_budget = kDefaultExtensionBudget;
  auto* search = app.add_subcommand("search", "search for a spec witness");
  search->add_option("trace", search_trace, "trace file or inline TRC1")->required();
  search->add_option("--type", search_type, "counter|stack|queue")->required();
  search->add_option("--criterion", search_criterion, "lin|qqc|qc|weak");
  search->add_option("--extension-budget", search_budget, "extra ops allowed");

  std::string alpha_arg, first_names, b1_arg, b2_arg, comp_criterion = "qqc";
  auto* compose = app.add_subcommand("compose", "compositional check of two objects");
  compose->add_option("--alpha", alpha_arg, "joint trace")->required();
  compose->add_option("--first", first_names, "call names of the first object")
      ->required();
  compose->add_option("--b1", b1_arg, "first object's spec")->required();
  compose->add_option("--b2", b2_arg, "second object's spec")->required();
  compose->add_option("--criterion", comp_criterion, "lin|qqc|qc");

  std::string filter;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "run the example catalog");
  fixtures_cmd->add_option("--filter", filter, "name prefix");

  try {
    app.parse(argc, argv);
    if (check->parsed()) {
      if (spec_arg.empty() && type.empty())
        throw ParseError("one of --spec, --type is required");
      return cmd_check(trace_arg, spec_arg, type, criterion, method, budget);
    }
    if (sim->parsed())
      return cmd_simulate(structure, N, depth, ops_arg, schedule_arg,
                          seed_opt->count() > 0, seed, exhaustive, sim_check,
                          require_pp);
    if (proxy->parsed())
      return cmd_proxy(object, oracle_arg, requests_arg, service_arg,
                       proxy_seed_opt->count() > 0, proxy_seed, causal_guard);
    if (search->parsed())
      return cmd_search(search_trace, search_type, search_criterion, search_budget);
    if (compose->parsed())
      return cmd_compose(alpha_arg, first_names, b1_arg, b2_arg, comp_criterion);
    if (fixtures_cmd->parsed()) return cmd_fixtures(filter);
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    json j;
    j["error"] = e.what();
    std::cerr << j.dump() << "\n";
    return 2;
  }
}
