#include "ordalloc/cli/problem.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ordalloc/bvn.hpp"
#include "ordalloc/efficiency.hpp"
#include "ordalloc/welfare.hpp"

namespace ordalloc::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw Error(Errc::ParseError, where + ": " + what); }

const Json& require(const Json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return node.at(key);
}

const Json& require_array(const Json& node, const std::string& where) {
  if (!node.is_array()) fail(where, "expected an array");
  return node;
}

std::string require_string(const Json& node, const std::string& where) {
  if (!node.is_string()) fail(where, "expected a string");
  return node.get<std::string>();
}

Rat require_rational(const Json& node, const std::string& where) {
  if (node.is_number_integer()) return Rat(node.get<long>());
  if (!node.is_string()) fail(where, "expected a rational string such as \"1/3\"");
  try {
    return parse_rat(node.get<std::string>());
  } catch (const Error& e) {
    fail(where, e.detail());
  }
}

std::size_t lookup(const std::vector<std::string>& names, const Json& node, const std::string& where, const char* kind) {
  const auto name = require_string(node, where);
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return k;
  }
  fail(where, std::string("unknown ") + kind + " '" + name + "'");
}

std::vector<std::size_t> lookup_all(const std::vector<std::string>& names, const Json& node, const std::string& where, const char* kind) {
  std::vector<std::size_t> out;
  const auto& arr = require_array(node, where);
  for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(lookup(names, arr[k], where + "[" + std::to_string(k) + "]", kind));
  return out;
}

AgentOrder parse_order(const ProblemFile& p, const Json& node, const std::string& where) {
  auto order = lookup_all(p.agents, node, where, "agent");
  try {
    check_agent_order(order, p.agents.size());
  } catch (const Error& e) {
    fail(where, e.detail());
  }
  return order;
}

RuleEntry parse_rule_entry(const ProblemFile& p, const Json& node, const std::string& where) {
  RuleEntry entry;
  if (!node.is_object()) fail(where, "expected an object");
  if (node.contains("when")) {
    const auto& when = node.at("when");
    const std::string w = where + ".when";
    if (!when.is_object()) fail(w, "expected an object");
    for (const auto& [key, value] : when.items()) {
      const std::string k = w + "." + key;
      if (key == "step") {
        if (!value.is_number_unsigned()) fail(k, "expected a non-negative integer");
        entry.step = value.get<std::size_t>();
      } else if (key == "allocated") {
        auto set = lookup_all(p.agents, value, k, "agent");
        std::sort(set.begin(), set.end());
        entry.allocated = std::move(set);
      } else if (key == "residual_integral" || key == "last_step_integral" || key == "all_integral") {
        if (!value.is_boolean()) fail(k, "expected true or false");
        auto& slot = key == "residual_integral" ? entry.residual_integral : key == "last_step_integral" ? entry.last_step_integral : entry.all_integral;
        slot = value.get<bool>();
      } else if (key == "integral") {
        if (!value.is_object()) fail(k, "expected an object of agent name to boolean");
        for (const auto& [agent, flag] : value.items()) {
          if (!flag.is_boolean()) fail(k + "." + agent, "expected true or false");
          entry.agent_integral.emplace_back(lookup(p.agents, Json(agent), k, "agent"), flag.get<bool>());
        }
      } else {
        fail(k, "unknown condition");
      }
    }
  }
  const bool monarchy = node.contains("monarchy");
  const bool diarchy = node.contains("diarchy");
  if (monarchy == diarchy) fail(where, "exactly one of 'monarchy' or 'diarchy' is required");
  if (monarchy) {
    entry.action = RuleEntry::Action::MonarchyFirstOf;
    entry.candidates = lookup_all(p.agents, node.at("monarchy"), where + ".monarchy", "agent");
  } else {
    entry.action = RuleEntry::Action::DiarchyFirstTwoOf;
    entry.candidates = lookup_all(p.agents, node.at("diarchy"), where + ".diarchy", "agent");
    if (node.contains("alpha")) entry.alpha = require_rational(node.at("alpha"), where + ".alpha");
    if (sgn(entry.alpha) <= 0 || entry.alpha >= 1) fail(where + ".alpha", "must lie strictly between 0 and 1");
  }
  return entry;
}

MechanismSpec parse_mechanism(const ProblemFile& p, const Json& node) {
  const std::string where = "mechanism";
  MechanismSpec spec;
  const auto type = require_string(require(node, "type", where), where + ".type");
  if (type == "serial-dictatorship") {
    spec.kind = MechanismSpec::Kind::SerialDictatorship;
    if (node.contains("order")) {
      spec.order = parse_order(p, node.at("order"), where + ".order");
    } else {
      spec.order.resize(p.agents.size());
      std::iota(spec.order.begin(), spec.order.end(), AgentIndex{0});
    }
  } else if (type == "rsd") {
    spec.kind = MechanismSpec::Kind::Rsd;
    std::vector<AgentOrder> orders;
    if (node.contains("orders")) {
      const auto& arr = require_array(node.at("orders"), where + ".orders");
      for (std::size_t k = 0; k < arr.size(); ++k) orders.push_back(parse_order(p, arr[k], where + ".orders[" + std::to_string(k) + "]"));
    } else {
      orders = all_orders(p.agents.size());
    }
    if (orders.empty()) fail(where + ".orders", "at least one order is required");
    if (node.contains("weights")) {
      const auto& w = require_array(node.at("weights"), where + ".weights");
      if (w.size() != orders.size()) fail(where + ".weights", "need one weight per order");
      for (std::size_t k = 0; k < orders.size(); ++k) {
        spec.lottery.entries.push_back({orders[k], require_rational(w[k], where + ".weights[" + std::to_string(k) + "]")});
      }
    } else {
      spec.lottery = OrderLottery::uniform(orders);
    }
    try {
      validate_order_lottery(spec.lottery, p.agents.size());
    } catch (const Error& e) {
      fail(where, e.detail());
    }
  } else if (type == "hmd") {
    spec.kind = MechanismSpec::Kind::Hmd;
    if (node.contains("builtin")) {
      const auto name = require_string(node.at("builtin"), where + ".builtin");
      auto builtin = builtin_rule(name);
      if (!builtin) fail(where + ".builtin", "unknown rule '" + name + "'");
      if (p.agents.size() != 5) fail(where + ".builtin", "built-in rules are written for five agents");
      spec.rule = std::move(*builtin);
    } else {
      spec.rule.name = node.contains("name") ? require_string(node.at("name"), where + ".name") : "custom";
      const auto& arr = require_array(require(node, "rules", where), where + ".rules");
      for (std::size_t k = 0; k < arr.size(); ++k) spec.rule.entries.push_back(parse_rule_entry(p, arr[k], where + ".rules[" + std::to_string(k) + "]"));
    }
  } else if (type == "fixture") {
    spec.kind = MechanismSpec::Kind::Fixture;
    spec.fixture = require_string(require(node, "name", where), where + ".name");
    if (!fixtures::by_name(spec.fixture, p.agents.size())) fail(where + ".name", "unknown fixture '" + spec.fixture + "' for this many agents");
  } else {
    fail(where + ".type", "unknown mechanism type '" + type + "'");
  }
  return spec;
}

Json lottery_by_name(const ProblemFile& p, std::span<const Rat> row) {
  Json out = Json::object();
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (sgn(row[a]) != 0) out[p.objects[a]] = to_string(row[a]);
  }
  return out;
}

std::string directive_text(const ProblemFile& p, const Directive& d) {
  if (const auto* m = std::get_if<Monarchy>(&d)) return "monarchy(" + p.agents[m->agent] + ")";
  const auto& di = std::get<Diarchy>(d);
  return "diarchy(" + p.agents[di.first] + "," + p.agents[di.second] + "," + to_string(di.alpha) + ")";
}

const Profile& need_profile(const ProblemFile& p) {
  if (!p.profile) throw Error(Errc::ParseError, "preferences: required for this command");
  return *p.profile;
}

const Allocation& need_allocation(const ProblemFile& p) {
  if (!p.allocation) throw Error(Errc::ParseError, "allocation: required for this command");
  return *p.allocation;
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) fail("<root>", "expected an object");
  ProblemFile p;
  const auto& objects = require_array(require(root, "objects", "<root>"), "objects");
  for (std::size_t k = 0; k < objects.size(); ++k) p.objects.push_back(require_string(objects[k], "objects[" + std::to_string(k) + "]"));
  const std::size_t n = p.objects.size();
  if (n < kMinSize) fail("objects", "at least three objects are required");
  if (std::set<std::string>(p.objects.begin(), p.objects.end()).size() != n) fail("objects", "names must be distinct");
  if (root.contains("agents")) {
    const auto& agents = require_array(root.at("agents"), "agents");
    for (std::size_t k = 0; k < agents.size(); ++k) p.agents.push_back(require_string(agents[k], "agents[" + std::to_string(k) + "]"));
    if (p.agents.size() != n) fail("agents", "need exactly as many agents as objects");
    if (std::set<std::string>(p.agents.begin(), p.agents.end()).size() != n) fail("agents", "names must be distinct");
  } else {
    for (std::size_t k = 1; k <= n; ++k) p.agents.push_back(std::to_string(k));
  }
  if (root.contains("preferences")) {
    const auto& prefs = require_array(root.at("preferences"), "preferences");
    if (prefs.size() != n) fail("preferences", "need one preference per agent");
    std::vector<Preference> list;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string where = "preferences[" + std::to_string(i) + "]";
      auto ranking = lookup_all(p.objects, prefs[i], where, "object");
      try {
        if (ranking.size() != n) throw Error(Errc::InvalidPreference, "must rank every object exactly once");
        list.emplace_back(std::move(ranking));
      } catch (const Error& e) {
        fail(where, e.detail());
      }
    }
    p.profile = Profile(std::move(list));
  }
  if (root.contains("allocation")) {
    const auto& rows = require_array(root.at("allocation"), "allocation");
    std::vector<std::vector<Rat>> matrix;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "allocation[" + std::to_string(i) + "]";
      const auto& row = require_array(rows[i], where);
      std::vector<Rat> values;
      for (std::size_t a = 0; a < row.size(); ++a) values.push_back(require_rational(row[a], where + "[" + std::to_string(a) + "]"));
      matrix.push_back(std::move(values));
    }
    if (matrix.size() != n) fail("allocation", "need one row per agent");
    p.allocation = validate_allocation(matrix);
  }
  if (root.contains("mechanism")) p.mechanism = parse_mechanism(p, root.at("mechanism"));
  return p;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, path.string() + ": cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str());
}

MechanismHandle make_mechanism(const MechanismSpec& spec, std::size_t agents) {
  switch (spec.kind) {
    case MechanismSpec::Kind::SerialDictatorship:
      return {"serial-dictatorship", agents, [order = spec.order](const Profile& p) { return serial_dictatorship(order, p); }};
    case MechanismSpec::Kind::Rsd:
      return {"rsd", agents, [lottery = spec.lottery](const Profile& p) { return rsd(lottery, p); }};
    case MechanismSpec::Kind::Hmd:
      return {spec.rule.name, agents, [rule = spec.rule.rule()](const Profile& p) { return hmd_run(rule, p).allocation; }};
    case MechanismSpec::Kind::Fixture:
      if (auto h = fixtures::by_name(spec.fixture, agents)) return *h;
      throw Error(Errc::ParseError, "mechanism.name: unknown fixture '" + spec.fixture + "'");
  }
  throw Error(Errc::ParseError, "mechanism: unsupported kind");
}

Json rational_vector(std::span<const Rat> values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(to_string(v));
  return out;
}

Json rational_matrix(const RatMatrix& matrix) {
  Json out = Json::array();
  for (std::size_t r = 0; r < matrix.rows(); ++r) out.push_back(rational_vector(matrix.row(r)));
  return out;
}

Json check_report(const ProblemFile& problem) {
  const auto& profile = need_profile(problem);
  const auto& allocation = need_allocation(problem);
  Json out;
  const auto ambiguous = is_ambiguously_efficient(allocation, profile);
  const auto unambiguous = is_unambiguously_efficient(allocation, profile);
  out["ambiguous"] = ambiguous.efficient;
  out["unambiguous"] = unambiguous.efficient;
  if (ambiguous.dominating) out["dominating"] = rational_matrix(ambiguous.dominating->matrix());
  if (unambiguous.certificate) {
    const auto& cert = *unambiguous.certificate;
    Json witnesses = Json::array();
    for (const auto& w : cert.witnesses) witnesses.push_back(w ? Json(*w) : Json(nullptr));
    out["certificate"] = {{"shift", rational_matrix(cert.shift)}, {"witnesses", witnesses}};
    const auto falsifying = falsifying_utilities(cert, allocation, profile);
    Json utilities = Json::array();
    for (const auto& u : falsifying.utilities) utilities.push_back(rational_vector(u));
    out["falsifying_utilities"] = {{"utilities", utilities}, {"scale", to_string(falsifying.scale)}, {"improved", rational_matrix(falsifying.improved.matrix())}};
  }
  Json support = Json::array();
  for (const auto& [i, j] : check_support_bound(allocation)) support.push_back({problem.agents[i], problem.agents[j]});
  Json gaps = Json::array();
  for (const auto& g : check_no_gaps(allocation, profile)) {
    gaps.push_back({{"i", problem.agents[g.i]}, {"j", problem.agents[g.j]}, {"a", problem.objects[g.a]}, {"b", problem.objects[g.b]}, {"c", problem.objects[g.c]}});
  }
  out["lemma_violations"] = {{"support_bound", support}, {"no_gaps", gaps}};
  return out;
}

Json run_report(const ProblemFile& problem, bool with_decomposition) {
  const auto& profile = need_profile(problem);
  if (!problem.mechanism) throw Error(Errc::ParseError, "mechanism: required for this command");
  const auto& spec = *problem.mechanism;
  Json out;
  std::optional<Allocation> allocation;
  if (spec.kind == MechanismSpec::Kind::Hmd || spec.kind == MechanismSpec::Kind::SerialDictatorship) {
    const auto rule = spec.kind == MechanismSpec::Kind::Hmd ? spec.rule.rule() : monarchy_rule(spec.order);
    auto result = hmd_run(rule, profile);
    Json calls = Json::array();
    std::size_t call = 1;
    for (const auto& step : result.trace) {
      Json partial = Json::object();
      for (std::size_t i = 0; i < step.partial.rows.size(); ++i) {
        if (step.partial.rows[i]) partial[problem.agents[i]] = lottery_by_name(problem, *step.partial.rows[i]);
      }
      calls.push_back({{"call", call++}, {"supply", rational_vector(step.supply)}, {"directive", directive_text(problem, step.directive)}, {"partial", partial}});
    }
    calls.push_back({{"call", call}, {"supply", rational_vector(zeros(profile.size()))}, {"terminal", true}});
    out["trace"] = calls;
    allocation = std::move(result.allocation);
  } else {
    allocation = make_mechanism(spec, profile.size()).eval(profile);
  }
  out["allocation"] = rational_matrix(allocation->matrix());
  Json named = Json::object();
  for (std::size_t i = 0; i < profile.size(); ++i) named[problem.agents[i]] = lottery_by_name(problem, allocation->row(i));
  out["lotteries"] = named;
  if (with_decomposition) {
    ProblemFile copy = problem;
    copy.allocation = *allocation;
    out["decomposition"] = decompose_report(copy)["terms"];
  }
  return out;
}

Json axiom_report_json(const AxiomReport& report, const ProblemFile& problem) {
  Json out{{"axiom", to_string(report.axiom)}, {"verdict", to_string(report.verdict)}, {"instances", report.instances}};
  if (report.witness) {
    const auto& inst = report.witness->instance;
    Json prefs = Json::array();
    for (const auto& pref : inst.profile) {
      Json r = Json::array();
      for (auto a : pref.ranking()) r.push_back(problem.objects[a]);
      prefs.push_back(r);
    }
    Json w{{"preferences", prefs}};
    if (inst.agent) w["agent"] = problem.agents[*inst.agent];
    if (inst.deviation) {
      Json r = Json::array();
      for (auto a : inst.deviation->ranking()) r.push_back(problem.objects[a]);
      w["deviation"] = r;
    }
    if (!inst.relabeling.empty()) {
      Json r = Json::object();
      for (std::size_t a = 0; a < inst.relabeling.size(); ++a) r[problem.objects[a]] = problem.objects[inst.relabeling[a]];
      w["relabeling"] = r;
    }
    w["detail"] = report.witness->detail;
    out["witness"] = w;
  }
  return out;
}

Json symmetry_cost_report(std::size_t n, const Rat& epsilon) {
  const auto r = symmetry_cost(n, epsilon);
  return {{"n", r.n},
          {"epsilon", to_string(r.epsilon)},
          {"rates", rational_vector(r.rates)},
          {"trader_lottery", rational_vector(r.trader_lottery)},
          {"traded_allocation", rational_matrix(r.traded.matrix())},
          {"gain", to_string(r.gain)},
          {"delta", to_string(r.delta)},
          {"bound", to_string(r.bound)},
          {"limit", to_string(r.limit)}};
}

Json decompose_report(const ProblemFile& problem) {
  const auto d = decompose(need_allocation(problem));
  Json terms = Json::array();
  for (const auto& t : d.terms) {
    Json assignment = Json::object();
    for (std::size_t i = 0; i < t.assignment.size(); ++i) assignment[problem.agents[i]] = problem.objects[t.assignment[i]];
    terms.push_back({{"weight", to_string(t.weight)}, {"assignment", assignment}});
  }
  return {{"allocation", rational_matrix(need_allocation(problem).matrix())}, {"terms", terms}};
}

}  // namespace ordalloc::cli
