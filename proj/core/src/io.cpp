#include "lifted/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace lifted {

namespace {

using json = nlohmann::ordered_json;

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string("missing field \"") + key + '"');
  return *it;
}

std::vector<LogVar> parse_logvars(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("\"logvars\" must be a list");
  std::vector<LogVar> out;
  for (const auto& e : j) {
    LogVar lv;
    lv.name = field(e, "name").get<std::string>();
    for (const auto& c : field(e, "domain"))
      lv.domain.push_back(c.get<std::string>());
    out.push_back(std::move(lv));
  }
  return out;
}

PRV parse_prv(const json& j) {
  PRV prv;
  prv.name = field(j, "name").get<std::string>();
  if (auto it = j.find("logvars"); it != j.end())
    for (const auto& lv : *it) prv.logvars.push_back(lv.get<std::string>());
  if (auto it = j.find("range"); it != j.end()) {
    prv.range.clear();
    for (const auto& v : *it) prv.range.push_back(v.get<std::string>());
    if (prv.range.size() < 2)
      throw std::invalid_argument("PRV range needs at least two values");
  }
  if (auto it = j.find("slice"); it != j.end())
    prv.slice = it->get<int>();
  for (const auto& [key, value] : j.items())
    if (key != "name" && key != "logvars" && key != "range" && key != "slice")
      throw std::invalid_argument("unknown PRV field \"" + key + '"');
  return prv;
}

Parfactor parse_parfactor(const json& j,
                          const std::vector<LogVar>& logvars) {
  std::vector<PRV> args;
  for (const auto& a : field(j, "args")) args.push_back(parse_prv(a));

  std::map<std::string, const LogVar*> by_name;
  for (const auto& lv : logvars) by_name[lv.name] = &lv;
  std::vector<std::string> names;
  for (const auto& a : args)
    for (const auto& lv : a.logvars) names.push_back(lv);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<Constraint::Slot> slots;
  for (const auto& name : names) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw std::invalid_argument("undeclared logvar " + name);
    slots.push_back({name, static_cast<int>(it->second->domain.size())});
  }

  Constraint c = Constraint::top(slots);
  if (auto it = j.find("constraint"); it != j.end()) {
    std::vector<std::vector<int>> tuples;
    for (const auto& t : field(*it, "tuples")) {
      if (t.size() != slots.size())
        throw std::invalid_argument("constraint tuple arity mismatch");
      std::vector<int> row;
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const auto& dom = by_name[slots[k].logvar]->domain;
        const std::string name = t[k].get<std::string>();
        auto pos = std::find(dom.begin(), dom.end(), name);
        if (pos == dom.end())
          throw std::invalid_argument("constant " + name +
                                      " not in domain of " + slots[k].logvar);
        row.push_back(static_cast<int>(pos - dom.begin()));
      }
      tuples.push_back(std::move(row));
    }
    c = Constraint::explicit_set(slots, std::move(tuples));
  }

  std::vector<double> table;
  for (const auto& v : field(j, "table")) {
    if (!v.is_number()) throw std::invalid_argument("table entries must be numbers");
    table.push_back(v.get<double>());
  }
  return Parfactor(std::move(args), std::move(table), std::move(c));
}

Model parse_model_json(const json& j) {
  Model m;
  m.logvars = parse_logvars(field(j, "logvars"));
  std::sort(m.logvars.begin(), m.logvars.end(),
            [](const LogVar& a, const LogVar& b) { return a.name < b.name; });
  for (const auto& p : field(j, "parfactors"))
    m.parfactors.push_back(parse_parfactor(p, m.logvars));
  auto violations = validate(m);
  if (!violations.empty())
    throw std::invalid_argument("invalid model: " + violations[0]);
  return m;
}

json prv_json(const PRV& prv) {
  json j;
  j["name"] = prv.name;
  if (!prv.logvars.empty()) j["logvars"] = prv.logvars;
  if (prv.range != std::vector<std::string>{"false", "true"})
    j["range"] = prv.range;
  if (prv.slice) j["slice"] = *prv.slice;
  return j;
}

json parfactor_json(const Parfactor& p, const std::vector<LogVar>& logvars) {
  json j;
  j["args"] = json::array();
  for (const auto& a : p.args) j["args"].push_back(prv_json(a));
  j["table"] = p.table;
  if (!p.constraint.is_top()) {
    std::map<std::string, const LogVar*> by_name;
    for (const auto& lv : logvars) by_name[lv.name] = &lv;
    json tuples = json::array();
    for (const auto& t : p.constraint.expanded()) {
      json row = json::array();
      for (std::size_t k = 0; k < t.size(); ++k)
        row.push_back(by_name.at(p.constraint.slots[k].logvar)->domain[t[k]]);
      tuples.push_back(std::move(row));
    }
    j["constraint"] = json{{"tuples", std::move(tuples)}};
  }
  return j;
}

json model_json(const Model& m) {
  std::vector<LogVar> lvs = m.logvars;
  std::sort(lvs.begin(), lvs.end(),
            [](const LogVar& a, const LogVar& b) { return a.name < b.name; });
  json j;
  j["logvars"] = json::array();
  for (const auto& lv : lvs)
    j["logvars"].push_back(json{{"name", lv.name}, {"domain", lv.domain}});
  j["parfactors"] = json::array();
  for (const auto& p : m.parfactors)
    j["parfactors"].push_back(parfactor_json(p, lvs));
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Model parse_model(const std::string& text) {
  return parse_model_json(parse_text(text));
}

PDM parse_pdm(const std::string& text) {
  json j = parse_text(text);
  PDM pdm;
  pdm.g0 = parse_model_json(j);
  pdm.gtrans.logvars = pdm.g0.logvars;
  for (const auto& p : field(field(j, "transition"), "parfactors"))
    pdm.gtrans.parfactors.push_back(parse_parfactor(p, pdm.gtrans.logvars));
  auto violations = validate_pdm(pdm);
  if (!violations.empty())
    throw std::invalid_argument("invalid temporal model: " + violations[0]);
  return pdm;
}

bool has_transition(const std::string& text) {
  json j = parse_text(text);
  return j.find("transition") != j.end();
}

Evidence parse_evidence(const std::string& text) {
  json j = parse_text(text);
  Evidence ev;
  for (const auto& [key, list] : field(j, "evidence").items()) {
    int step = 0;
    try {
      std::size_t used = 0;
      step = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw std::invalid_argument("evidence step \"" + key +
                                  "\" is not an integer");
    }
    if (step < 0) throw std::invalid_argument("evidence step must be >= 0");
    std::vector<Event> events;
    for (const auto& e : list) {
      Event event;
      event.prv = field(e, "prv").get<std::string>();
      if (auto it = e.find("consts"); it != e.end())
        for (const auto& c : *it)
          event.consts.push_back(c.get<std::string>());
      event.value = field(e, "value").get<std::string>();
      events.push_back(std::move(event));
    }
    ev.steps[step] = std::move(events);
  }
  return ev;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j = parse_text(text);
  ExperimentConfig cfg;
  const json& e = field(j, "experiment");
  for (const auto& [key, value] : e.items()) {
    if (key == "domain_size") cfg.domain_size = value.get<int>();
    else if (key == "journals") cfg.journals = value.get<int>();
    else if (key == "groups") cfg.groups = value.get<int>();
    else if (key == "dropout") cfg.dropout = value.get<double>();
    else if (key == "steps") cfg.steps = value.get<int>();
    else if (key == "interval") cfg.interval = value.get<int>();
    else if (key == "epsilon") cfg.epsilon = value.get<double>();
    else if (key == "alpha") cfg.alpha = value.get<double>();
    else if (key == "offsets") cfg.offsets = value.get<std::vector<int>>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "significance_gate")
      cfg.significance_gate = value.get<bool>();
    else
      throw std::invalid_argument("unknown experiment field \"" + key + '"');
  }
  return cfg;
}

std::string serialize(const Model& m) { return dump(model_json(m)); }

std::string serialize(const PDM& pdm) {
  json j = model_json(pdm.g0);
  json trans;
  trans["parfactors"] = json::array();
  std::vector<LogVar> lvs = pdm.g0.logvars;
  std::sort(lvs.begin(), lvs.end(),
            [](const LogVar& a, const LogVar& b) { return a.name < b.name; });
  for (const auto& p : pdm.gtrans.parfactors)
    trans["parfactors"].push_back(parfactor_json(p, lvs));
  j["transition"] = std::move(trans);
  return dump(j);
}

std::string serialize(const Evidence& ev) {
  json steps = json::object();
  for (const auto& [step, events] : ev.steps) {
    json list = json::array();
    for (const auto& e : events) {
      json je;
      je["prv"] = e.prv;
      if (!e.consts.empty()) je["consts"] = e.consts;
      je["value"] = e.value;
      list.push_back(std::move(je));
    }
    steps[std::to_string(step)] = std::move(list);
  }
  json j;
  j["evidence"] = std::move(steps);
  return dump(j);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace lifted
