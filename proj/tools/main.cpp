#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lifted/io.hpp"
#include "lifted/ldjt.hpp"

namespace {

int log_level() {
  const char* v = std::getenv("TAME_LOG_LEVEL");
  return v ? std::atoi(v) : 0;
}

// "R(p0,j1)" -> name + constant list
std::pair<std::string, std::vector<std::string>> parse_target(
    const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos) return {text, {}};
  if (text.back() != ')')
    throw std::invalid_argument("malformed target " + text);
  std::string name = text.substr(0, open);
  std::vector<std::string> consts;
  std::string cur;
  for (std::size_t i = open + 1; i + 1 < text.size(); ++i) {
    if (text[i] == ',') {
      consts.push_back(cur);
      cur.clear();
    } else if (text[i] != ' ') {
      cur += text[i];
    }
  }
  if (!cur.empty() || !consts.empty()) consts.push_back(cur);
  return {name, consts};
}

void print_marginal(const std::vector<std::string>& range,
                    const std::vector<double>& dist) {
  for (std::size_t i = 0; i < dist.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", dist[i]);
    std::cout << (i < range.size() ? range[i] : std::to_string(i)) << ' '
              << buf << '\n';
  }
}

void log_run(const lifted::RunResult& res) {
  if (log_level() < 1) return;
  for (const auto& r : res.tame_log)
    std::cerr << "[tame] step " << r.step << " partition " << r.partition
              << " args " << r.args << " l " << r.l << " m " << r.m << " f "
              << r.f << " f_crit " << r.f_crit << " -> " << r.decision
              << " (" << r.groups_before << " -> " << r.groups_after << ")\n";
  if (log_level() < 2) return;
  for (const auto& [step, counts] : res.msg_groups_by_step) {
    std::cerr << "[tame] message " << step << " groups";
    for (const auto& [lv, n] : counts) std::cerr << ' ' << lv << '=' << n;
    std::cerr << '\n';
  }
}

int run_validate(const std::string& path) {
  const std::string text = lifted::read_file(path);
  if (lifted::has_transition(text)) {
    lifted::PDM pdm = lifted::parse_pdm(text);
    std::cout << "valid temporal model: " << pdm.g0.parfactors.size()
              << " initial, " << pdm.gtrans.parfactors.size()
              << " transition parfactors\n";
  } else {
    lifted::Model m = lifted::parse_model(text);
    std::cout << "valid model: " << m.parfactors.size() << " parfactors\n";
  }
  return 0;
}

int run_query(const std::string& model_path, const std::string& ev_path,
              const std::string& target, int pi) {
  const std::string text = lifted::read_file(model_path);
  if (!lifted::has_transition(text))
    throw std::invalid_argument("query needs a temporal model");
  lifted::PDM pdm = lifted::parse_pdm(text);
  lifted::Evidence ev = lifted::parse_evidence(lifted::read_file(ev_path));

  auto [name, consts] = parse_target(target);
  const int horizon = ev.horizon();
  lifted::Query q;
  q.prv = name;
  q.consts = consts;
  q.pi = pi;
  q.horizon = horizon;

  auto at = [&](int s) -> const std::vector<lifted::Event>& {
    static const std::vector<lifted::Event> none;
    auto it = ev.steps.find(s);
    return it == ev.steps.end() ? none : it->second;
  };
  auto state = lifted::LdjtState::start(pdm, at(0));
  for (int s = 1; s <= horizon; ++s) state.advance(at(s));
  auto dist = state.answer(q);

  auto prv = lifted::find_prv(pdm.gtrans, name, 1);
  print_marginal(prv ? prv->range : std::vector<std::string>{}, dist);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifted temporal inference tool"};
  app.require_subcommand(1);

  std::string model_path, evidence_path, config_path, target, mode = "none";
  std::string out_dir = ".";
  int pi = 0;
  lifted::ExperimentConfig overrides;
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "check a model file");
  validate->add_option("model", model_path, "model file")->required();

  auto* query = app.add_subcommand("query", "answer one marginal query");
  query->add_option("model", model_path, "temporal model file")->required();
  query->add_option("evidence", evidence_path, "evidence file")->required();
  query->add_option("--target", target, "ground instance, e.g. R(p0)")
      ->required();
  query->add_option("--pi", pi, "query time step")->required();

  auto* experiment = app.add_subcommand("experiment", "run one configuration");
  experiment->add_option("config", config_path, "experiment file")->required();
  experiment->add_option("--mode", mode, "none or tame")
      ->check(CLI::IsMember({"none", "tame"}));
  experiment->add_option("--out", out_dir, "output directory");
  auto* eps = experiment->add_option("--epsilon", overrides.epsilon);
  auto* alp = experiment->add_option("--alpha", overrides.alpha);
  auto* inter = experiment->add_option("--interval", overrides.interval);
  auto* steps = experiment->add_option("--steps", overrides.steps);
  auto* groups = experiment->add_option("--groups", overrides.groups);
  auto* dom = experiment->add_option("--domain-size", overrides.domain_size);
  auto* drop = experiment->add_option("--dropout", overrides.dropout);
  auto* sd = experiment->add_option("--seed", overrides.seed);
  auto* offs = experiment->add_option("--offsets", overrides.offsets);

  auto* replicate =
      app.add_subcommand("replicate-paper", "run the three option configs");
  replicate->add_option("--out", out_dir, "output directory");
  replicate->add_option("--seed", seed, "evidence seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return run_validate(model_path);
    if (*query) return run_query(model_path, evidence_path, target, pi);
    if (*experiment) {
      lifted::ExperimentConfig cfg =
          lifted::parse_experiment_config(lifted::read_file(config_path));
      if (*eps) cfg.epsilon = overrides.epsilon;
      if (*alp) cfg.alpha = overrides.alpha;
      if (*inter) cfg.interval = overrides.interval;
      if (*steps) cfg.steps = overrides.steps;
      if (*groups) cfg.groups = overrides.groups;
      if (*dom) cfg.domain_size = overrides.domain_size;
      if (*drop) cfg.dropout = overrides.dropout;
      if (*sd) cfg.seed = overrides.seed;
      if (*offs) cfg.offsets = overrides.offsets;
      const auto run_mode =
          mode == "tame" ? lifted::RunMode::tame : lifted::RunMode::none;
      const auto res = lifted::run_experiment(cfg, run_mode);
      std::filesystem::create_directories(out_dir);
      lifted::write_metrics_csv(out_dir + "/metrics.csv", res.rows);
      lifted::write_summary_csv(out_dir + "/summary.csv",
                                lifted::summarize(res.rows));
      lifted::write_tame_log_csv(out_dir + "/tame_log.csv", res.tame_log);
      lifted::write_timings(out_dir + "/timings.txt", res);
      log_run(res);
      return 0;
    }
    if (*replicate) {
      lifted::replicate_options(out_dir, seed);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
