#include "lifted/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "lifted/ground.hpp"
#include "lifted/ldjt.hpp"

namespace lifted {

namespace {

Constraint top_x(int people) {
  return Constraint::top({{"X", people}});
}

// p(r1 | r0, a0): reputation leans on recent attendance, mixing fast.
const std::vector<double> kRepTable{0.52, 0.48, 0.48, 0.52,
                                    0.5,  0.5,  0.46, 0.54};
// p(d | a, r): research output driven by attendance, helped by reputation.
const std::vector<double> kResTable{0.85, 0.75, 0.15, 0.25,
                                    0.25, 0.15, 0.75, 0.85};
// p(pub | a, r): publications need both.
const std::vector<double> kPubTable{0.55, 0.45, 0.45, 0.55,
                                    0.5,  0.4,  0.5,  0.6};

PRV make_prv(const std::string& name, std::vector<std::string> lvs,
             std::optional<int> slice) {
  PRV p;
  p.name = name;
  p.logvars = std::move(lvs);
  p.slice = slice;
  return p;
}

}  // namespace

Model reputation_g0(int people, int journals) {
  return reputation_pdm(people, journals).g0;
}

PDM reputation_pdm(int people, int journals) {
  if (people < 1 || journals < 1)
    throw std::invalid_argument("domain sizes must be positive");
  LogVar x{"X", {}};
  for (int i = 0; i < people; ++i) x.domain.push_back("p" + std::to_string(i));
  LogVar j{"J", {}};
  for (int i = 0; i < journals; ++i)
    j.domain.push_back("j" + std::to_string(i));

  Constraint cx = top_x(people);
  Constraint cxj = Constraint::top({{"J", journals}, {"X", people}});

  PDM pdm;
  pdm.g0.logvars = {x, j};
  pdm.g0.parfactors.emplace_back(
      std::vector<PRV>{make_prv("A", {"X"}, std::nullopt),
                       make_prv("D", {"X"}, std::nullopt),
                       make_prv("R", {"X"}, std::nullopt)},
      kResTable, cx);
  pdm.g0.parfactors.emplace_back(
      std::vector<PRV>{make_prv("A", {"X"}, std::nullopt),
                       make_prv("Pub", {"X", "J"}, std::nullopt),
                       make_prv("R", {"X"}, std::nullopt)},
      kPubTable, cxj);

  pdm.gtrans.logvars = {x, j};
  pdm.gtrans.parfactors.emplace_back(
      std::vector<PRV>{make_prv("A", {"X"}, 0), make_prv("R", {"X"}, 0),
                       make_prv("R", {"X"}, 1)},
      kRepTable, cx);
  pdm.gtrans.parfactors.emplace_back(
      std::vector<PRV>{make_prv("A", {"X"}, 1), make_prv("D", {"X"}, 1),
                       make_prv("R", {"X"}, 1)},
      kResTable, cx);
  pdm.gtrans.parfactors.emplace_back(
      std::vector<PRV>{make_prv("A", {"X"}, 1),
                       make_prv("Pub", {"X", "J"}, 1),
                       make_prv("R", {"X"}, 1)},
      kPubTable, cxj);
  return pdm;
}

namespace {

std::pair<int, int> group_span(const ExperimentConfig& cfg, int g) {
  const int per = cfg.domain_size / cfg.groups;
  const int lo = g * per;
  const int hi = (g == cfg.groups - 1) ? cfg.domain_size : (g + 1) * per;
  return {lo, hi};
}

}  // namespace

Evidence gen_evidence(const ExperimentConfig& cfg) {
  if (cfg.groups < 1 || cfg.domain_size < cfg.groups)
    throw std::invalid_argument("need at least one person per group");
  std::mt19937_64 rng(cfg.seed);
  Evidence ev;
  for (int s = 0; s <= cfg.steps; ++s) {
    std::vector<Event> list;
    for (int g = 0; g < cfg.groups; ++g) {
      const auto [lo, hi] = group_span(cfg, g);
      const bool value = rng() & 1ull;
      for (int i = lo; i < hi; ++i) {
        const double u =
            static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
        if (u < cfg.dropout) continue;
        Event e;
        e.prv = "D";
        e.consts = {"p" + std::to_string(i)};
        e.value = value ? "true" : "false";
        list.push_back(std::move(e));
      }
    }
    if (!list.empty()) ev.steps[s] = std::move(list);
  }
  return ev;
}

namespace {

const std::vector<Event> kNoEvents;

const std::vector<Event>& events_at(const Evidence& ev, int s) {
  auto it = ev.steps.find(s);
  return it == ev.steps.end() ? kNoEvents : it->second;
}

std::string prv_label(const PRV& prv) {
  std::string s = to_string(prv);
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

int max_group_count(const std::map<std::string, int>& gc) {
  int m = 0;
  for (const auto& [lv, n] : gc) m = std::max(m, n);
  return m;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_dist(const std::vector<double>& dist) {
  std::vector<std::string> parts;
  parts.reserve(dist.size());
  for (double v : dist) parts.push_back(fmt(v));
  return join(parts, ';');
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, RunMode mode,
                         int timing_repetitions) {
  using clock = std::chrono::steady_clock;
  if (cfg.steps < 1) throw std::invalid_argument("need at least one step");
  if (timing_repetitions < 1) timing_repetitions = 1;

  const PDM pdm = reputation_pdm(cfg.domain_size, cfg.journals);
  const Evidence ev = gen_evidence(cfg);
  TameConfig tcfg;
  tcfg.epsilon = cfg.epsilon;
  tcfg.alpha = cfg.alpha;
  tcfg.significance_gate = cfg.significance_gate;
  auto tame_at = [&](int s) -> std::optional<TameConfig> {
    if (mode == RunMode::tame && cfg.interval > 0 && s % cfg.interval == 0)
      return tcfg;
    return std::nullopt;
  };

  std::vector<std::pair<std::string, std::vector<std::string>>> targets;
  for (int g = 0; g < cfg.groups; ++g)
    targets.emplace_back(
        "R", std::vector<std::string>{"p" + std::to_string(group_span(cfg, g).first)});

  RunResult res;
  std::vector<std::vector<double>> rep_seconds(timing_repetitions);

  LdjtState measured = LdjtState::start(pdm, events_at(ev, 0));
  std::optional<LdjtState> reference;
  if (mode == RunMode::tame) reference = measured;

  std::map<int, std::vector<std::size_t>> rows_by_step;
  for (int s = 1; s <= cfg.steps; ++s) {
    StepStats stats;
    const auto t0 = clock::now();
    measured.advance(events_at(ev, s), tame_at(s), &stats);
    const auto t1 = clock::now();
    rep_seconds[0].push_back(std::chrono::duration<double>(t1 - t0).count());
    if (reference) reference->advance(events_at(ev, s));

    res.msg_groups_by_step[s - 1] = LdjtState::group_count(stats.message);
    const int prev_groups = max_group_count(res.msg_groups_by_step[s - 1]);
    for (std::size_t ri : rows_by_step[s - 1])
      res.rows[ri].msg_groups = prev_groups;

    for (const auto& rep : stats.tame_reports) {
      TameLogRow row;
      row.step = s;
      row.partition = join(rep.partition_logvars, '|');
      std::vector<std::string> arg_labels;
      for (const auto& a : rep.arguments) arg_labels.push_back(prv_label(a));
      row.args = join(arg_labels, '|');
      row.m = rep.total_groundings;
      row.l = static_cast<int>(rep.clusters.size());
      row.f = rep.f;
      row.f_crit = rep.f_crit;
      row.decision = to_string(rep.decision);
      row.groups_before = rep.groups_before;
      row.groups_after = rep.groups_after;
      res.tame_log.push_back(std::move(row));
      if (rep.decision == GateDecision::reject)
        ++res.gate_rejections;
      else if (rep.decision == GateDecision::accept)
        ++res.gate_accepts;
    }

    for (int o : cfg.offsets) {
      const int pi = s + o;
      auto approx = measured.predict_many(pi, targets);
      auto exact = reference ? reference->predict_many(pi, targets) : approx;
      for (std::size_t k = 0; k < targets.size(); ++k) {
        MetricsRow row;
        row.step = s;
        row.pi = pi;
        row.query = targets[k].first + "(" + targets[k].second[0] + ")";
        row.exact = exact[k];
        row.approx = approx[k];
        row.abs_error = compare_marginals(exact[k], approx[k]);
        rows_by_step[s].push_back(res.rows.size());
        res.rows.push_back(std::move(row));
      }
    }
  }
  res.msg_groups_by_step[cfg.steps] =
      LdjtState::group_count(measured.peek_message());
  const int last_groups = max_group_count(res.msg_groups_by_step[cfg.steps]);
  for (std::size_t ri : rows_by_step[cfg.steps])
    res.rows[ri].msg_groups = last_groups;

  for (int rep = 1; rep < timing_repetitions; ++rep) {
    LdjtState m2 = LdjtState::start(pdm, events_at(ev, 0));
    for (int s = 1; s <= cfg.steps; ++s) {
      StepStats stats;
      const auto t0 = clock::now();
      m2.advance(events_at(ev, s), tame_at(s), &stats);
      const auto t1 = clock::now();
      rep_seconds[rep].push_back(
          std::chrono::duration<double>(t1 - t0).count());
    }
  }
  for (int s = 0; s < cfg.steps; ++s) {
    std::vector<double> samples;
    samples.reserve(timing_repetitions);
    for (int rep = 0; rep < timing_repetitions; ++rep)
      samples.push_back(rep_seconds[rep][s]);
    res.step_seconds.push_back(median(std::move(samples)));
  }
  for (double v : res.step_seconds) res.total_seconds += v;
  return res;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows) {
  std::map<int, SummaryRow> by_offset;
  std::map<int, int> counts;
  for (const auto& r : rows) {
    const int o = r.pi - r.step;
    auto [it, fresh] = by_offset.emplace(o, SummaryRow{o, 0, 0, 0});
    auto& s = it->second;
    if (fresh || r.abs_error > s.max_error) s.max_error = r.abs_error;
    if (fresh || r.abs_error < s.min_error) s.min_error = r.abs_error;
    s.avg_error += r.abs_error;
    ++counts[o];
  }
  std::vector<SummaryRow> out;
  for (auto& [o, s] : by_offset) {
    s.avg_error /= counts[o];
    out.push_back(s);
  }
  return out;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "step,pi,query,reference,measured,abs_error,msg_groups\n";
  for (const auto& r : rows)
    os << r.step << ',' << r.pi << ',' << r.query << ',' << fmt_dist(r.exact)
       << ',' << fmt_dist(r.approx) << ',' << fmt(r.abs_error) << ','
       << r.msg_groups << '\n';
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "offset,max_error,min_error,avg_error\n";
  for (const auto& r : rows)
    os << r.pi << ',' << fmt(r.max_error) << ',' << fmt(r.min_error) << ','
       << fmt(r.avg_error) << '\n';
}

void write_tame_log_csv(const std::string& path,
                        const std::vector<TameLogRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "step,partition,args,m,l,f,f_crit,decision,groups_before,groups_"
        "after\n";
  for (const auto& r : rows)
    os << r.step << ',' << r.partition << ',' << r.args << ',' << r.m << ','
       << r.l << ',' << fmt(r.f) << ',' << fmt(r.f_crit) << ',' << r.decision
       << ',' << r.groups_before << ',' << r.groups_after << '\n';
}

void write_timings(const std::string& path, const RunResult& result) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "total_seconds " << fmt(result.total_seconds) << '\n';
  for (std::size_t s = 0; s < result.step_seconds.size(); ++s)
    os << "step " << (s + 1) << " median_seconds "
       << fmt(result.step_seconds[s]) << '\n';
}

std::vector<ExperimentConfig> option_configs(std::uint64_t seed) {
  ExperimentConfig base;
  base.seed = seed;
  std::vector<ExperimentConfig> out(3, base);
  out[0].interval = 5;
  out[0].epsilon = 5e-14;
  out[1].interval = 5;
  out[1].epsilon = 5e-2;
  out[2].interval = 2;
  out[2].epsilon = 5e-2;
  return out;
}

void replicate_options(const std::string& out_dir, std::uint64_t seed) {
  const auto cfgs = option_configs(seed);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const auto res = run_experiment(cfgs[i], RunMode::tame, 3);
    const std::string dir = out_dir + "/option" + std::to_string(i + 1);
    std::filesystem::create_directories(dir);
    write_metrics_csv(dir + "/metrics.csv", res.rows);
    write_summary_csv(dir + "/summary.csv", summarize(res.rows));
    write_tame_log_csv(dir + "/tame_log.csv", res.tame_log);
    write_timings(dir + "/timings.txt", res);
  }
}

}  // namespace lifted
