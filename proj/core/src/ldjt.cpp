#include "lifted/ldjt.hpp"

#include <algorithm>
#include <set>

namespace lifted {

namespace {

bool touches_slice(const Parfactor& p, int tag) {
  for (const auto& a : p.args)
    if (a.slice && *a.slice == tag) return true;
  return false;
}

Parfactor retag_parfactor(const Parfactor& p, int from, int to) {
  std::vector<PRV> args = p.args;
  for (auto& a : args)
    if (a.slice && *a.slice == from) a.slice = to;
  return Parfactor(std::move(args), p.table, p.constraint);
}

}  // namespace

LdjtState LdjtState::start(const PDM& pdm, const std::vector<Event>& ev0) {
  auto violations = validate_pdm(pdm);
  if (!violations.empty())
    throw std::invalid_argument("invalid temporal model: " + violations[0]);

  LdjtState s;
  s.vocab_.logvars = pdm.g0.logvars;
  s.step_model_.logvars = pdm.gtrans.logvars;
  for (const auto& p : pdm.gtrans.parfactors)
    if (touches_slice(p, 1)) s.step_model_.parfactors.push_back(p);

  s.interface_prev_ = forward_interface(pdm.gtrans);
  if (s.interface_prev_.empty())
    throw std::invalid_argument("transition model has no interface");
  for (PRV prv : s.interface_prev_) {
    prv.slice = 1;
    s.interface_cur_.push_back(prv);
  }
  s.step_template_ = build_fojt(s.step_model_.parfactors, s.interface_prev_,
                                s.interface_cur_);

  Model g0;
  g0.logvars = pdm.g0.logvars;
  for (const auto& p : pdm.g0.parfactors) {
    std::vector<PRV> args = p.args;
    for (auto& a : args) a.slice = 0;
    g0.parfactors.emplace_back(std::move(args), p.table, p.constraint);
  }
  s.tree_ = build_fojt(g0.parfactors, {}, s.interface_prev_);

  std::vector<ResolvedEvent> events;
  events.reserve(ev0.size());
  for (const auto& e : ev0) events.push_back(resolve_event(g0, e, 0));
  std::vector<std::vector<Parfactor>> groups;
  groups.reserve(s.tree_.clusters.size());
  for (auto& c : s.tree_.clusters) groups.push_back(std::move(c.local));
  groups = apply_evidence_grouped(groups, events);
  for (std::size_t i = 0; i < groups.size(); ++i)
    s.tree_.clusters[i].local = std::move(groups[i]);
  calibrate(s.tree_);

  std::set<PRV> iface(s.interface_prev_.begin(), s.interface_prev_.end());
  for (const auto& e : events)
    if (iface.count(e.prv)) s.carry_.push_back(e);
  s.observed_ = std::move(events);
  return s;
}

std::vector<ResolvedEvent> LdjtState::resolve_step_events(
    const std::vector<Event>& ev, int slice_tag) const {
  std::vector<ResolvedEvent> out;
  out.reserve(ev.size());
  for (const auto& e : ev)
    out.push_back(resolve_event(step_model_, e, slice_tag));
  return out;
}

ForwardMessage LdjtState::peek_message(
    const std::optional<TameConfig>& tame_cfg,
    std::vector<ClusterReport>* reports) const {
  const auto& out_iface = (t_ == 0) ? interface_prev_ : interface_cur_;
  auto msg = forward_message(tree_, out_iface, t_);
  if (tame_cfg) {
    auto [parfactors, reps] = tame(msg.parfactors, *tame_cfg);
    msg.parfactors = std::move(parfactors);
    if (reports) *reports = std::move(reps);
  } else if (reports) {
    reports->clear();
  }
  return msg;
}

void LdjtState::advance(const std::vector<Event>& ev,
                        const std::optional<TameConfig>& tame_cfg,
                        StepStats* stats) {
  auto msg = peek_message(tame_cfg, stats ? &stats->tame_reports : nullptr);
  if (stats) stats->message = msg;
  if (t_ >= 1)
    for (auto& p : msg.parfactors) p = retag_parfactor(p, 1, 0);

  FOJTree tree = step_template_;
  for (auto& p : msg.parfactors)
    tree.clusters[tree.in_cluster].local.push_back(std::move(p));

  auto events = resolve_step_events(ev, 1);
  std::vector<ResolvedEvent> all = events;
  all.insert(all.end(), carry_.begin(), carry_.end());
  std::vector<std::vector<Parfactor>> groups;
  groups.reserve(tree.clusters.size());
  for (auto& c : tree.clusters) groups.push_back(std::move(c.local));
  groups = apply_evidence_grouped(groups, all);
  for (std::size_t i = 0; i < groups.size(); ++i)
    tree.clusters[i].local = std::move(groups[i]);
  calibrate(tree);

  tree_ = std::move(tree);
  ++t_;
  carry_.clear();
  std::set<PRV> iface(interface_cur_.begin(), interface_cur_.end());
  for (ResolvedEvent e : events)
    if (iface.count(e.prv)) {
      e.prv.slice = 0;
      carry_.push_back(std::move(e));
    }
  observed_ = std::move(events);
}

std::vector<double> LdjtState::filter(
    const std::string& prv, const std::vector<std::string>& consts) const {
  const int cur = (t_ == 0) ? 0 : 1;
  const PRV* found = nullptr;
  for (const auto& c : tree_.clusters) {
    for (const auto& p : c.prvs)
      if (p.name == prv && p.slice && *p.slice == cur) {
        found = &p;
        break;
      }
    if (found) break;
  }
  if (!found) throw std::invalid_argument("unknown PRV " + prv);
  if (consts.size() != found->logvars.size())
    throw std::invalid_argument("constant arity mismatch for " + prv);
  std::vector<int> idx;
  idx.reserve(consts.size());
  for (std::size_t i = 0; i < consts.size(); ++i)
    idx.push_back(vocab_.constant_index(found->logvars[i], consts[i]));
  for (const auto& e : observed_)
    if (e.prv == *found && e.consts == idx) {
      std::vector<double> point(found->range.size(), 0.0);
      point[e.value] = 1.0;
      return point;
    }
  return tree_marginal(tree_, *found, idx);
}

std::vector<double> LdjtState::answer(const Query& q) const {
  if (q.horizon != t_)
    throw std::invalid_argument("query horizon must match the current step");
  if (q.pi < t_) throw std::invalid_argument("smoothing is not supported");
  if (q.pi == t_) return filter(q.prv, q.consts);
  return predict_many(q.pi, {{q.prv, q.consts}})[0];
}

std::vector<std::vector<double>> LdjtState::predict_many(
    int pi, const std::vector<std::pair<std::string, std::vector<std::string>>>&
                targets) const {
  if (pi < t_) throw std::invalid_argument("smoothing is not supported");
  LdjtState roll = *this;
  while (roll.t_ < pi) roll.advance({});
  std::vector<std::vector<double>> out;
  out.reserve(targets.size());
  for (const auto& [prv, consts] : targets)
    out.push_back(roll.filter(prv, consts));
  return out;
}

std::map<std::string, int> LdjtState::group_count(const ForwardMessage& m) {
  std::map<std::string, std::set<std::vector<std::vector<int>>>> classes;
  for (const auto& p : m.parfactors)
    for (const auto& s : p.constraint.slots)
      classes[s.logvar].insert(p.constraint.projection({s.logvar}));
  std::map<std::string, int> out;
  for (const auto& [lv, cs] : classes) out[lv] = static_cast<int>(cs.size());
  return out;
}

}  // namespace lifted
