// SPDX-License-Identifier: Apache-2.0
#include "nfsense/coordinator.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "nfsense/text_io.hpp"

namespace nfsense {

double cutoff_for(MotionKind motion) {
  switch (motion) {
    case MotionKind::gesture_like:
    case MotionKind::activity_like:
      return 20.0;
    default:
      return 1.0;
  }
}

Registry::Registry(RadioConfig cfg, Point2D ap, double beta, std::optional<CapacityQuery> capacity, FitParams fit)
    : cfg_(cfg), ap_(ap), beta_(beta), capacity_(std::move(capacity)), fit_(fit) {
  cfg_.validate();
  if (!(beta_ > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (capacity_) capacity_->validate();
}

std::optional<int> Registry::capacity_limit() const {
  if (!capacity_) return std::nullopt;
  CapacityQuery q = *capacity_;
  q.cfg = cfg_;
  q.beta = beta_;
  return n_max(q, fit_);
}

double Registry::vir_of(const Registration& target, const std::vector<const Registration*>& others) const {
  std::vector<Mover> movers;
  for (const Registration* o : others) movers.push_back({o->subject, o->intensity});
  return vir(cfg_, ap_, target.ue, Mover{target.subject, target.intensity}, movers);
}

Decision Registry::register_user(const Registration& reg) {
  if (reg.user_id.empty()) throw std::invalid_argument("registration needs a user_id");
  if (!(reg.intensity > 0.0)) throw std::invalid_argument("registration intensity must be > 0");
  for (const Registration& r : admitted_)
    if (r.user_id == reg.user_id) throw std::invalid_argument("duplicate user_id: " + reg.user_id);

  // Pairwise checks first: they name the offending pair.
  for (const Registration& r : admitted_) {
    const double own = vir_of(reg, {&r});
    if (own < beta_) {
      return {false, "pairwise VIR: " + reg.user_id + " vs " + r.user_id + " = " + format_double(own)};
    }
    const double victim = vir_of(r, {&reg});
    if (victim < beta_) {
      return {false, "pairwise VIR: " + r.user_id + " vs " + reg.user_id + " = " + format_double(victim)};
    }
  }

  std::vector<const Registration*> all;
  for (const Registration& r : admitted_) all.push_back(&r);
  const double own = vir_of(reg, all);
  if (own < beta_) return {false, "aggregate VIR: " + reg.user_id + " = " + format_double(own)};
  for (const Registration& r : admitted_) {
    std::vector<const Registration*> others{&reg};
    for (const Registration& o : admitted_)
      if (&o != &r) others.push_back(&o);
    const double v = vir_of(r, others);
    if (v < beta_) return {false, "aggregate VIR: " + r.user_id + " = " + format_double(v)};
  }

  // The capacity bound is derived for rings of at least 3 subjects.
  if (const auto limit = capacity_limit(); limit && admitted_.size() + 1 >= 3) {
    if (static_cast<int>(admitted_.size()) + 1 > *limit) {
      return {false, "capacity: " + std::to_string(admitted_.size() + 1) + " users exceed n_max " +
                         std::to_string(*limit)};
    }
  }
  admitted_.push_back(reg);
  return {true, {}};
}

void Registry::deregister(const std::string& user_id) {
  const auto it =
      std::find_if(admitted_.begin(), admitted_.end(), [&](const Registration& r) { return r.user_id == user_id; });
  if (it == admitted_.end()) throw std::invalid_argument("unknown user_id: " + user_id);
  admitted_.erase(it);
}

bool Registry::invariant_holds() const {
  for (const Registration& a : admitted_) {
    std::vector<const Registration*> others;
    for (const Registration& b : admitted_) {
      if (&a == &b) continue;
      if (vir_of(a, {&b}) < beta_) return false;
      others.push_back(&b);
    }
    if (!others.empty() && vir_of(a, others) < beta_) return false;
  }
  return true;
}

void write_registry_csv(std::ostream& os, const Registry& registry) {
  os << "user_id,ue_x,ue_y,subject_x,subject_y,motion,strategy,f_cut_hz\n";
  for (const Registration& r : registry.admitted()) {
    os << r.user_id << ',' << format_double(r.ue.x) << ',' << format_double(r.ue.y) << ',' << format_double(r.subject.x)
       << ',' << format_double(r.subject.y) << ',' << to_string(r.motion) << ',' << to_string(r.strategy) << ','
       << format_double(cutoff_for(r.motion)) << '\n';
  }
}

}  // namespace nfsense
