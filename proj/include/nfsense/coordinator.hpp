// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nfsense/capacity.hpp"
#include "nfsense/geometry.hpp"
#include "nfsense/scene.hpp"
#include "nfsense/traffic.hpp"

namespace nfsense {

struct Registration {
  std::string user_id;
  Point2D ue;
  Point2D subject;
  MotionKind motion = MotionKind::respiration;
  TrafficKind strategy = TrafficKind::ul_csi;
  /// Motion intensity used in the VIR terms.
  double intensity = 1.0;

  friend bool operator==(const Registration&, const Registration&) = default;
};

/// Low-pass cutoff the pipeline uses for a motion type: 1 Hz for breathing
/// (and still subjects), 20 Hz for gestures and activity.
double cutoff_for(MotionKind motion);

struct Decision {
  bool admitted = false;
  /// Empty when admitted; otherwise starts with "pairwise VIR", "aggregate VIR"
  /// or "capacity".
  std::string reason;
};

/// Admitted users satisfy, for every member, pairwise VIR >= beta against
/// each other member alone and VIR >= beta against all other members at once.
/// Mutations are single-writer.
class Registry {
 public:
  Registry(RadioConfig cfg, Point2D ap, double beta, std::optional<CapacityQuery> capacity = std::nullopt,
           FitParams fit = {});

  /// Throws std::invalid_argument on a duplicate user_id.
  Decision register_user(const Registration& reg);
  /// Throws std::invalid_argument for an unknown id.
  void deregister(const std::string& user_id);

  const std::vector<Registration>& admitted() const { return admitted_; }
  double beta() const { return beta_; }
  /// Fitted n_max of the capacity envelope; nullopt when no envelope is set.
  std::optional<int> capacity_limit() const;
  /// Re-checks the registry invariant.
  bool invariant_holds() const;

  friend bool operator==(const Registry& a, const Registry& b) { return a.admitted_ == b.admitted_; }

 private:
  double vir_of(const Registration& target, const std::vector<const Registration*>& others) const;

  RadioConfig cfg_;
  Point2D ap_;
  double beta_;
  std::optional<CapacityQuery> capacity_;
  FitParams fit_;
  std::vector<Registration> admitted_;
};

/// CSV `user_id,ue_x,ue_y,subject_x,subject_y,motion,strategy,f_cut_hz`.
void write_registry_csv(std::ostream& os, const Registry& registry);

}  // namespace nfsense
