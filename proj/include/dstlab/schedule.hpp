#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dstlab/common.hpp"

namespace dstlab {

// Prune-fraction schedules. t counts optimizer steps from 1.
//   cosine    rho_t = rho/2 * (1 + cos(t*pi/T)) for t <= T, 0 afterwards
//   linear    rho_t = rho * factor^floor(t/every)
//   constant  rho_t = rho
struct PruneSchedule {
  enum class Kind { Cosine, Linear, Constant };
  Kind kind = Kind::Cosine;
  double rho = 0.5;
  uint64_t T = 1;          // cosine stop iteration
  double factor = 0.99;    // linear decay multiplier
  uint64_t every = 600;    // linear decay interval in optimizer steps

  static PruneSchedule cosine(double rho, uint64_t T) {
    return {Kind::Cosine, rho, T, 0.99, 600};
  }
  static PruneSchedule linear(double rho, double factor = 0.99, uint64_t every = 600) {
    return {Kind::Linear, rho, 1, factor, every};
  }
  static PruneSchedule constant(double rho) { return {Kind::Constant, rho, 1, 0.99, 600}; }
};

inline double prune_fraction_at(const PruneSchedule& s, uint64_t t) {
  switch (s.kind) {
    case PruneSchedule::Kind::Cosine: {
      if (t > s.T) return 0.0;
      const double x = static_cast<double>(t) * 3.14159265358979323846 / static_cast<double>(s.T);
      return 0.5 * s.rho * (1.0 + std::cos(x));
    }
    case PruneSchedule::Kind::Linear:
      return s.rho * std::pow(s.factor, static_cast<double>(t / s.every));
    case PruneSchedule::Kind::Constant:
      return s.rho;
  }
  return 0.0;
}

// Topology updates fire every `every` steps until `stop`; every == 0 disables
// them entirely (static sparse training).
struct UpdateCadence {
  uint64_t every = 800;
  uint64_t stop = UINT64_MAX;
};

inline bool is_update_step(const UpdateCadence& c, uint64_t t) {
  return c.every != 0 && t % c.every == 0 && t <= c.stop;
}

// Step decay at fractional milestones of the epoch budget.
struct LrSchedule {
  double base = 0.01;
  std::vector<double> milestones = {0.5, 0.75};
  double decay = 0.1;
};

inline double lr_at(const LrSchedule& s, uint64_t epoch, uint64_t total_epochs) {
  int passed = 0;
  for (double m : s.milestones)
    if (static_cast<double>(epoch) >= m * static_cast<double>(total_epochs)) ++passed;
  return s.base * std::pow(s.decay, passed);
}

}  // namespace dstlab
