#pragma once

// Shooting integrator for 1/2 sigma^2 h'' + k h' - r h = -lambda h.
//
// The linear system (h, dh/dt) is integrated in grid coordinates with an
// 8th order Dormand-Prince pair.  Whenever the state drifts far from unit
// magnitude it is rescaled by an exact power of two, so w = h'/h is
// unaffected bit for bit and log h carries the accumulated scale.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "riskbounds/model.hpp"

namespace riskbounds {

enum class Direction { Left, Right };

struct SolutionProfile {
  double lambda = 0.0;
  double slope0 = 0.0;          // h'(xi), with h(xi) = 1
  std::vector<double> xs;       // full model grid
  std::vector<double> log_h;    // log |h|; -inf at an exact zero
  std::vector<double> w;        // h'/h per unit of x
  std::optional<double> horizon_left;   // first zero left of xi
  std::optional<double> horizon_right;  // first zero right of xi

  bool positive() const noexcept { return !horizon_left && !horizon_right; }
  // True when h has no zero inside [xs[lo], xs[hi]].
  bool positive_on(std::size_t lo, std::size_t hi) const;
};

struct IntegratorOptions {
  // (h, h') is rescaled once max(|h|, |h'|) leaves [2^-e, 2^e].
  int renormalize_exponent = 498;
};

// Integrates outward from xi over the whole grid with h(xi) = 1,
// h'(xi) = slope0.  Zero crossings are recorded, not fatal.
SolutionProfile integrate_solution(const DiffusionModel& model, double lambda, double slope0,
                                   const IntegratorOptions& options = {});

// Same flow restarted at grid point `index` with h = 1 and h'/h = w0.  The
// returned profile is normalised at that point, not at xi.
SolutionProfile integrate_from(const DiffusionModel& model, double lambda, std::size_t index,
                               double w0, const IntegratorOptions& options = {});

// Solution vanishing at the padded end of the finest window on `side`,
// integrated across the grid and normalised at xi.  This is the numerically
// stable way to obtain the solution that is recessive toward that boundary.
// Throws EmptyCandidateSet when it does not reach xi positively.  A
// non-negative `level` shoots from that coarser window instead; grid points
// beyond it then lie past the recorded horizon.
SolutionProfile boundary_shot(const DiffusionModel& model, double lambda, Side side,
                              const IntegratorOptions& options = {}, int level = -1);

// First zero of h in `direction` within the window of `level` (finest when
// negative), located by bisection on single steps.
std::optional<double> positivity_horizon(const DiffusionModel& model, double lambda, double slope0,
                                         Direction direction, int level = -1);

// Sign test only: whether h stays positive through the window edge.
bool stays_positive(const DiffusionModel& model, double lambda, double slope0,
                    Direction direction, int level);

struct ResidualReport {
  std::size_t checked = 0;
  double worst = 0.0;     // max residual / scale
  double worst_x = 0.0;
};

// Residual of the equation at every grid point where h is finite and non
// zero.  h'' is the central difference of h' between two short re-steps of
// the flow from the stored state; the residual is measured against
// tol * ((|lambda| + max r)|h| + |1/2 sigma^2 h''| + |k h'|).
ResidualReport residual_check(const DiffusionModel& model, const SolutionProfile& profile);

// Every profile built while an observer is installed is passed to it.
using ProfileObserver = std::function<void(const DiffusionModel&, const SolutionProfile&)>;

class ScopedProfileObserver {
 public:
  explicit ScopedProfileObserver(ProfileObserver observer);
  ~ScopedProfileObserver();
  ScopedProfileObserver(const ScopedProfileObserver&) = delete;
  ScopedProfileObserver& operator=(const ScopedProfileObserver&) = delete;

 private:
  ProfileObserver previous_;
};

void notify_profile(const DiffusionModel& model, const SolutionProfile& profile);

}  // namespace riskbounds
