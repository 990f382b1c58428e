#pragma once

// Risk-neutral state dynamics dX = k(X) dt + sigma(X) dW on an interval
// (c, d), short rate r(X), initial state xi, and the truncated numerical
// window with its boundary refinement levels.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskbounds/expr.hpp"

namespace riskbounds {

enum class Spacing { Uniform, Logarithmic };

enum class Side { Left, Right };

struct GridPolicy {
  int n_points = 512;
  Spacing spacing = Spacing::Uniform;
  // Number of geometric refinements of x_min toward c and x_max toward d.
  int refinement_levels = 0;
  // Per-level contraction of the distance to a finite boundary (or
  // expansion factor 1/ratio of the distance from xi to an infinite one).
  double refinement_ratio = 0.1;
};

struct Tolerances {
  double slope = 1e-9;
  double lambda = 1e-6;
  double ode_rel = 1e-10;
  double ode_abs = 1e-12;
};

struct McSettings {
  std::int64_t n_paths = 100000;
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t seed = 1;
};

struct ModelConfig {
  std::string name;
  expr::Bindings parameters;
  std::string k;
  std::string sigma;
  std::string rate;
  double c = 0.0;  // may be -inf
  double d = 0.0;  // may be +inf
  double xi = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  GridPolicy grid;
  bool state_is_asset = false;
  Tolerances tolerances;
  McSettings mc;
  bool allow_zero_rate = false;
};

class DiffusionModel {
 public:
  struct Coefficients {
    double k;
    double sigma;
    double rate;
  };

  const ModelConfig& config() const noexcept { return config_; }
  const Tolerances& tolerances() const noexcept { return config_.tolerances; }
  const std::string& name() const noexcept { return config_.name; }

  double xi() const noexcept { return config_.xi; }
  double lower_boundary() const noexcept { return config_.c; }
  double upper_boundary() const noexcept { return config_.d; }
  bool state_is_asset() const noexcept { return config_.state_is_asset; }
  Spacing spacing() const noexcept { return config_.grid.spacing; }

  Coefficients coefficients(double x) const { return {k_(x), sigma_(x), rate_(x)}; }
  const expr::Function& drift() const noexcept { return k_; }
  const expr::Function& volatility() const noexcept { return sigma_; }
  const expr::Function& short_rate() const noexcept { return rate_; }

  // Grid coordinate t: t = x for uniform spacing, t = log x for logarithmic.
  double to_coord(double x) const;
  double from_coord(double t) const;
  // dx/dt at coordinate t.
  double jacobian(double t) const;

  // Full grid: the base window [x_min, x_max] plus all refinement segments.
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ts() const noexcept { return ts_; }
  std::span<const double> k_grid() const noexcept { return k_on_grid_; }
  std::span<const double> sigma_grid() const noexcept { return sigma_on_grid_; }
  std::span<const double> rate_grid() const noexcept { return rate_on_grid_; }
  std::size_t size() const noexcept { return xs_.size(); }
  std::size_t xi_index() const noexcept { return xi_index_; }

  // Half-open index range of the base window (the reporting grid).
  std::size_t interior_begin() const noexcept { return left_index_[0]; }
  std::size_t interior_end() const noexcept { return right_index_[0] + 1; }

  int levels() const noexcept { return config_.grid.refinement_levels; }
  int finest_level() const noexcept { return levels(); }
  // Outermost grid index belonging to the window of `level`.
  std::size_t left_index(int level) const { return left_index_.at(static_cast<std::size_t>(level)); }
  std::size_t right_index(int level) const { return right_index_.at(static_cast<std::size_t>(level)); }
  // Integration domain of `level` in grid coordinates: the window padded by
  // half a cell on each side so that every grid point is strictly interior.
  double domain_lo(int level) const { return domain_lo_.at(static_cast<std::size_t>(level)); }
  double domain_hi(int level) const { return domain_hi_.at(static_cast<std::size_t>(level)); }

  double max_rate() const noexcept { return max_rate_; }

 private:
  friend DiffusionModel build_model(const ModelConfig&);
  ModelConfig config_;
  expr::Function k_, sigma_, rate_;
  std::vector<double> xs_, ts_;
  std::vector<double> k_on_grid_, sigma_on_grid_, rate_on_grid_;
  std::size_t xi_index_ = 0;
  std::vector<std::size_t> left_index_, right_index_;
  std::vector<double> domain_lo_, domain_hi_;
  double max_rate_ = 0.0;
};

// Validates the configuration and samples sigma and r on the full grid.
// Throws ConfigError naming the first violating grid point.
DiffusionModel build_model(const ModelConfig& config);

struct ScaleDensity {
  std::vector<double> log_q;  // log q on the full grid, log q(xi) = 0
  std::vector<double> q;      // exp(log_q); may overflow far from xi
};

// q(x) = exp(-int_xi^x k/sigma^2 dy), by composite Gauss-Legendre
// quadrature over the grid cells, accumulated outward from xi.
ScaleDensity scale_density(const DiffusionModel& model);

}  // namespace riskbounds
