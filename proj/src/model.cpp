#include "riskbounds/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "riskbounds/quadrature.hpp"

namespace riskbounds {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double forward(Spacing s, double x) { return s == Spacing::Logarithmic ? std::log(x) : x; }
double backward(Spacing s, double t) { return s == Spacing::Logarithmic ? std::exp(t) : t; }

// Refined window edge toward boundary `b` (finite or infinite).
double refine(double edge, double xi, double boundary, double ratio, int level) {
  if (std::isfinite(boundary)) return boundary + (edge - boundary) * std::pow(ratio, level);
  return xi + (edge - xi) / std::pow(ratio, level);
}

void append_uniform(std::vector<double>& ts, double from, double to, int cells) {
  for (int i = 1; i < cells; ++i) ts.push_back(from + (to - from) * i / cells);
  ts.push_back(to);
}

expr::Function compile(const std::string& name, const std::string& text,
                       const ModelConfig& config) {
  if (text.empty()) throw ConfigError("missing expression for " + name);
  std::set<std::string, std::less<>> names;
  for (const auto& [key, value] : config.parameters) names.insert(key);
  try {
    return expr::Function(expr::parse(text, names), config.parameters);
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

}  // namespace

double DiffusionModel::to_coord(double x) const { return forward(spacing(), x); }
double DiffusionModel::from_coord(double t) const { return backward(spacing(), t); }
double DiffusionModel::jacobian(double t) const {
  return spacing() == Spacing::Logarithmic ? std::exp(t) : 1.0;
}

DiffusionModel build_model(const ModelConfig& config) {
  const double c = config.c, d = config.d, xi = config.xi;
  const GridPolicy& g = config.grid;
  if (std::isnan(c) || std::isnan(d) || !(c < d)) throw ConfigError("malformed interval: need c < d");
  if (!std::isfinite(xi) || !(c < xi && xi < d)) throw ConfigError("xi must lie strictly inside (c, d)");
  if (!std::isfinite(config.x_min) || !std::isfinite(config.x_max))
    throw ConfigError("truncation bounds must be finite");
  if (!(c < config.x_min && config.x_min < xi && xi < config.x_max && config.x_max < d))
    throw ConfigError("truncation must satisfy c < x_min < xi < x_max < d (xi=" + fmt(xi) +
                      ", window [" + fmt(config.x_min) + ", " + fmt(config.x_max) + "])");
  if (g.n_points < 64) throw ConfigError("grid.n_points must be at least 64");
  if (g.refinement_levels < 0) throw ConfigError("grid.refinement_levels must be non-negative");
  if (!(g.refinement_ratio > 0.0 && g.refinement_ratio < 1.0))
    throw ConfigError("grid.refinement_ratio must lie in (0, 1)");
  if (g.spacing == Spacing::Logarithmic && !(c >= 0.0))
    throw ConfigError("logarithmic spacing needs an interval inside (0, inf)");
  const Tolerances& tol = config.tolerances;
  if (!(tol.slope > 0 && tol.lambda > 0 && tol.ode_rel > 0 && tol.ode_abs > 0))
    throw ConfigError("tolerances must be positive");

  DiffusionModel m;
  m.config_ = config;
  m.k_ = compile("k", config.k, config);
  m.sigma_ = compile("sigma", config.sigma, config);
  m.rate_ = compile("rate", config.rate, config);

  const Spacing sp = g.spacing;
  const int levels = g.refinement_levels;
  const double t_min = forward(sp, config.x_min), t_xi = forward(sp, xi),
               t_max = forward(sp, config.x_max);
  const int cells = g.n_points - 1;
  int left_cells = static_cast<int>(std::lround(cells * (t_xi - t_min) / (t_max - t_min)));
  left_cells = std::clamp(left_cells, 1, cells - 1);
  const int right_cells = cells - left_cells;
  const int seg_cells = std::max(32, g.n_points / 2);

  std::vector<double> edges_left, edges_right;  // a_j, b_j
  for (int j = 0; j <= levels; ++j) {
    edges_left.push_back(refine(config.x_min, xi, c, g.refinement_ratio, j));
    edges_right.push_back(refine(config.x_max, xi, d, g.refinement_ratio, j));
  }
  for (int j = 1; j <= levels; ++j) {
    const double a = edges_left[static_cast<std::size_t>(j)], b = edges_right[static_cast<std::size_t>(j)];
    if (!std::isfinite(a) || !std::isfinite(b) || !(a > c) || !(b < d) ||
        (sp == Spacing::Logarithmic && !(a > 0.0)))
      throw ConfigError("refinement level " + std::to_string(j) + " leaves the representable range");
  }

  std::vector<double>& ts = m.ts_;
  ts.push_back(forward(sp, edges_left.back()));
  for (int j = levels; j >= 1; --j)
    append_uniform(ts, ts.back(), forward(sp, edges_left[static_cast<std::size_t>(j - 1)]), seg_cells);
  append_uniform(ts, t_min, t_xi, left_cells);
  m.xi_index_ = ts.size() - 1;
  append_uniform(ts, t_xi, t_max, right_cells);
  for (int j = 1; j <= levels; ++j)
    append_uniform(ts, ts.back(), forward(sp, edges_right[static_cast<std::size_t>(j)]), seg_cells);

  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1])) throw ConfigError("degenerate grid (coincident points)");

  m.xs_.resize(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) m.xs_[i] = backward(sp, ts[i]);
  m.xs_[m.xi_index_] = xi;

  const std::size_t base_left = m.xi_index_ - static_cast<std::size_t>(left_cells);
  const std::size_t base_right = m.xi_index_ + static_cast<std::size_t>(right_cells);
  m.xs_[base_left] = config.x_min;
  m.xs_[base_right] = config.x_max;
  for (int j = 0; j <= levels; ++j) {
    const std::size_t off = static_cast<std::size_t>(j * seg_cells);
    m.left_index_.push_back(base_left - off);
    m.right_index_.push_back(base_right + off);
    m.xs_[base_left - off] = edges_left[static_cast<std::size_t>(j)];
    m.xs_[base_right + off] = edges_right[static_cast<std::size_t>(j)];
  }

  const double t_c = std::isfinite(c) && (sp == Spacing::Uniform || c > 0.0) ? forward(sp, c) : -INFINITY;
  const double t_d = std::isfinite(d) ? forward(sp, d) : INFINITY;
  for (int j = 0; j <= levels; ++j) {
    const std::size_t li = m.left_index_[static_cast<std::size_t>(j)];
    const std::size_t ri = m.right_index_[static_cast<std::size_t>(j)];
    double lo = ts[li] - 0.5 * (ts[li + 1] - ts[li]);
    double hi = ts[ri] + 0.5 * (ts[ri] - ts[ri - 1]);
    if (!(lo > t_c)) lo = 0.5 * (ts[li] + t_c);
    if (!(hi < t_d)) hi = 0.5 * (ts[ri] + t_d);
    m.domain_lo_.push_back(lo);
    m.domain_hi_.push_back(hi);
  }

  // Sample the coefficients; every grid point and both padded domain ends
  // must satisfy the positivity assumptions.
  const std::size_t n = m.xs_.size();
  m.k_on_grid_.resize(n);
  m.sigma_on_grid_.resize(n);
  m.rate_on_grid_.resize(n);
  std::vector<double> scratch;
  try {
    m.k_.eval_batch(m.xs_, m.k_on_grid_, scratch);
    m.sigma_.eval_batch(m.xs_, m.sigma_on_grid_, scratch);
    m.rate_.eval_batch(m.xs_, m.rate_on_grid_, scratch);
  } catch (const expr::DomainError& e) {
    throw ConfigError(std::string("coefficient not defined on the grid: ") + e.what());
  }

  auto check = [&](double x, double kv, double sv, double rv) {
    if (!std::isfinite(kv)) throw ConfigError("k(" + fmt(x) + ") is not finite at grid point x=" + fmt(x));
    if (!(sv > 0.0) || !std::isfinite(sv))
      throw ConfigError("sigma(" + fmt(x) + ")=" + fmt(sv) + " is not positive at grid point x=" + fmt(x));
    if (!std::isfinite(rv)) throw ConfigError("rate(" + fmt(x) + ") is not finite at grid point x=" + fmt(x));
    if (config.allow_zero_rate) {
      if (rv < 0.0)
        throw ConfigError("rate(" + fmt(x) + ")=" + fmt(rv) + " is negative at grid point x=" + fmt(x));
    } else if (!(rv > 0.0)) {
      throw ConfigError("rate(" + fmt(x) + ")=" + fmt(rv) +
                        " is not positive at grid point x=" + fmt(x) +
                        " (a zero rate needs --allow-zero-rate)");
    }
  };
  // The initial state first: a violation there is the most telling one.
  const std::size_t at_xi = m.xi_index_;
  check(m.xs_[at_xi], m.k_on_grid_[at_xi], m.sigma_on_grid_[at_xi], m.rate_on_grid_[at_xi]);
  for (std::size_t i = 0; i < n; ++i) check(m.xs_[i], m.k_on_grid_[i], m.sigma_on_grid_[i], m.rate_on_grid_[i]);
  for (double t : {m.domain_lo_.back(), m.domain_hi_.back()}) {
    const double x = backward(sp, t);
    try {
      check(x, m.k_(x), m.sigma_(x), m.rate_(x));
    } catch (const expr::DomainError& e) {
      throw ConfigError(std::string("coefficient not defined at the window edge: ") + e.what());
    }
  }
  m.max_rate_ = *std::max_element(m.rate_on_grid_.begin(), m.rate_on_grid_.end());
  return m;
}

ScaleDensity scale_density(const DiffusionModel& model) {
  const auto ts = model.ts();
  const std::size_t n = ts.size();
  const auto& rule = quad::gauss_legendre(5);
  auto cell = [&](std::size_t i) {
    const double a = ts[i], b = ts[i + 1], half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = mid + half * rule.nodes[q];
      const double x = model.from_coord(t);
      const auto co = model.coefficients(x);
      sum += rule.weights[q] * co.k / (co.sigma * co.sigma) * model.jacobian(t);
    }
    const double v = half * sum;
    if (!std::isfinite(v))
      throw NumericalError("scale density: non-finite integrand near x=" + fmt(model.from_coord(mid)),
                           model.from_coord(mid));
    return v;
  };
  ScaleDensity out;
  out.log_q.assign(n, 0.0);
  const std::size_t xi = model.xi_index();
  for (std::size_t i = xi; i + 1 < n; ++i) out.log_q[i + 1] = out.log_q[i] - cell(i);
  for (std::size_t i = xi; i > 0; --i) out.log_q[i - 1] = out.log_q[i] + cell(i - 1);
  out.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.q[i] = std::exp(out.log_q[i]);
  return out;
}

}  // namespace riskbounds
