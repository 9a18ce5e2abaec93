#include "chainqfi/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "chainqfi/error.hpp"

namespace chainqfi {

std::size_t FitResult::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  raise(ErrorCode::InvalidArgument, "no fit parameter named '" + std::string(name) + "'");
}

double FitResult::standard_error(std::string_view name) const {
  const auto i = static_cast<Eigen::Index>(index_of(name));
  return std::sqrt(std::max(0.0, covariance(i, i)));
}

std::size_t FitResult::free_count() const {
  return static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), false));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Maps free parameters to an unconstrained internal coordinate.
struct Transform {
  enum class Kind { None, Lower, Upper, Both } kind = Kind::None;
  double lo = 0.0;
  double hi = 0.0;

  static Transform from(const ParameterSpec& p) {
    Transform t;
    if (p.lower && p.upper) {
      if (!(*p.lower < *p.upper))
        raise(ErrorCode::InvalidArgument, "parameter '" + p.name + "' has empty bounds");
      t.kind = Kind::Both;
      t.lo = *p.lower;
      t.hi = *p.upper;
    } else if (p.lower) {
      t.kind = Kind::Lower;
      t.lo = *p.lower;
    } else if (p.upper) {
      t.kind = Kind::Upper;
      t.hi = *p.upper;
    }
    return t;
  }

  double to_internal(double p) const {
    switch (kind) {
      case Kind::None: return p;
      case Kind::Lower: return std::log(p - lo);
      case Kind::Upper: return std::log(hi - p);
      case Kind::Both: {
        const double s = (p - lo) / (hi - lo);
        return std::log(s / (1.0 - s));
      }
    }
    return p;
  }

  double to_external(double u) const {
    switch (kind) {
      case Kind::None: return u;
      case Kind::Lower: return lo + std::exp(u);
      case Kind::Upper: return hi - std::exp(u);
      case Kind::Both: return lo + (hi - lo) / (1.0 + std::exp(-u));
    }
    return u;
  }

  // dp/du
  double derivative(double u) const {
    switch (kind) {
      case Kind::None: return 1.0;
      case Kind::Lower: return std::exp(u);
      case Kind::Upper: return -std::exp(u);
      case Kind::Both: {
        const double e = std::exp(-std::abs(u));
        const double s = 1.0 / (1.0 + e);
        return (hi - lo) * s * (1.0 - s);
      }
    }
    return 1.0;
  }

  bool strictly_inside(double p) const {
    switch (kind) {
      case Kind::None: return true;
      case Kind::Lower: return p > lo;
      case Kind::Upper: return p < hi;
      case Kind::Both: return p > lo && p < hi;
    }
    return true;
  }
};

class Problem {
 public:
  Problem(const ResidualFn& fn, std::size_t m, const std::vector<ParameterSpec>& specs)
      : fn_(fn), m_(m) {
    full_.reserve(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const auto& s = specs[k];
      if (!std::isfinite(s.value))
        raise(ErrorCode::InvalidArgument, "initial value of '" + s.name + "' not finite");
      full_.push_back(s.value);
      if (s.frozen) continue;
      const auto t = Transform::from(s);
      if (!t.strictly_inside(s.value))
        raise(ErrorCode::InvalidArgument,
              "initial value of '" + s.name + "' lies outside its bounds");
      free_index_.push_back(k);
      transforms_.push_back(t);
    }
    residuals_.resize(m_);
  }

  std::size_t n() const { return free_index_.size(); }
  std::size_t m() const { return m_; }

  Eigen::VectorXd initial_internal() const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(n()));
    for (std::size_t j = 0; j < n(); ++j)
      u[static_cast<Eigen::Index>(j)] = transforms_[j].to_internal(full_[free_index_[j]]);
    return u;
  }

  std::vector<double> external(const Eigen::VectorXd& u) const {
    std::vector<double> p = full_;
    for (std::size_t j = 0; j < n(); ++j)
      p[free_index_[j]] = transforms_[j].to_external(u[static_cast<Eigen::Index>(j)]);
    return p;
  }

  double dp_du(const Eigen::VectorXd& u, std::size_t j) const {
    return transforms_[j].derivative(u[static_cast<Eigen::Index>(j)]);
  }

  const std::vector<std::size_t>& free_index() const { return free_index_; }

  // Evaluates residuals; returns false on failure (non-finite or throw).
  bool evaluate(const Eigen::VectorXd& u, Eigen::VectorXd& r, bool rethrow) {
    const auto p = external(u);
    try {
      fn_(std::span<const double>(p), std::span<double>(residuals_));
    } catch (const Error&) {
      if (rethrow) throw;
      return false;
    }
    r = Eigen::Map<const Eigen::VectorXd>(residuals_.data(), static_cast<Eigen::Index>(m_));
    if (!r.allFinite()) {
      if (rethrow)
        raise(ErrorCode::FitDiverged, "residuals are not finite at the initial point");
      return false;
    }
    return true;
  }

  double cost_at(const Eigen::VectorXd& u) {
    Eigen::VectorXd r;
    if (!evaluate(u, r, false)) return kInf;
    return 0.5 * r.squaredNorm();
  }

  // Forward-difference Jacobian in internal coordinates.
  bool jacobian(const Eigen::VectorXd& u, const Eigen::VectorXd& r0, Eigen::MatrixXd& jac) {
    const auto nn = static_cast<Eigen::Index>(n());
    jac.resize(static_cast<Eigen::Index>(m_), nn);
    Eigen::VectorXd r;
    for (Eigen::Index j = 0; j < nn; ++j) {
      Eigen::VectorXd up = u;
      const double h = std::max(1e-7 * std::abs(u[j]), 1e-10);
      up[j] += h;
      const double hh = up[j] - u[j];
      if (!evaluate(up, r, false)) {
        up[j] = u[j] - h;
        if (!evaluate(up, r, false)) return false;
        jac.col(j) = (r0 - r) / (u[j] - up[j]);
        continue;
      }
      jac.col(j) = (r - r0) / hh;
    }
    return true;
  }

 private:
  const ResidualFn& fn_;
  std::size_t m_;
  std::vector<double> full_;
  std::vector<std::size_t> free_index_;
  std::vector<Transform> transforms_;
  std::vector<double> residuals_;
};

bool normal_matrix_singular(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd d = a.diagonal();
  if ((d.array() <= 0.0).any() || !a.allFinite()) return true;
  const Eigen::VectorXd inv_sqrt = d.array().rsqrt();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() < 1e-13 * es.eigenvalues().maxCoeff();
}

struct MinimizerState {
  Eigen::VectorXd u;
  double cost = kInf;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

MinimizerState nelder_mead(Problem& prob, Eigen::VectorXd start, const FitOptions& opt) {
  const auto n = static_cast<Eigen::Index>(prob.n());
  MinimizerState st;
  st.u = std::move(start);
  st.cost = prob.cost_at(st.u);
  st.history.push_back(st.cost);

  const int max_evals = 4000 * static_cast<int>(n + 1);
  for (int restart = 0; restart < 3; ++restart) {
    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), st.u);
    std::vector<double> f(static_cast<std::size_t>(n + 1), st.cost);
    for (Eigen::Index j = 0; j < n; ++j) {
      auto& v = simplex[static_cast<std::size_t>(j + 1)];
      v[j] += (v[j] != 0.0) ? 0.05 * std::abs(v[j]) : 0.00025;
      f[static_cast<std::size_t>(j + 1)] = prob.cost_at(v);
    }
    int evals = 0;
    bool done = false;
    while (evals < max_evals) {
      std::vector<std::size_t> order(simplex.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
      std::vector<Eigen::VectorXd> s2;
      std::vector<double> f2;
      for (auto k : order) {
        s2.push_back(simplex[k]);
        f2.push_back(f[k]);
      }
      simplex.swap(s2);
      f.swap(f2);

      const double spread = std::abs(f.back() - f.front());
      double size = 0.0;
      for (std::size_t k = 1; k < simplex.size(); ++k)
        size = std::max(size, (simplex[k] - simplex[0]).lpNorm<Eigen::Infinity>());
      const double scale = std::max(1.0, simplex[0].lpNorm<Eigen::Infinity>());
      if (spread <= opt.nelder_mead_tolerance * (std::abs(f.front()) + 1e-300) ||
          size <= opt.nelder_mead_tolerance * scale) {
        done = true;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t k = 0; k + 1 < simplex.size(); ++k) centroid += simplex[k];
      centroid /= static_cast<double>(n);
      const auto& worst = simplex.back();

      const Eigen::VectorXd xr = centroid + (centroid - worst);
      const double fr = prob.cost_at(xr);
      ++evals;
      if (fr < f.front()) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
        const double fe = prob.cost_at(xe);
        ++evals;
        if (fe < fr) {
          simplex.back() = xe;
          f.back() = fe;
        } else {
          simplex.back() = xr;
          f.back() = fr;
        }
      } else if (fr < f[f.size() - 2]) {
        simplex.back() = xr;
        f.back() = fr;
      } else {
        const bool outside = fr < f.back();
        const Eigen::VectorXd xc =
            outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                    : Eigen::VectorXd(centroid + 0.5 * (worst - centroid));
        const double fc = prob.cost_at(xc);
        ++evals;
        if (fc < (outside ? fr : f.back())) {
          simplex.back() = xc;
          f.back() = fc;
        } else {
          for (std::size_t k = 1; k < simplex.size(); ++k) {
            simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0]);
            f[k] = prob.cost_at(simplex[k]);
            ++evals;
          }
        }
      }
      ++st.iterations;
      if (f.front() < st.history.back()) st.history.push_back(f.front());
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(f.begin(), f.end()) - f.begin());
    const bool improved = f[best] < st.cost;
    st.u = simplex[best];
    st.cost = f[best];
    st.converged = done;
    if (!improved && done) break;
  }
  return st;
}

MinimizerState levenberg_marquardt(Problem& prob, Eigen::VectorXd u, const FitOptions& opt,
                                   bool allow_fallback, bool& singular_start) {
  MinimizerState st;
  Eigen::VectorXd r;
  prob.evaluate(u, r, true);
  double cost = 0.5 * r.squaredNorm();
  st.history.push_back(cost);

  Eigen::MatrixXd jac;
  if (!prob.jacobian(u, r, jac))
    raise(ErrorCode::FitDiverged, "Jacobian could not be evaluated at the initial point");
  Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;

  singular_start = normal_matrix_singular(a);
  if (singular_start && allow_fallback) {
    st.u = u;
    st.cost = cost;
    return st;
  }

  double lambda = opt.initial_damping * std::max(a.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;
  const auto n = static_cast<Eigen::Index>(prob.n());

  while (st.iterations < opt.max_iterations) {
    if (cost == 0.0 || g.lpNorm<Eigen::Infinity>() == 0.0) {
      st.converged = true;
      break;
    }
    Eigen::VectorXd d = a.diagonal().cwiseMax(1e-300);
    Eigen::MatrixXd damped = a;
    damped.diagonal() += lambda * d;
    const Eigen::VectorXd step = damped.ldlt().solve(-g);
    if (!step.allFinite()) raise(ErrorCode::FitDiverged, "damped normal equations unsolvable");

    if (step.norm() <= opt.step_tolerance * (u.norm() + opt.step_tolerance)) {
      st.converged = true;
      break;
    }

    const Eigen::VectorXd u_new = u + step;
    Eigen::VectorXd r_new;
    const bool ok = prob.evaluate(u_new, r_new, false);
    const double cost_new = ok ? 0.5 * r_new.squaredNorm() : kInf;

    if (ok && cost_new < cost) {
      const double predicted = 0.5 * step.dot(lambda * d.cwiseProduct(step) - g);
      const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : 1.0;
      const double rel_decrease = (cost - cost_new) / cost;
      u = u_new;
      r = r_new;
      cost = cost_new;
      ++st.iterations;
      st.history.push_back(cost);
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (rel_decrease < opt.cost_tolerance || cost == 0.0) {
        st.converged = true;
        break;
      }
      if (!prob.jacobian(u, r, jac))
        raise(ErrorCode::FitDiverged, "Jacobian evaluation failed after an accepted step");
      a = jac.transpose() * jac;
      g = jac.transpose() * r;
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (!std::isfinite(lambda) || lambda > 1e300)
        raise(ErrorCode::FitDiverged, "damping parameter overflowed");
    }
  }
  (void)n;
  st.u = u;
  st.cost = cost;
  return st;
}

}  // namespace

FitResult least_squares(const ResidualFn& residual_fn, std::size_t n_residuals,
                        const std::vector<ParameterSpec>& params, const FitOptions& options) {
  Problem prob(residual_fn, n_residuals, params);
  if (prob.n() == 0) raise(ErrorCode::InvalidArgument, "no free parameters to fit");
  if (n_residuals < prob.n())
    raise(ErrorCode::InvalidArgument, "fewer residuals than free parameters");

  bool singular_start = false;
  MinimizerState st = levenberg_marquardt(prob, prob.initial_internal(), options,
                                          options.nelder_mead_fallback, singular_start);
  std::string method = "levenberg-marquardt";
  if (singular_start && options.nelder_mead_fallback) {
    MinimizerState nm = nelder_mead(prob, st.u, options);
    method = "nelder-mead";
    // Polish with LM when the Jacobian has become regular.
    bool still_singular = false;
    MinimizerState polish;
    bool polished = false;
    try {
      polish = levenberg_marquardt(prob, nm.u, options, true, still_singular);
      polished = !still_singular;
    } catch (const Error&) {
      polished = false;
    }
    if (polished && polish.cost <= nm.cost) {
      polish.iterations += nm.iterations;
      nm.history.insert(nm.history.end(), polish.history.begin() + 1, polish.history.end());
      polish.history = std::move(nm.history);
      st = std::move(polish);
      method = "nelder-mead+levenberg-marquardt";
    } else {
      st = std::move(nm);
    }
  }

  // Covariance in the natural parameters via the chain rule.
  Eigen::VectorXd r;
  prob.evaluate(st.u, r, true);
  Eigen::MatrixXd jac;
  if (!prob.jacobian(st.u, r, jac))
    raise(ErrorCode::FitDiverged, "Jacobian could not be evaluated at the optimum");
  for (std::size_t j = 0; j < prob.n(); ++j)
    jac.col(static_cast<Eigen::Index>(j)) /= prob.dp_du(st.u, j);
  const Eigen::MatrixXd a = jac.transpose() * jac;
  if (normal_matrix_singular(a))
    raise(ErrorCode::SingularJacobian,
          "J^T J is singular at the optimum; some free parameters are not identifiable");

  const double m = static_cast<double>(n_residuals);
  const double nf = static_cast<double>(prob.n());
  const double chi2 = r.squaredNorm();
  FitResult out;
  out.reduced_chi2 = n_residuals > prob.n() ? chi2 / (m - nf) : 0.0;
  const double scale = n_residuals > prob.n() ? out.reduced_chi2 : 1.0;
  Eigen::MatrixXd cov_free = a.ldlt().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  cov_free = (0.5 * scale * (cov_free + cov_free.transpose())).eval();

  const auto np = static_cast<Eigen::Index>(params.size());
  out.covariance = Eigen::MatrixXd::Zero(np, np);
  const auto& idx = prob.free_index();
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      out.covariance(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j])) =
          cov_free(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  out.values = prob.external(st.u);
  for (const auto& p : params) {
    out.names.push_back(p.name);
    out.frozen.push_back(p.frozen);
  }
  out.residual_norm = std::sqrt(chi2);
  out.iterations = st.iterations;
  out.converged = st.converged;
  out.method = std::move(method);
  out.n_residuals = n_residuals;
  out.cost_history = std::move(st.history);
  return out;
}

}  // namespace chainqfi
