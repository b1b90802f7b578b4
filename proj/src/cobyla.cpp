#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "qens/error.hpp"
#include "qens/optimize.hpp"

namespace qens {

namespace detail {

double EvaluationLog::operator()(std::span<const double> x) {
  double v = f_(x);
  if (count_ == 0 && !std::isfinite(v)) {
    throw Error(ErrorCategory::input, "objective is not finite at the starting point");
  }
  if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
  if (count_ == 0 || v < best_f_) {
    best_f_ = v;
    best_x_.assign(x.begin(), x.end());
  }
  ++count_;
  trace_.push_back(best_f_);
  return v;
}

OptimizeResult EvaluationLog::finish(bool converged) && {
  return OptimizeResult{std::move(best_x_), best_f_, count_, converged, std::move(trace_)};
}

}  // namespace detail

std::string_view optimizer_name(OptimizerKind k) noexcept {
  return k == OptimizerKind::Cobyla ? "cobyla" : "nelder-mead";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "cobyla") return OptimizerKind::Cobyla;
  if (s == "nelder-mead" || s == "nelder_mead" || s == "neldermead") return OptimizerKind::NelderMead;
  throw Error(ErrorCategory::configuration, "unknown optimizer '" + std::string(name) + "'");
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Simplex acceptability constants from Powell's COBYLA.
constexpr double kAlpha = 0.25;  // minimum vertex distance from the opposite face, in rho
constexpr double kBeta = 2.1;    // maximum edge length from the pole, in rho
constexpr double kGamma = 0.5;   // geometry step length, in rho
constexpr double kPoorRatio = 0.1;

struct Simplex {
  std::vector<Vec> x;  // n + 1 vertices
  std::vector<double> f;

  int pole() const {
    return static_cast<int>(std::min_element(f.begin(), f.end()) - f.begin());
  }
};

double eval_at(detail::EvaluationLog& log, const Vec& x) {
  return log(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

}  // namespace

OptimizeResult minimize_cobyla(const Objective& f, std::span<const double> x0,
                               const OptimizerOptions& opts) {
  if (opts.max_evaluations < 1) throw Error(ErrorCategory::parameter, "evaluation budget must be >= 1");
  if (!(opts.rho_begin > 0.0) || !(opts.rho_end > 0.0) || opts.rho_end > opts.rho_begin) {
    throw Error(ErrorCategory::parameter, "need 0 < rho_end <= rho_begin");
  }
  const int n = static_cast<int>(x0.size());
  detail::EvaluationLog log(f, opts.max_evaluations);
  Vec start = Eigen::Map<const Vec>(x0.data(), n);

  Simplex s;
  s.x.push_back(start);
  s.f.push_back(eval_at(log, start));
  if (n == 0) return std::move(log).finish(true);

  double rho = opts.rho_begin;
  for (int i = 0; i < n && !log.exhausted(); ++i) {
    Vec v = start;
    v[i] += rho;
    s.x.push_back(v);
    s.f.push_back(eval_at(log, v));
  }
  if (static_cast<int>(s.x.size()) < n + 1) return std::move(log).finish(false);

  bool converged = false;
  auto shrink = [&]() -> bool {
    if (rho <= opts.rho_end) return false;
    rho *= 0.5;
    if (rho <= 1.5 * opts.rho_end) rho = opts.rho_end;
    return true;
  };

  while (!log.exhausted()) {
    const int pole = s.pole();
    const Vec& xp = s.x[pole];
    const double fp = s.f[pole];

    // Rows of `edges` are the vertex offsets from the pole; `others` maps
    // each row back to its vertex.
    Mat edges(n, n);
    Vec df(n);
    std::vector<int> others;
    for (int v = 0, r = 0; v <= n; ++v) {
      if (v == pole) continue;
      edges.row(r) = (s.x[v] - xp).transpose();
      df[r] = s.f[v] - fp;
      others.push_back(v);
      ++r;
    }
    Eigen::FullPivLU<Mat> lu(edges);
    const bool singular = !lu.isInvertible();
    Mat inv = Mat::Zero(n, n);
    if (!singular) inv = lu.inverse();

    // Linear model gradient: edges * g = df. Infinite values make it unusable.
    Vec grad = Vec::Zero(n);
    bool model_ok = !singular && df.allFinite();
    if (model_ok) grad = inv * df;

    // Geometry: edge lengths and vertex heights over the opposite face.
    int worst = -1;
    double worst_score = 0.0;
    bool too_long = false;
    for (int r = 0; r < n; ++r) {
      const double eta = edges.row(r).norm();
      if (eta > kBeta * rho && eta > worst_score) {
        worst = r;
        worst_score = eta;
        too_long = true;
      }
    }
    if (!too_long) {
      double min_sig = std::numeric_limits<double>::infinity();
      for (int r = 0; r < n; ++r) {
        const double col = singular ? std::numeric_limits<double>::infinity() : inv.col(r).norm();
        const double sig = col > 0 ? 1.0 / col : std::numeric_limits<double>::infinity();
        if (sig < kAlpha * rho && sig < min_sig) {
          min_sig = sig;
          worst = r;
        }
      }
      if (singular && worst < 0) worst = 0;
    }

    if (worst >= 0) {
      // Replace the offending vertex by a point gamma*rho from the pole,
      // orthogonal to the face spanned by the remaining edges.
      Vec dir;
      if (!singular) {
        dir = inv.col(worst);
      } else {
        dir = Vec::Zero(n);
        dir[worst % n] = 1.0;
      }
      if (dir.norm() == 0.0) dir = Vec::Unit(n, worst % n);
      dir.normalize();
      if (model_ok && grad.dot(dir) > 0.0) dir = -dir;
      const Vec xn = xp + kGamma * rho * dir;
      const int v = others[worst];
      s.x[v] = xn;
      s.f[v] = eval_at(log, xn);
      continue;
    }

    const double gnorm = grad.norm();
    if (!model_ok || !(gnorm * rho > 0.0) || !std::isfinite(gnorm)) {
      if (!shrink()) {
        converged = true;
        break;
      }
      continue;
    }

    const Vec step = -(rho / gnorm) * grad;
    const double predicted = rho * gnorm;
    const Vec xn = xp + step;
    const double fn = eval_at(log, xn);
    const double ratio = (fp - fn) / predicted;

    // The trial point replaces the vertex whose barycentric weight in the
    // step is largest, scaled up for vertices far from the new point.
    const Vec coords = inv.transpose() * step;
    int replace = -1;
    double best_weight = 0.0;
    for (int r = 0; r < n; ++r) {
      const double dist = (s.x[others[r]] - xn).norm();
      const double w = std::abs(coords[r]) * std::max(1.0, dist / rho);
      if (w > best_weight) {
        best_weight = w;
        replace = r;
      }
    }
    if (fn < fp) {
      // The pole itself moves to the improved point if no vertex fits better.
      if (replace < 0 || best_weight < 1e-12) {
        s.x[pole] = xn;
        s.f[pole] = fn;
      } else {
        s.x[others[replace]] = xn;
        s.f[others[replace]] = fn;
      }
    } else if (replace >= 0 && best_weight > 1e-12) {
      s.x[others[replace]] = xn;
      s.f[others[replace]] = fn;
    }

    if (ratio < kPoorRatio) {
      if (!shrink()) {
        converged = true;
        break;
      }
    }
  }
  return std::move(log).finish(converged);
}

OptimizeResult minimize(const Objective& f, std::span<const double> x0, const OptimizerOptions& opts) {
  switch (opts.kind) {
    case OptimizerKind::Cobyla: return minimize_cobyla(f, x0, opts);
    case OptimizerKind::NelderMead: return minimize_nelder_mead(f, x0, opts);
  }
  throw Error(ErrorCategory::configuration, "unknown optimizer kind");
}

}  // namespace qens
