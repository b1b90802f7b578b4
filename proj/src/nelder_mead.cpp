#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Core>

#include "qens/error.hpp"
#include "qens/optimize.hpp"

namespace qens {

OptimizeResult minimize_nelder_mead(const Objective& f, std::span<const double> x0,
                                    const OptimizerOptions& opts) {
  if (opts.max_evaluations < 1) throw Error(ErrorCategory::parameter, "evaluation budget must be >= 1");
  using Vec = Eigen::VectorXd;
  const int n = static_cast<int>(x0.size());
  detail::EvaluationLog log(f, opts.max_evaluations);
  auto eval = [&](const Vec& x) {
    return log(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  };

  std::vector<Vec> x{Eigen::Map<const Vec>(x0.data(), n)};
  std::vector<double> fx{eval(x[0])};
  if (n == 0) return std::move(log).finish(true);
  for (int i = 0; i < n && !log.exhausted(); ++i) {
    Vec v = x[0];
    v[i] += opts.rho_begin;
    x.push_back(v);
    fx.push_back(eval(v));
  }
  if (static_cast<int>(x.size()) < n + 1) return std::move(log).finish(false);

  std::vector<int> order(n + 1);
  bool converged = false;
  while (!log.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = order.front(), worst = order.back(), second = order[n - 1];

    double size = 0.0;
    for (int i = 0; i <= n; ++i) size = std::max(size, (x[i] - x[best]).lpNorm<Eigen::Infinity>());
    if (size <= opts.rho_end) {
      converged = true;
      break;
    }

    Vec centroid = Vec::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += x[i];
    centroid /= n;

    const Vec xr = centroid + (centroid - x[worst]);
    const double fr = eval(xr);
    if (fr < fx[best]) {
      if (log.exhausted()) {
        x[worst] = xr;
        fx[worst] = fr;
        break;
      }
      const Vec xe = centroid + 2.0 * (centroid - x[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
      continue;
    }
    if (fr < fx[second]) {
      x[worst] = xr;
      fx[worst] = fr;
      continue;
    }
    if (log.exhausted()) break;
    const bool outside = fr < fx[worst];
    const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid))
                           : Vec(centroid + 0.5 * (x[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : fx[worst])) {
      x[worst] = xc;
      fx[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n && !log.exhausted(); ++i) {
      if (i == best) continue;
      x[i] = x[best] + 0.5 * (x[i] - x[best]);
      fx[i] = eval(x[i]);
    }
  }
  return std::move(log).finish(converged);
}

}  // namespace qens
