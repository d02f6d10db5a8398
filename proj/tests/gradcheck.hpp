// Central finite-difference gradient checking for scalar-valued graphs.
//
// Float32 subtlety: a loss stored as a float32 scalar is quantized at
// ulp(|loss|)/2, which divided by 2*eps can exceed tight tolerances even for
// perfect gradients. The numeric side therefore reads the objective through
// `value`, a double-precision reduction of the pre-mean map, while the
// analytic side still differentiates the real graph.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "autodiff.hpp"
#include "rng.hpp"

namespace shark::gradcheck {

struct Options {
  double eps = 1e-3;
  double rtol = 1e-3;
  double atol = 1e-5;
  int64_t max_elems_per_var = 64;  // sampled when the tensor is larger
};

struct Failure {
  std::string var;
  int64_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct Report {
  int64_t checked = 0;
  std::vector<Failure> failures;
  bool ok() const { return failures.empty(); }
};

inline double double_mean(const Tensor& t) {
  double acc = 0.0;
  for (int64_t i = 0; i < t.numel(); ++i) acc += t[i];
  return acc / (double)t.numel();
}

/// `root` rebuilds the scalar graph from the current contents of `vars`;
/// `value` evaluates the same objective as a double. One backward pass gives
/// the analytic gradients; each sampled element is then perturbed in place
/// for the two-sided difference.
inline Report check(const std::function<ad::Var()>& root, const std::function<double()>& value,
                    const std::vector<std::pair<std::string, ad::Var>>& vars, const Options& opt,
                    Pcg32& rng) {
  Report report;
  ad::Var r = root();
  ad::backward(r);

  std::vector<std::vector<float>> grads;
  grads.reserve(vars.size());
  for (const auto& [name, var] : vars) {
    (void)name;
    const Tensor& g = var.grad();
    grads.emplace_back(g.data(), g.data() + g.shape().numel());
  }

  for (size_t vi = 0; vi < vars.size(); ++vi) {
    const auto& [name, var] = vars[vi];
    Tensor& x = var.node()->value;
    const int64_t n = x.shape().numel();
    std::vector<int64_t> picks;
    if (n <= opt.max_elems_per_var) {
      picks.resize(n);
      for (int64_t i = 0; i < n; ++i) picks[i] = i;
    } else {
      for (int64_t i = 0; i < opt.max_elems_per_var; ++i) {
        picks.push_back((int64_t)rng.next_below((uint64_t)n));
      }
      std::sort(picks.begin(), picks.end());
      picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
    }
    for (int64_t idx : picks) {
      const float saved = x[idx];
      double up, down;
      {
        ad::NoGrad guard;  // numeric passes need values only
        x[idx] = saved + (float)opt.eps;
        up = value();
        x[idx] = saved - (float)opt.eps;
        down = value();
      }
      x[idx] = saved;
      const double numeric = (up - down) / (2.0 * opt.eps);
      const double analytic = grads[vi][idx];
      ++report.checked;
      const double tol = opt.atol + opt.rtol * std::max(std::fabs(analytic), std::fabs(numeric));
      if (std::fabs(analytic - numeric) > tol) {
        report.failures.push_back({name, idx, analytic, numeric});
      }
    }
  }
  return report;
}

/// Scalar-root convenience: numeric readout is the root's own float value.
inline Report check(const std::function<ad::Var()>& root,
                    const std::vector<std::pair<std::string, ad::Var>>& vars, const Options& opt,
                    Pcg32& rng) {
  return check(root, [&]() { return (double)root().value().scalar(); }, vars, opt, rng);
}

/// Map-based convenience: the objective is mean(map). The analytic side
/// differentiates mean_all(map); the numeric side averages the map in double.
inline Report check_mean_of(const std::function<ad::Var()>& map,
                            const std::vector<std::pair<std::string, ad::Var>>& vars,
                            const Options& opt, Pcg32& rng) {
  return check([&]() { return ad::mean_all(map()); },
               [&]() { return double_mean(map().value()); }, vars, opt, rng);
}

}  // namespace shark::gradcheck
