#pragma once

#include "tiger/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace tiger {

struct GradCheckEntry {
  std::string param;
  Eigen::Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  std::vector<GradCheckEntry> failures;

  bool ok() const { return failures.empty(); }
};

/// |a - n| / max(|a|, |n|, 1)
inline double grad_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1.0});
}

/// Compares tape gradients against central differences for every
/// coordinate of every parameter. `loss` records a scalar on the tape it is
/// handed. Coordinates whose perturbation flips any relu sign are skipped.
template <typename Scalar>
GradCheckReport check_gradients(const std::function<Var<Scalar>(Tape<Scalar>&)>& loss,
                                const std::vector<Parameter<Scalar>*>& params, double eps = 1e-3,
                                double tol = 1e-4) {
  for (auto* p : params) p->zero_grad();
  std::vector<std::uint8_t> base_signature;
  {
    Tape<Scalar> tape;
    auto out = loss(tape);
    tape.backward(out);
    base_signature = tape.relu_signature();
  }
  auto evaluate = [&](std::vector<std::uint8_t>& sig) {
    Tape<Scalar> tape;
    const double v = static_cast<double>(loss(tape).scalar());
    sig = tape.relu_signature();
    return v;
  };

  GradCheckReport report;
  for (auto* p : params) {
    for (Eigen::Index k = 0; k < p->value.size(); ++k) {
      Scalar& x = p->value.data()[k];
      const Scalar saved = x;
      std::vector<std::uint8_t> sig_plus, sig_minus;
      x = static_cast<Scalar>(static_cast<double>(saved) + eps);
      const double f_plus = evaluate(sig_plus);
      x = static_cast<Scalar>(static_cast<double>(saved) - eps);
      const double f_minus = evaluate(sig_minus);
      x = saved;
      if (sig_plus != base_signature || sig_minus != base_signature) {
        ++report.skipped_kinks;
        continue;
      }
      const double numeric = (f_plus - f_minus) / (2.0 * eps);
      const double analytic = static_cast<double>(p->grad.data()[k]);
      const double err = grad_rel_error(analytic, numeric);
      report.max_rel_error = std::max(report.max_rel_error, err);
      ++report.checked;
      if (err > tol) report.failures.push_back({p->name, k, analytic, numeric, err});
    }
  }
  return report;
}

}  // namespace tiger
