#pragma once

// Chi-square goodness-of-fit helpers for the sampler tests.

#include <cmath>
#include <cstddef>
#include <vector>

namespace mcc::testing {

// Regularised upper incomplete gamma Q(a, x): series below a + 1, Lentz
// continued fraction above.
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_prefix) * h;
}

// P(X >= stat) for X ~ chi-square with df degrees of freedom.
inline double chi_square_p_value(double stat, std::size_t df) {
  return gamma_q(0.5 * static_cast<double>(df), 0.5 * stat);
}

struct ChiSquare {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

// Observed counts against expected probabilities; cells with zero expected
// probability must have zero counts and are skipped.
inline ChiSquare chi_square(const std::vector<double>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (double c : counts) total += c;
  ChiSquare r;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const double e = total * probs[i];
    r.statistic += (counts[i] - e) * (counts[i] - e) / e;
    ++cells;
  }
  r.df = cells - 1;
  r.p_value = chi_square_p_value(r.statistic, r.df);
  return r;
}

}  // namespace mcc::testing
