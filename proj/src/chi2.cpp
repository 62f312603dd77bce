#include <cmath>
#include <limits>

#include "flagstat/matcore.hpp"

namespace flagstat {

namespace {

constexpr int kMaxIter = 1000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

void require_dof(int dof) {
  if (dof < 1) throw DomainError("chi2: degrees of freedom must be positive");
}

// P(a, x) by its power series; converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Q(a, x) by the modified Lentz continued fraction; for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double log_gamma(double x) {
  static constexpr double kCoef[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                     771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                     -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  if (x < 0.5) {
    // Reflection keeps the Lanczos sum in its accurate range.
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double sum = kCoef[0];
  for (int i = 1; i < 9; ++i) sum += kCoef[i] / (z + i);
  const double t = z + 7.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: requires a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_q: requires a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_fraction(a, x);
}

double chi2_pdf(int dof, double x) {
  require_dof(dof);
  if (x < 0.0) return 0.0;
  const double k = 0.5 * dof;
  if (x == 0.0) {
    if (dof == 2) return 0.5;
    return dof < 2 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - log_gamma(k));
}

double chi2_cdf(int dof, double x) {
  require_dof(dof);
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_sf(int dof, double x) {
  require_dof(dof);
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_quantile(int dof, double p) {
  require_dof(dof);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");

  // Residual increasing in x; the upper tail is solved on the survival
  // function to keep precision when p is close to 1.
  const bool upper = p > 0.5;
  auto residual = [&](double x) { return upper ? (1.0 - p) - chi2_sf(dof, x) : chi2_cdf(dof, x) - p; };

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }

  double x = 0.5 * (lo + hi);

  for (int it = 0; it < 200; ++it) {
    const double f = residual(x);
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    const double dens = chi2_pdf(dof, x);
    double next = (dens > 0.0 && std::isfinite(dens)) ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return x;
}

}  // namespace flagstat
