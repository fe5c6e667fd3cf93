#include "mvmatern/special_fn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace mvmatern {

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
#if defined(__GLIBC__)
  // lgamma writes the global signgam; the reentrant variant does not.
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// Power series of 1/Gamma(z) = sum_k c_k z^k (Abramowitz & Stegun 6.1.34).
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538,
    -0.0420026350340952, 0.1665386113822915,  -0.0421977345555443,
    -0.0096219715278770, 0.0072189432466630,  -0.0011651675918591,
    -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417,
    0.0000000061160950,  0.0000000050020075,  -0.0000000011812746,
    0.0000000001043427,  0.0000000000077823,  -0.0000000000036968,
    0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

struct TemmeGammas {
  double gam1;   // (1/G(1-mu) - 1/G(1+mu)) / (2 mu)
  double gam2;   // (1/G(1-mu) + 1/G(1+mu)) / 2
  double gampl;  // 1/G(1+mu)
  double gammi;  // 1/G(1-mu)
};

// 1/G(1+z) = sum_k c_{k+1} z^k, so the odd/even parts give gam1/gam2
// without the cancellation of the direct differences at small mu.
TemmeGammas temme_gammas(double mu) {
  const double mu2 = mu * mu;
  double gam1 = 0.0, gam2 = 0.0;
  double pw = 1.0;
  for (std::size_t k = 0; k + 1 < kRecipGamma.size(); k += 2) {
    gam2 += kRecipGamma[k] * pw;
    gam1 -= kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
  return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

struct KPair {
  double k_mu;   // exp(x) K_mu(x)
  double k_mu1;  // exp(x) K_{mu+1}(x)
};

// Scaled K_mu and K_{mu+1} for |mu| <= 1/2.
KPair reduced_order_pair(double mu, double x) {
  const double mu2 = mu * mu;
  const double xi = 1.0 / x;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= kMaxIter; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= di - mu;
      q /= di + mu;
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - di * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    const double scale = std::exp(x);
    return {sum * scale, sum1 * 2.0 * xi * scale};
  }

  // Steed's algorithm for the continued fraction CF2.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1, c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 1; i <= kMaxIter; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  const double kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  return {kmu, kmu * (mu + x + 0.5 - h) * xi};
}

void check_argument(double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: argument must be positive");
}

}  // namespace

namespace {

// Orders from which the uniform (Debye) expansion replaces the recurrence,
// whose cost grows linearly in nu.
constexpr double kDebyeOrder = 100.0;

// log(exp(x) K_nu(x)) from the uniform asymptotic expansion in nu with
// terms through u_4; relative error below 1e-12 for nu >= kDebyeOrder.
double log_debye(double nu, double x) {
  const double z = x / nu;
  const double r = std::sqrt(1.0 + z * z);
  const double p = 1.0 / r;
  const double eta = r + std::log(z / (1.0 + r));
  const double p2 = p * p;
  const double u1 = p * (3.0 - 5.0 * p2) / 24.0;
  const double u2 = p2 * (81.0 + p2 * (-462.0 + 385.0 * p2)) / 1152.0;
  const double u3 =
      p * p2 * (30375.0 + p2 * (-369603.0 + p2 * (765765.0 - 425425.0 * p2))) / 414720.0;
  const double u4 =
      p2 * p2 *
      (4465125.0 +
       p2 * (-94121676.0 + p2 * (349922430.0 + p2 * (-446185740.0 + 185910725.0 * p2)))) /
      39813120.0;
  const double vi = 1.0 / nu;
  const double series = 1.0 + vi * (-u1 + vi * (u2 + vi * (-u3 + vi * u4)));
  return 0.5 * std::log(std::numbers::pi / (2.0 * nu)) - 0.5 * std::log(r) + x - nu * eta +
         std::log(series);
}

// Forward recurrence from the reduced order, rescaling whenever the terms
// grow large. Returns logs of exp(x) K_nu and exp(x) K_{nu-1}.
LogBesselKPair log_forward(double nu, double x) {
  if (nu - 1.0 >= kDebyeOrder) return {log_debye(nu, x), log_debye(nu - 1.0, x)};
  const int nl = static_cast<int>(nu + 0.5);
  if (nl == 0) {
    // K_{nu-1} = K_{1-nu}; start from mu = -nu so both orders are direct.
    const KPair base = reduced_order_pair(-nu, x);
    return {std::log(base.k_mu), std::log(base.k_mu1)};
  }
  const double mu = nu - nl;
  const KPair base = reduced_order_pair(mu, x);
  double k_prev = base.k_mu;
  double k_cur = base.k_mu1;
  double log_scale = 0.0;
  const double xi2 = 2.0 / x;
  for (int i = 1; i < nl; ++i) {
    const double next = (mu + i) * xi2 * k_cur + k_prev;
    k_prev = k_cur;
    k_cur = next;
    if (k_cur > 1e250) {
      log_scale += std::log(k_cur);
      k_prev /= k_cur;
      k_cur = 1.0;
    }
  }
  return {log_scale + std::log(k_cur), log_scale + std::log(k_prev)};
}

}  // namespace

LogBesselKPair log_bessel_k_scaled_pair(double nu, double x) {
  check_argument(x);
  if (nu < 0.0) throw std::domain_error("log_bessel_k_scaled_pair: order must be nonnegative");
  return log_forward(nu, x);
}

double log_bessel_k_scaled(double nu, double x) {
  check_argument(x);
  return log_forward(std::abs(nu), x).log_k_nu;
}

BesselKPair bessel_k_scaled_pair(double nu, double x) {
  const LogBesselKPair l = log_bessel_k_scaled_pair(nu, x);
  return {std::exp(l.log_k_nu), std::exp(l.log_k_nu_minus_1)};
}

double bessel_k_scaled(double nu, double x) { return std::exp(log_bessel_k_scaled(nu, x)); }

double bessel_k(double nu, double x) {
  return std::exp(log_bessel_k_scaled(nu, x) - x);
}

}  // namespace mvmatern
