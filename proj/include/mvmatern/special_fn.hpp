#pragma once

namespace mvmatern {

/// ln Γ(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// Modified Bessel function of the second kind K_nu(x), x > 0, any real nu.
///
/// Uses Temme's series for x < 2 and Steed's continued fraction (CF2) for
/// x >= 2 at the reduced order |mu| <= 1/2, then forward recurrence in the
/// order; orders above 100 use the uniform asymptotic expansion instead.
/// Returns +inf when the result overflows (small x or large nu) and
/// underflows to 0 for large x; log_bessel_k_scaled covers both regimes.
double bessel_k(double nu, double x);

/// exp(x) * K_nu(x). Does not underflow for large x.
double bessel_k_scaled(double nu, double x);

struct BesselKPair {
  double k_nu = 0.0;        ///< exp(x) K_nu(x)
  double k_nu_minus_1 = 0.0;  ///< exp(x) K_{nu-1}(x)
};

/// Scaled K_nu and K_{nu-1} from a single recurrence. Requires nu >= 0.
BesselKPair bessel_k_scaled_pair(double nu, double x);

/// log(exp(x) K_nu(x)). Finite wherever K_nu is positive, including the
/// range where K_nu itself overflows.
double log_bessel_k_scaled(double nu, double x);

struct LogBesselKPair {
  double log_k_nu = 0.0;
  double log_k_nu_minus_1 = 0.0;
};

/// Logs of the scaled pair. Requires nu >= 0.
LogBesselKPair log_bessel_k_scaled_pair(double nu, double x);

}  // namespace mvmatern
