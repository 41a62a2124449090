#pragma once

namespace vswir::stats {

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);
double normal_quantile(double p);

/// P(X1 <= h, X2 <= k) for a standard bivariate normal with correlation rho.
/// Genz (2004) Gauss-Legendre scheme, accurate to ~1e-15.
double bivariate_normal_cdf(double h, double k, double rho);

/// Survival function of the asymptotic Kolmogorov distribution,
/// P(K > lambda) where K = sup|B(t)| for a Brownian bridge.
double kolmogorov_sf(double lambda);

}  // namespace vswir::stats
