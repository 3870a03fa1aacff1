#pragma once

namespace d2dstore {

// Independent numeric references used to check the closed forms.

// Pr(S_h > t): at least h of m exponential(mu) lifetimes exceed t, evaluated
// as an upper binomial tail.
double hypoexp_survival(double t, int h, int m, double mu);

// Density of S_h written as a hypoexponential mixture with stage rates
// i*mu, i = h..m.
double hypoexp_pdf(double t, int h, int m, double mu);

// Density of the phase, within [0, delta), of the ell-th request of a Poisson
// stream with rate omega. The folded Erlang series is summed until the
// remaining tail is below 1e-12 of the partial sum.
double request_phase_pdf(double t, int ell, double omega, double delta);

// (1/delta) * integral of hypoexp_survival over [0, delta), evaluated as one
// minus the integrated loss probability by adaptive
// Gauss-Kronrod quadrature.
double p_d2d_quadrature(int h, int m, double mu, double delta);

}  // namespace d2dstore
