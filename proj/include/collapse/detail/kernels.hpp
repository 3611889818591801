#pragma once

// Shared arithmetic for the state-vector dynamics. Templated so the public
// n-dimensional API (Eigen dynamic types) and the two-level hot loops
// (Eigen fixed 2x2 types) run the same expressions.

#include <cmath>
#include <complex>

namespace collapse::detail
{

// <A> with the state's own norm, so unnormalized Runge-Kutta stages and
// SDE predictors see the same expectation as their normalized direction.
template <class Vec, class Mat>
double normalized_expectation(const Mat& A, const Vec& psi)
{
	return psi.dot(A * psi).real() / psi.squaredNorm();
}

// [-i omega H0 + gamma (A - <A>)] psi
template <class Vec, class Mat>
Vec state_rhs(const Vec& psi, const Mat& H0, const Mat& A, double omega, double gamma)
{
	const Vec a_psi = A * psi;
	const double mean = psi.dot(a_psi).real() / psi.squaredNorm();
	Vec out = std::complex<double>(0.0, -omega) * (H0 * psi);
	out += gamma * (a_psi - mean * psi);
	return out;
}

template <class Vec, class Mat>
Vec rk4_step(const Vec& psi, const Mat& H0, const Mat& A, double omega, double gamma, double h)
{
	const Vec k1 = state_rhs<Vec>(psi, H0, A, omega, gamma);
	const Vec k2 = state_rhs<Vec>(Vec(psi + 0.5 * h * k1), H0, A, omega, gamma);
	const Vec k3 = state_rhs<Vec>(Vec(psi + 0.5 * h * k2), H0, A, omega, gamma);
	const Vec k4 = state_rhs<Vec>(Vec(psi + h * k3), H0, A, omega, gamma);
	return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// X psi and X^2 psi for X = A - <A>, plus <X^2>.
template <class Vec>
struct Fluctuation
{
	Vec x_psi;
	Vec x2_psi;
	double variance;
};

template <class Vec, class Mat>
Fluctuation<Vec> fluctuation(const Vec& psi, const Mat& A)
{
	const double n2 = psi.squaredNorm();
	const Vec a_psi = A * psi;
	const double mean = psi.dot(a_psi).real() / n2;
	Vec x_psi = a_psi - mean * psi;
	Vec x2_psi = A * x_psi - mean * x_psi;
	const double variance = x_psi.squaredNorm() / n2;
	return {std::move(x_psi), std::move(x2_psi), variance};
}

// Euler-Maruyama increment of
//   dpsi = [-i omega H0 dt - (Gamma/2) X^2 dt + sqrt(Gamma) X dW] psi
template <class Vec, class Mat>
Vec ito_increment(const Vec& psi, const Mat& H0, const Mat& A, double omega, double rate,
	double dW, double dt)
{
	const auto f = fluctuation<Vec>(psi, A);
	Vec d = std::complex<double>(0.0, -omega * dt) * (H0 * psi);
	d += (-0.5 * rate * dt) * f.x2_psi;
	d += (std::sqrt(rate) * dW) * f.x_psi;
	return d;
}

// Stratonovich drift -i omega H0 psi - Gamma (X^2 - <X^2>) psi and
// diffusion sqrt(Gamma) X psi.
template <class Vec>
struct DriftDiffusion
{
	Vec drift;
	Vec diffusion;
};

template <class Vec, class Mat>
DriftDiffusion<Vec> stratonovich_fields(const Vec& psi, const Mat& H0, const Mat& A,
	double omega, double rate)
{
	const auto f = fluctuation<Vec>(psi, A);
	Vec drift = std::complex<double>(0.0, -omega) * (H0 * psi);
	drift -= rate * (f.x2_psi - f.variance * psi);
	return {std::move(drift), std::sqrt(rate) * f.x_psi};
}

// Stochastic Heun (predictor-corrector), consistent with Stratonovich calculus.
template <class Vec, class Mat>
Vec heun_step(const Vec& psi, const Mat& H0, const Mat& A, double omega, double rate,
	double dW, double dt)
{
	const auto f0 = stratonovich_fields<Vec>(psi, H0, A, omega, rate);
	const Vec predictor = psi + dt * f0.drift + dW * f0.diffusion;
	const auto f1 = stratonovich_fields<Vec>(predictor, H0, A, omega, rate);
	return psi + (0.5 * dt) * (f0.drift + f1.drift) + (0.5 * dW) * (f0.diffusion + f1.diffusion);
}

}
