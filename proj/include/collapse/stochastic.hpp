#pragma once

#include "collapse/deterministic.hpp"
#include "collapse/detail/kernels.hpp"
#include "collapse/errors.hpp"
#include "collapse/quantum_core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace collapse
{

enum class Scheme
{
	ito,         ///< Euler-Maruyama on the Ito CSL equation
	stratonovich ///< stochastic Heun on the coarse-grained Stratonovich form
};

const char* to_string(Scheme s);

struct NoiseConfig
{
	double rate = 1.0; ///< CSL collapse rate Gamma (1/s)
	std::uint64_t seed = 0;
	Scheme scheme = Scheme::ito;
	double dt = 1e-3;
};

void validate(const NoiseConfig& noise);

/// Identifier written into output metadata. Bump the suffix whenever the
/// stream derivation or the normal sampler changes.
inline constexpr const char* kRngName = "mt19937_64+splitmix64-stream/v1";

/// Standard normal variates from an independent stream per (base_seed, stream_index).
class GaussianStream
{
public:
	GaussianStream(std::uint64_t base_seed, std::uint64_t stream_index);

	double operator()() { return normal_(engine_); }

private:
	std::mt19937_64 engine_;
	std::normal_distribution<double> normal_;
};

/// i.i.d. N(0, dt) Wiener increments.
std::vector<double> wiener_increments(std::uint64_t seed, std::size_t n_steps, double dt,
	std::uint64_t stream_index = 0);

struct SdeStep
{
	StateVector state;
	double norm_error; ///< | |psi + dpsi| - 1 | before renormalization
};

SdeStep ito_csl_step(const StateVector& psi, const HamiltonianSpec& spec, double rate, double dW,
	double dt);

SdeStep stratonovich_step(const StateVector& psi, const HamiltonianSpec& spec, double rate,
	double dW, double dt);

struct StochasticTrajectory
{
	std::vector<double> times;
	std::vector<StateVector> states;
	std::vector<double> expA;
	std::vector<double> wiener; ///< cumulative W(t)
	std::vector<double> norm_error;
	std::uint64_t seed = 0;
	std::uint64_t stream_index = 0;

	std::size_t size() const { return times.size(); }
};

struct RecordOptions
{
	std::size_t record_stride = 1;
	std::uint64_t stream_index = 0;
};

StochasticTrajectory simulate_stochastic(const StateVector& initial, const HamiltonianSpec& spec,
	const NoiseConfig& noise, double t_end, const RecordOptions& options = {});

/// Collapse coordinate z = (2<A> - l0 - l1) / (l0 - l1) in the eigenbasis of A.
double z_from_expectation(double expA, double lambda0, double lambda1);

/// Runs one two-level trajectory, calling
///   observe(step, t, psi, W, norm_error)
/// at t = 0 and after every step, with psi renormalized.
template <class Observer>
void propagate_stochastic(const StateVector& initial, const HamiltonianSpec& spec,
	const NoiseConfig& noise, double t_end, std::uint64_t stream_index, Observer&& observe)
{
	validate(noise);
	if(initial.dim() != 2 || spec.dim() != 2)
		throw ValidationError("stochastic integration supports n = 2 only");
	const TimeGrid grid = make_grid(t_end, noise.dt);
	const double sqrt_h = std::sqrt(grid.step);
	const Eigen::Matrix2cd H0 = spec.H0;
	const Eigen::Matrix2cd A = spec.A;
	GaussianStream normal(noise.seed, stream_index);

	Eigen::Vector2cd psi = initial.amplitudes();
	double W = 0.0;
	observe(std::size_t{0}, 0.0, static_cast<const Eigen::Vector2cd&>(psi), W, 0.0);
	for(std::size_t k = 1; k <= grid.steps; ++k)
	{
		const double dW = sqrt_h * normal();
		Eigen::Vector2cd next;
		if(noise.scheme == Scheme::ito)
			next = psi + detail::ito_increment<Eigen::Vector2cd>(psi, H0, A, spec.omega, noise.rate,
				dW, grid.step);
		else
			next = detail::heun_step<Eigen::Vector2cd>(psi, H0, A, spec.omega, noise.rate, dW,
				grid.step);
		const double norm = next.norm();
		const double t = static_cast<double>(k) * grid.step;
		if(!next.allFinite() || !(norm > 0.0))
		{
			std::ostringstream msg;
			msg << "non-finite state encountered at t=" << t;
			throw NumericalError(msg.str());
		}
		psi = next / norm;
		W += dW;
		observe(k, t, static_cast<const Eigen::Vector2cd&>(psi), W, std::abs(norm - 1.0));
	}
}

/// Noise-averaged evolution:
///   drho/dt = -i omega [H0, rho] + Gamma (A rho A - {A^2, rho} / 2).
Matrix lindblad_rhs(const DensityMatrix& rho, const HamiltonianSpec& spec, double rate);

/// RK4 integration of lindblad_rhs, returning rho at each (ascending) checkpoint.
std::vector<Matrix> integrate_lindblad(const DensityMatrix& rho0, const HamiltonianSpec& spec,
	double rate, std::span<const double> checkpoints, double max_dt);

}
