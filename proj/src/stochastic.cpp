#include "collapse/stochastic.hpp"

#include <algorithm>

namespace collapse
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31);
}

void check_step_inputs(const StateVector& psi, const HamiltonianSpec& spec, double rate,
	double dW, double dt)
{
	if(spec.dim() != psi.dim())
		throw ValidationError("dimension mismatch between Hamiltonian and state");
	if(!(rate >= 0.0))
		throw ValidationError("collapse rate Gamma must be non-negative");
	if(!(dt > 0.0))
		throw ValidationError("dt must be positive");
	if(!std::isfinite(dW))
		throw NumericalError("non-finite Wiener increment");
}

SdeStep finish_step(const Vector& next)
{
	const double norm = next.norm();
	if(!next.allFinite() || !(norm > 0.0))
		throw NumericalError("non-finite state after SDE step");
	return SdeStep{normalize(next / norm), std::abs(norm - 1.0)};
}

Matrix lindblad_rhs_unchecked(const Matrix& rho, const Matrix& H0, const Matrix& A,
	const Matrix& A2, double omega, double rate)
{
	const cx_double I(0.0, 1.0);
	Matrix out = -I * omega * (H0 * rho - rho * H0);
	out += rate * (A * rho * A - 0.5 * (A2 * rho + rho * A2));
	return out;
}

}

const char* to_string(Scheme s)
{
	return s == Scheme::ito ? "ito" : "stratonovich";
}

void validate(const NoiseConfig& noise)
{
	if(!(noise.rate >= 0.0) || !std::isfinite(noise.rate))
		throw ValidationError("collapse rate Gamma must be non-negative");
	if(!(noise.dt > 0.0) || !std::isfinite(noise.dt))
		throw ValidationError("noise dt must be positive");
}

GaussianStream::GaussianStream(std::uint64_t base_seed, std::uint64_t stream_index)
	: engine_{splitmix64(splitmix64(base_seed) ^ splitmix64(~stream_index))}
{
}

std::vector<double> wiener_increments(std::uint64_t seed, std::size_t n_steps, double dt,
	std::uint64_t stream_index)
{
	if(n_steps < 1)
		throw ValidationError("n_steps must be at least 1");
	if(!(dt > 0.0))
		throw ValidationError("dt must be positive");
	GaussianStream normal(seed, stream_index);
	const double s = std::sqrt(dt);
	std::vector<double> out(n_steps);
	for(auto& dW : out)
		dW = s * normal();
	return out;
}

SdeStep ito_csl_step(const StateVector& psi, const HamiltonianSpec& spec, double rate, double dW,
	double dt)
{
	check_step_inputs(psi, spec, rate, dW, dt);
	const Vector& v = psi.amplitudes();
	return finish_step(v + detail::ito_increment<Vector>(v, spec.H0, spec.A, spec.omega, rate, dW, dt));
}

SdeStep stratonovich_step(const StateVector& psi, const HamiltonianSpec& spec, double rate,
	double dW, double dt)
{
	check_step_inputs(psi, spec, rate, dW, dt);
	return finish_step(detail::heun_step<Vector>(psi.amplitudes(), spec.H0, spec.A, spec.omega,
		rate, dW, dt));
}

StochasticTrajectory simulate_stochastic(const StateVector& initial, const HamiltonianSpec& spec,
	const NoiseConfig& noise, double t_end, const RecordOptions& options)
{
	if(options.record_stride < 1)
		throw ValidationError("record_stride must be at least 1");
	StochasticTrajectory traj;
	traj.seed = noise.seed;
	traj.stream_index = options.stream_index;
	const std::size_t last = make_grid(t_end, noise.dt).steps;
	const Eigen::Matrix2cd A = spec.A;
	double error_since = 0.0;
	propagate_stochastic(initial, spec, noise, t_end, options.stream_index,
		[&](std::size_t k, double t, const Eigen::Vector2cd& psi, double W, double err) {
			error_since = std::max(error_since, err);
			if(k % options.record_stride != 0 && k != last)
				return;
			traj.times.push_back(t);
			traj.states.push_back(normalize(Vector(psi)));
			traj.expA.push_back(psi.dot(A * psi).real());
			traj.wiener.push_back(W);
			traj.norm_error.push_back(error_since);
			error_since = 0.0;
		});
	return traj;
}

double z_from_expectation(double expA, double lambda0, double lambda1)
{
	return (2.0 * expA - lambda0 - lambda1) / (lambda0 - lambda1);
}

Matrix lindblad_rhs(const DensityMatrix& rho, const HamiltonianSpec& spec, double rate)
{
	if(spec.dim() != rho.dim())
		throw ValidationError("dimension mismatch between Hamiltonian and density matrix");
	return lindblad_rhs_unchecked(rho.entries(), spec.H0, spec.A, spec.A * spec.A, spec.omega, rate);
}

std::vector<Matrix> integrate_lindblad(const DensityMatrix& rho0, const HamiltonianSpec& spec,
	double rate, std::span<const double> checkpoints, double max_dt)
{
	if(spec.dim() != rho0.dim())
		throw ValidationError("dimension mismatch between Hamiltonian and density matrix");
	if(!(max_dt > 0.0))
		throw ValidationError("max_dt must be positive");
	const Matrix A2 = spec.A * spec.A;
	auto f = [&](const Matrix& r) {
		return lindblad_rhs_unchecked(r, spec.H0, spec.A, A2, spec.omega, rate);
	};
	std::vector<Matrix> out;
	out.reserve(checkpoints.size());
	Matrix rho = rho0.entries();
	double t = 0.0;
	for(double target : checkpoints)
	{
		if(target < t)
			throw ValidationError("checkpoints must be non-negative and ascending");
		if(target > t)
		{
			const TimeGrid grid = make_grid(target - t, max_dt);
			const double h = grid.step;
			for(std::size_t k = 0; k < grid.steps; ++k)
			{
				const Matrix k1 = f(rho);
				const Matrix k2 = f(rho + 0.5 * h * k1);
				const Matrix k3 = f(rho + 0.5 * h * k2);
				const Matrix k4 = f(rho + h * k3);
				rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
			}
			t = target;
		}
		out.push_back(rho);
	}
	return out;
}

}
