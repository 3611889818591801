#include "collapse/analysis.hpp"

#include "collapse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace collapse
{

BornWeights born_probabilities(const StateVector& initial, const Matrix& A)
{
	if(A.rows() != 2 || initial.dim() != 2)
		throw ValidationError("Born weights are computed for n = 2");
	if(!validate_hamiltonian(Matrix::Zero(2, 2), A).empty())
		throw ValidationError("degenerate collapse operator");
	const auto eig = sorted_eigensystem(A);
	const double p0 = std::norm(eig.vectors.col(0).dot(initial.amplitudes()));
	const double p1 = std::norm(eig.vectors.col(1).dot(initial.amplitudes()));
	const double total = p0 + p1;
	return BornWeights{p0 / total, p1 / total};
}

double EnsembleStats::uncollapsed_fraction() const
{
	return n_trajectories ? static_cast<double>(count_uncollapsed) / n_trajectories : 0.0;
}

bool EnsembleStats::born_consistent(double sigmas) const
{
	if(!fraction_0)
		return false;
	const double n = static_cast<double>(count_to_0 + count_to_1);
	const double sd = std::sqrt(born_p0 * (1.0 - born_p0) / n);
	return std::abs(*fraction_0 - born_p0) <= sigmas * sd;
}

ZMoment z_moment(double t, std::span<const double> z)
{
	const double n = static_cast<double>(z.size());
	if(z.size() < 2)
		throw ValidationError("moments need at least two samples");
	double sum = 0.0;
	for(double v : z)
		sum += v;
	const double mean = sum / n;
	double m2 = 0.0;
	double m4 = 0.0;
	for(double v : z)
	{
		const double d2 = (v - mean) * (v - mean);
		m2 += d2;
		m4 += d2 * d2;
	}
	const double variance = m2 / (n - 1.0);
	const double pop_var = m2 / n;
	const double kurt_term = std::max(0.0, m4 / n - pop_var * pop_var);
	return ZMoment{t, mean, variance, std::sqrt(variance / n), std::sqrt(kurt_term / n)};
}

EnsembleResult run_ensemble(const StateVector& initial, const HamiltonianSpec& spec,
	const NoiseConfig& noise, double t_end, std::size_t n_trajectories,
	const EnsembleOptions& options)
{
	if(n_trajectories < 1)
		throw ValidationError("n_trajectories must be at least 1");
	validate(noise);
	const Eigenbasis eb = to_eigenbasis_of_A(spec);
	const TimeGrid grid = make_grid(t_end, noise.dt);

	std::vector<std::size_t> checkpoint_steps;
	for(double tc : options.checkpoints)
	{
		if(tc < 0.0 || tc > t_end * (1.0 + 1e-12))
			throw ValidationError("ensemble checkpoints must lie in [0, t_end]");
		checkpoint_steps.push_back(static_cast<std::size_t>(std::llround(tc / grid.step)));
	}
	const std::size_t n_check = checkpoint_steps.size();
	const double lambda0 = eb.params.lambda0;
	const double lambda1 = eb.params.lambda1;
	const double threshold = 1.0 - options.epsilon;
	const Eigen::Matrix2cd A = spec.A;

	std::vector<TrajectoryOutcome> outcomes(n_trajectories);
	std::vector<double> z_at(n_trajectories * n_check, 0.0);

	auto run_one = [&](std::size_t i) {
		std::optional<double> sustained_since;
		double z = 0.0;
		propagate_stochastic(initial, spec, noise, t_end, i,
			[&](std::size_t k, double t, const Eigen::Vector2cd& psi, double, double) {
				z = z_from_expectation(psi.dot(A * psi).real(), lambda0, lambda1);
				if(std::abs(z) >= threshold)
				{
					if(!sustained_since)
						sustained_since = t;
				}
				else
					sustained_since.reset();
				for(std::size_t c = 0; c < n_check; ++c)
					if(checkpoint_steps[c] == k)
						z_at[i * n_check + c] = z;
			});
		TrajectoryOutcome& out = outcomes[i];
		out.index = i;
		out.final_z = z;
		out.outcome = sustained_since ? (z > 0.0 ? 0 : 1) : -1;
		out.collapse_time = sustained_since;
	};

	unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
	threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_trajectories)));
	if(threads == 1)
	{
		for(std::size_t i = 0; i < n_trajectories; ++i)
			run_one(i);
	}
	else
	{
		std::exception_ptr failure;
		std::mutex failure_mutex;
		std::vector<std::thread> pool;
		for(unsigned w = 0; w < threads; ++w)
		{
			pool.emplace_back([&, w] {
				try
				{
					for(std::size_t i = w; i < n_trajectories; i += threads)
						run_one(i);
				}
				catch(...)
				{
					std::lock_guard lock(failure_mutex);
					if(!failure)
						failure = std::current_exception();
				}
			});
		}
		for(auto& th : pool)
			th.join();
		if(failure)
			std::rethrow_exception(failure);
	}

	EnsembleResult result;
	EnsembleStats& s = result.stats;
	s.n_trajectories = n_trajectories;
	for(const auto& o : outcomes)
	{
		if(o.outcome == 0)
			++s.count_to_0;
		else if(o.outcome == 1)
			++s.count_to_1;
		else
			++s.count_uncollapsed;
	}
	s.born_p0 = born_probabilities(initial, spec.A).p0;
	const std::size_t collapsed = s.count_to_0 + s.count_to_1;
	if(collapsed > 0)
	{
		const double p = static_cast<double>(s.count_to_0) / static_cast<double>(collapsed);
		const double half = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(collapsed));
		s.fraction_0 = p;
		s.fraction_0_ci95 = Interval{std::max(0.0, p - half), std::min(1.0, p + half)};
	}
	if(n_trajectories >= 2)
	{
		std::vector<double> column(n_trajectories);
		for(std::size_t c = 0; c < n_check; ++c)
		{
			for(std::size_t i = 0; i < n_trajectories; ++i)
				column[i] = z_at[i * n_check + c];
			s.z_moments.push_back(
				z_moment(static_cast<double>(checkpoint_steps[c]) * grid.step, column));
		}
	}
	result.outcomes = std::move(outcomes);
	return result;
}

std::vector<LindbladCheckpoint> compare_to_lindblad(std::span<const StochasticTrajectory> ensemble,
	const HamiltonianSpec& spec, double rate, double lindblad_dt)
{
	if(ensemble.empty())
		throw ValidationError("empty ensemble");
	if(ensemble.size() < 100)
		throw ValidationError("Lindblad comparison needs at least 100 trajectories");
	const auto& times = ensemble.front().times;
	if(times.empty())
		throw ValidationError("empty ensemble");
	for(const auto& tr : ensemble)
	{
		if(tr.times.size() != times.size())
			throw ValidationError("trajectories must share a common time grid");
		for(std::size_t k = 0; k < times.size(); ++k)
			if(std::abs(tr.times[k] - times[k]) > 1e-12 * std::max(1.0, times[k]))
				throw ValidationError("trajectories must share a common time grid");
	}

	const double n = static_cast<double>(ensemble.size());
	const Eigen::Index dim = ensemble.front().states.front().dim();
	std::vector<Matrix> averaged(times.size(), Matrix::Zero(dim, dim));
	std::vector<double> se(times.size(), 0.0);
	for(std::size_t k = 0; k < times.size(); ++k)
	{
		for(const auto& tr : ensemble)
		{
			const Vector& v = tr.states[k].amplitudes();
			averaged[k] += v * v.adjoint();
		}
		averaged[k] /= n;
		double var_sum = 0.0;
		for(const auto& tr : ensemble)
		{
			const Vector& v = tr.states[k].amplitudes();
			var_sum += (v * v.adjoint() - averaged[k]).squaredNorm();
		}
		se[k] = std::sqrt(var_sum / (n - 1.0) / n);
	}

	const DensityMatrix rho0(averaged.front());
	const auto reference = integrate_lindblad(rho0, spec, rate, times, lindblad_dt);
	std::vector<LindbladCheckpoint> out;
	out.reserve(times.size());
	for(std::size_t k = 0; k < times.size(); ++k)
		out.push_back(LindbladCheckpoint{times[k], averaged[k], reference[k],
			(averaged[k] - reference[k]).norm(), se[k]});
	return out;
}

std::vector<SweepRow> gamma_sweep(const StateVector& initial, const Matrix& H0, const Matrix& A,
	double omega, std::span<const double> gammas, const IntegratorConfig& config, double epsilon)
{
	if(gammas.empty())
		throw ValidationError("gamma list is empty");
	std::vector<SweepRow> rows;
	rows.reserve(gammas.size());
	for(double g : gammas)
	{
		const auto spec = HamiltonianSpec::make(omega, H0, A, g);
		const auto traj = integrate_deterministic(initial, spec, config);
		rows.push_back(SweepRow{g, classify_regime(spec), detect_collapse(traj, epsilon),
			traj.bloch.back()});
	}
	return rows;
}

}
