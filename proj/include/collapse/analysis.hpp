#pragma once

#include "collapse/deterministic.hpp"
#include "collapse/quantum_core.hpp"
#include "collapse/stochastic.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace collapse
{

struct BornWeights
{
	double p0; ///< weight on the eigenvector of the larger eigenvalue of A
	double p1;
};

BornWeights born_probabilities(const StateVector& initial, const Matrix& A);

struct ZMoment
{
	double t;
	double mean;
	double variance; ///< unbiased
	double se_mean;
	double se_variance;
};

struct Interval
{
	double low;
	double high;
};

struct EnsembleStats
{
	std::size_t n_trajectories = 0;
	std::size_t count_to_0 = 0;
	std::size_t count_to_1 = 0;
	std::size_t count_uncollapsed = 0;
	/// count_to_0 / (count_to_0 + count_to_1); empty if nothing collapsed.
	std::optional<double> fraction_0;
	/// Normal-approximation 95% interval on fraction_0.
	std::optional<Interval> fraction_0_ci95;
	double born_p0 = 0.0;
	std::vector<ZMoment> z_moments;

	double uncollapsed_fraction() const;
	/// 3-sigma binomial acceptance of fraction_0 against born_p0 over the
	/// collapsed count.
	bool born_consistent(double sigmas = 3.0) const;
};

struct TrajectoryOutcome
{
	std::uint64_t index;
	int outcome; ///< 0, 1, or -1 when not collapsed by t_end
	std::optional<double> collapse_time;
	double final_z;
};

struct EnsembleOptions
{
	std::vector<double> checkpoints; ///< times at which z moments are collected
	double epsilon = kDefaultCollapseEpsilon;
	unsigned threads = 0; ///< 0: hardware concurrency
};

struct EnsembleResult
{
	EnsembleStats stats;
	std::vector<TrajectoryOutcome> outcomes;
};

/// Trajectory i uses stream (noise.seed, i). Results are independent of the
/// thread count.
EnsembleResult run_ensemble(const StateVector& initial, const HamiltonianSpec& spec,
	const NoiseConfig& noise, double t_end, std::size_t n_trajectories,
	const EnsembleOptions& options = {});

/// Moments of z over a set of samples (fixed summation order).
ZMoment z_moment(double t, std::span<const double> z);

struct LindbladCheckpoint
{
	double t;
	Matrix averaged; ///< E[|psi><psi|] over the ensemble
	Matrix lindblad; ///< RK4 solution of the master equation
	double deviation; ///< Frobenius norm of the difference
	double standard_error; ///< Monte-Carlo standard error of `averaged` (Frobenius)
};

/// Averages |psi><psi| over trajectories recorded on a common time grid and
/// compares against the Lindblad equation started from the averaged initial
/// density matrix.
std::vector<LindbladCheckpoint> compare_to_lindblad(std::span<const StochasticTrajectory> ensemble,
	const HamiltonianSpec& spec, double rate, double lindblad_dt = 1e-4);

struct SweepRow
{
	double gamma;
	RegimeInfo regime;
	CollapseReport collapse;
	BlochVector final_bloch;
};

std::vector<SweepRow> gamma_sweep(const StateVector& initial, const Matrix& H0, const Matrix& A,
	double omega, std::span<const double> gammas, const IntegratorConfig& config,
	double epsilon = kDefaultCollapseEpsilon);

}
