#pragma once

#include "collapse/quantum_core.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace collapse
{

struct IntegratorConfig
{
	/// Upper bound on the step; empty means default_dt(spec).
	std::optional<double> dt;
	double t_end = 1.0;
	std::size_t record_stride = 1;
	double norm_drift_tolerance = 1e-8;
};

/// 0.01 / max(omega, |gamma| (lambda0 - lambda1)).
double default_dt(const HamiltonianSpec& spec);

/// Uniform grid landing exactly on t_end: n = ceil(t_end / dt) steps of size t_end / n.
struct TimeGrid
{
	std::size_t steps;
	double step;
};
TimeGrid make_grid(double t_end, double dt);

struct Trajectory
{
	std::vector<double> times;
	std::vector<StateVector> states; ///< computational basis
	std::vector<BlochVector> bloch;  ///< eigenbasis of A
	std::vector<double> expA;
	std::vector<double> norm_drift;

	std::size_t size() const { return times.size(); }
	double max_norm_drift() const;
	std::vector<double> z() const;
};

struct CollapseReport
{
	bool collapsed = false;
	std::optional<int> target_index;
	std::optional<double> collapse_time;
};

/// dpsi/dt = [-i omega H0 + gamma (A - <A>)] psi.
Vector rhs_state(const StateVector& psi, const HamiltonianSpec& spec);

/// drho/dt = -i omega [H0, rho] + gamma {A, rho} - 2 gamma Tr(rho A) rho.
/// Only pure states are accepted (purity within 1e-8).
Matrix rhs_density(const DensityMatrix& rho, const HamiltonianSpec& spec);

/// Bloch-vector equations in the eigenbasis of A.
BlochVector rhs_bloch(const BlochVector& v, const TwoLevelParams& params, double omega, double gamma);

/// Classic RK4 on the state equation with renormalization after every step.
/// Throws NumericalError when the pre-renormalization drift exceeds
/// config.norm_drift_tolerance ("step size too large") or on NaN/Inf.
Trajectory integrate_deterministic(const StateVector& initial, const HamiltonianSpec& spec,
	const IntegratorConfig& config);

/// RK4 on the Bloch equations, no renormalization. Only `times`, `bloch`
/// and `expA` are filled; norm_drift holds | |v| - 1 |.
Trajectory integrate_bloch(const BlochVector& initial, const TwoLevelParams& params,
	double omega, double gamma, const IntegratorConfig& config);

enum class StrongCouplingForm
{
	derived, ///< z = tanh(gamma (l0 - l1) t), what the Bloch equations give
	literal  ///< z = tanh(gamma (l0 - l1) t / omega), exponent as printed
};

/// Closed-form z(t) in the strong-coupling limit, starting from z(0) = 0.
double analytic_z_strong_coupling(double t, double gamma, double omega, double lambda0,
	double lambda1, StrongCouplingForm form = StrongCouplingForm::derived);

enum class Regime
{
	oscillatory,
	exceptional,
	collapsing
};

const char* to_string(Regime r);

struct RegimeInfo
{
	Regime regime;
	std::complex<double> eig0; ///< eigenvalues of omega H0 + i gamma A
	std::complex<double> eig1;
};

RegimeInfo classify_regime(const HamiltonianSpec& spec);

inline constexpr double kDefaultCollapseEpsilon = 1e-3;

/// Collapsed iff |z| >= 1 - epsilon from some sample through the last one.
CollapseReport detect_collapse(const Trajectory& traj, double epsilon = kDefaultCollapseEpsilon);
CollapseReport detect_collapse(std::span<const double> times, std::span<const double> z,
	double epsilon = kDefaultCollapseEpsilon);

}
