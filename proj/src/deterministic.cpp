#include "collapse/deterministic.hpp"

#include "collapse/detail/kernels.hpp"
#include "collapse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace collapse
{

namespace
{

void check_config(const IntegratorConfig& config)
{
	if(config.dt && !(*config.dt > 0.0))
		throw ValidationError("dt must be positive");
	if(!(config.t_end > 0.0) || !std::isfinite(config.t_end))
		throw ValidationError("t_end must be positive");
	if(config.record_stride < 1)
		throw ValidationError("record_stride must be at least 1");
	if(!(config.norm_drift_tolerance > 0.0))
		throw ValidationError("norm_drift_tolerance must be positive");
}

double spectral_width(const Matrix& A)
{
	Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
	const auto& ev = solver.eigenvalues();
	return ev(ev.size() - 1) - ev(0);
}

[[noreturn]] void throw_drift(double t, double drift, double tol, double h)
{
	std::ostringstream msg;
	msg << "step size too large: norm drift " << drift << " exceeds tolerance " << tol
		<< " at t=" << t << " (step " << h << ")";
	throw NumericalError(msg.str());
}

[[noreturn]] void throw_non_finite(double t)
{
	std::ostringstream msg;
	msg << "non-finite state encountered at t=" << t;
	throw NumericalError(msg.str());
}

}

double default_dt(const HamiltonianSpec& spec)
{
	const double rate = std::max(std::abs(spec.omega), std::abs(spec.gamma) * spectral_width(spec.A));
	return rate > 0.0 ? 0.01 / rate : 0.01;
}

TimeGrid make_grid(double t_end, double dt)
{
	if(!(dt > 0.0) || !(t_end > 0.0))
		throw ValidationError("time grid needs positive dt and t_end");
	const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / dt - 1e-9)));
	return TimeGrid{steps, t_end / static_cast<double>(steps)};
}

double Trajectory::max_norm_drift() const
{
	double m = 0.0;
	for(double d : norm_drift)
		m = std::max(m, d);
	return m;
}

std::vector<double> Trajectory::z() const
{
	std::vector<double> out;
	out.reserve(bloch.size());
	for(const auto& b : bloch)
		out.push_back(b.z);
	return out;
}

Vector rhs_state(const StateVector& psi, const HamiltonianSpec& spec)
{
	if(spec.H0.rows() != psi.dim() || spec.A.rows() != psi.dim())
		throw ValidationError("dimension mismatch between Hamiltonian and state");
	return detail::state_rhs<Vector>(psi.amplitudes(), spec.H0, spec.A, spec.omega, spec.gamma);
}

Matrix rhs_density(const DensityMatrix& rho, const HamiltonianSpec& spec)
{
	if(spec.H0.rows() != rho.dim() || spec.A.rows() != rho.dim())
		throw ValidationError("dimension mismatch between Hamiltonian and density matrix");
	if(!rho.is_pure())
		throw ValidationError("rhs_density requires a pure state (purity 1)");
	const Matrix& r = rho.entries();
	const cx_double I(0.0, 1.0);
	const double trA = (r * spec.A).trace().real();
	Matrix out = -I * spec.omega * (spec.H0 * r - r * spec.H0);
	out += spec.gamma * (spec.A * r + r * spec.A);
	out -= 2.0 * spec.gamma * trA * r;
	return out;
}

BlochVector rhs_bloch(const BlochVector& v, const TwoLevelParams& p, double omega, double gamma)
{
	const double collapse = gamma * p.gap();
	const double split = p.a0 - p.d0;
	return BlochVector{
		-omega * (split * v.y + 2.0 * p.b0i * v.z) - collapse * v.x * v.z,
		omega * (split * v.x - 2.0 * p.b0r * v.z) - collapse * v.y * v.z,
		omega * (2.0 * p.b0i * v.x + 2.0 * p.b0r * v.y) - collapse * (v.z * v.z - 1.0)};
}

Trajectory integrate_deterministic(const StateVector& initial, const HamiltonianSpec& spec,
	const IntegratorConfig& config)
{
	check_config(config);
	if(initial.dim() != 2 || spec.dim() != 2)
		throw ValidationError("deterministic integration supports n = 2 only");
	const Eigenbasis eb = to_eigenbasis_of_A(spec);
	const TimeGrid grid = make_grid(config.t_end, config.dt.value_or(default_dt(spec)));

	const Eigen::Matrix2cd H0 = spec.H0;
	const Eigen::Matrix2cd A = spec.A;
	const Eigen::Matrix2cd to_eig = eb.basis.adjoint();

	Trajectory traj;
	const std::size_t n_samples = grid.steps / config.record_stride + 2;
	traj.times.reserve(n_samples);
	traj.states.reserve(n_samples);
	traj.bloch.reserve(n_samples);
	traj.expA.reserve(n_samples);
	traj.norm_drift.reserve(n_samples);

	auto record = [&](double t, const Eigen::Vector2cd& psi, double drift) {
		const StateVector s = normalize(Vector(psi));
		traj.times.push_back(t);
		traj.bloch.push_back(state_to_bloch(normalize(Vector(to_eig * psi))));
		traj.expA.push_back(psi.dot(A * psi).real());
		traj.norm_drift.push_back(drift);
		traj.states.push_back(s);
	};

	Eigen::Vector2cd psi = initial.amplitudes();
	record(0.0, psi, 0.0);
	double drift_since = 0.0;
	for(std::size_t k = 1; k <= grid.steps; ++k)
	{
		const double t = static_cast<double>(k) * grid.step;
		const Eigen::Vector2cd next = detail::rk4_step<Eigen::Vector2cd>(psi, H0, A, spec.omega,
			spec.gamma, grid.step);
		if(!next.allFinite())
			throw_non_finite(t);
		const double norm = next.norm();
		const double drift = std::abs(norm - 1.0);
		if(!(drift <= config.norm_drift_tolerance))
			throw_drift(t, drift, config.norm_drift_tolerance, grid.step);
		psi = next / norm;
		drift_since = std::max(drift_since, drift);
		if(k % config.record_stride == 0 || k == grid.steps)
		{
			record(t, psi, drift_since);
			drift_since = 0.0;
		}
	}
	return traj;
}

Trajectory integrate_bloch(const BlochVector& initial, const TwoLevelParams& params,
	double omega, double gamma, const IntegratorConfig& config)
{
	check_config(config);
	if(!(params.lambda0 - params.lambda1 > kDefaultDegeneracyTolerance))
		throw ValidationError("degenerate collapse operator");
	const double rate = std::max(std::abs(omega), std::abs(gamma) * params.gap());
	const TimeGrid grid = make_grid(config.t_end, config.dt.value_or(rate > 0.0 ? 0.01 / rate : 0.01));
	const double h = grid.step;

	using V3 = Eigen::Vector3d;
	auto f = [&](const V3& v) {
		const BlochVector d = rhs_bloch(BlochVector{v(0), v(1), v(2)}, params, omega, gamma);
		return V3(d.x, d.y, d.z);
	};
	const double mid = 0.5 * (params.lambda0 + params.lambda1);
	const double half = 0.5 * params.gap();

	Trajectory traj;
	auto record = [&](double t, const V3& v) {
		traj.times.push_back(t);
		traj.bloch.push_back(BlochVector{v(0), v(1), v(2)});
		traj.expA.push_back(mid + half * v(2));
		traj.norm_drift.push_back(std::abs(v.norm() - 1.0));
	};

	V3 v(initial.x, initial.y, initial.z);
	record(0.0, v);
	for(std::size_t k = 1; k <= grid.steps; ++k)
	{
		const double t = static_cast<double>(k) * h;
		const V3 k1 = f(v);
		const V3 k2 = f(v + 0.5 * h * k1);
		const V3 k3 = f(v + 0.5 * h * k2);
		const V3 k4 = f(v + h * k3);
		const V3 next = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
		if(!next.allFinite())
			throw_non_finite(t);
		const double step_drift = std::abs(next.norm() - v.norm());
		if(!(step_drift <= config.norm_drift_tolerance))
			throw_drift(t, step_drift, config.norm_drift_tolerance, h);
		v = next;
		if(k % config.record_stride == 0 || k == grid.steps)
			record(t, v);
	}
	return traj;
}

double analytic_z_strong_coupling(double t, double gamma, double omega, double lambda0,
	double lambda1, StrongCouplingForm form)
{
	double rate = gamma * (lambda0 - lambda1);
	if(form == StrongCouplingForm::literal)
	{
		if(omega == 0.0)
			throw ValidationError("literal strong-coupling form divides by omega");
		rate /= omega;
	}
	const double e = std::exp(-2.0 * rate * t);
	if(!std::isfinite(e))
		return rate > 0.0 ? 1.0 : -1.0;
	return (1.0 - e) / (1.0 + e);
}

const char* to_string(Regime r)
{
	switch(r)
	{
	case Regime::oscillatory:
		return "oscillatory";
	case Regime::exceptional:
		return "exceptional";
	case Regime::collapsing:
		return "collapsing";
	}
	return "unknown";
}

RegimeInfo classify_regime(const HamiltonianSpec& spec)
{
	if(spec.dim() != 2)
		throw ValidationError("regime classification supports n = 2 only");
	const cx_double I(0.0, 1.0);
	const Eigen::Matrix2cd M = spec.omega * spec.H0 + I * spec.gamma * spec.A;
	const cx_double half_trace = 0.5 * M.trace();
	// traceless part K has eigenvalues +-mu with mu^2 = K00^2 + K01 K10
	const cx_double k00 = M(0, 0) - half_trace;
	const cx_double mu = std::sqrt(k00 * k00 + M(0, 1) * M(1, 0));
	const double k_norm = std::sqrt(std::norm(k00) * 2.0 + std::norm(M(0, 1)) + std::norm(M(1, 0)));

	constexpr double tol = 1e-10;
	Regime regime = Regime::oscillatory;
	if(k_norm > tol && std::abs(mu) <= tol)
		regime = Regime::exceptional;
	else if(std::abs(mu.imag()) > tol)
		regime = Regime::collapsing;
	return RegimeInfo{regime, half_trace + mu, half_trace - mu};
}

CollapseReport detect_collapse(std::span<const double> times, std::span<const double> z,
	double epsilon)
{
	if(times.empty() || times.size() != z.size())
		throw ValidationError("collapse detection needs a non-empty trajectory");
	const double threshold = 1.0 - epsilon;
	std::size_t first_sustained = 0;
	for(std::size_t i = z.size(); i-- > 0;)
	{
		if(!(std::abs(z[i]) >= threshold))
		{
			first_sustained = i + 1;
			break;
		}
	}
	CollapseReport report;
	if(first_sustained >= z.size())
		return report;
	report.collapsed = true;
	report.target_index = z.back() > 0.0 ? 0 : 1;
	report.collapse_time = times[first_sustained];
	return report;
}

CollapseReport detect_collapse(const Trajectory& traj, double epsilon)
{
	const auto z = traj.z();
	return detect_collapse(traj.times, z, epsilon);
}

}
