// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "collapse/analysis.hpp"
#include "collapse/config.hpp"
#include "collapse/deterministic.hpp"
#include "collapse/stochastic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace collapse;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
	return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict
{
	bool pass = true;
	std::ostringstream detail;

	void require(bool ok, const std::string& what)
	{
		if(!detail.str().empty())
			detail << "; ";
		detail << (ok ? "" : "[x] ") << what;
		pass = pass && ok;
	}
};

std::string num(double v, int precision = 6)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.*g", precision, v);
	return buf;
}

StateVector plus()
{
	return normalize(Eigen::Vector2cd(1.0, 1.0));
}

StateVector tilted()
{
	const double th = std::numbers::pi / 6.0;
	return normalize(Eigen::Vector2cd(std::cos(th), std::sin(th)));
}

HamiltonianSpec fig1(double gamma)
{
	return HamiltonianSpec::make(1.0, pauli::x(), pauli::z(), gamma);
}

HamiltonianSpec pure_collapse()
{
	return HamiltonianSpec::make(1.0, Matrix::Zero(2, 2), pauli::z(), 0.0);
}

IntegratorConfig horizon(double t_end, std::optional<double> dt = std::nullopt)
{
	IntegratorConfig c;
	c.t_end = t_end;
	c.dt = dt;
	return c;
}

double distance(const BlochVector& a, const BlochVector& b)
{
	return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

Eigen::Vector2cd random_state(std::mt19937_64& rng)
{
	std::normal_distribution<double> n;
	Eigen::Vector2cd v(cx_double(n(rng), n(rng)), cx_double(n(rng), n(rng)));
	return v / v.norm();
}

Matrix random_hermitian(std::mt19937_64& rng, double scale)
{
	std::uniform_real_distribution<double> u(-scale, scale);
	Matrix m(2, 2);
	const cx_double off(u(rng), u(rng));
	m << u(rng), off, std::conj(off), u(rng);
	return m;
}

// first time z crosses the threshold (sign-aware), or NaN
double first_time(const Trajectory& traj, double threshold, double sign)
{
	for(std::size_t i = 0; i < traj.size(); ++i)
		if(sign * traj.bloch[i].z >= threshold)
			return traj.times[i];
	return std::nan("");
}

Verdict fig1_reproduction()
{
	Verdict v;
	const auto t0 = Clock::now();

	const auto up = integrate_deterministic(plus(), fig1(100.0), horizon(0.05));
	const double t_up = first_time(up, 0.999, 1.0);
	v.require(up.bloch.back().z >= 0.999 && t_up <= 0.05,
		"gamma=100: z(0.05)=" + num(up.bloch.back().z, 8) + ", z>=0.999 from t=" + num(t_up, 4));

	const auto down = integrate_deterministic(plus(), fig1(-100.0), horizon(0.05));
	const double t_down = first_time(down, 0.999, -1.0);
	v.require(down.bloch.back().z <= -0.999 && t_down <= 0.05,
		"gamma=-100: z(0.05)=" + num(down.bloch.back().z, 8));

	const auto mid = integrate_deterministic(plus(), fig1(2.0), horizon(3.0));
	double z_max = -1.0;
	for(const auto& b : mid.bloch)
		z_max = std::max(z_max, b.z);
	v.require(first_time(mid, 0.99, 1.0) <= 3.0,
		"gamma=2: z(3)=" + num(mid.bloch.back().z, 6) + ", max z on [0,3]=" + num(z_max, 6) + " (needs >=0.99)");

	const double T = 2.0 * std::numbers::pi / std::sqrt(3.0);
	const auto weak = integrate_deterministic(plus(), fig1(0.5), horizon(T));
	const double back = distance(weak.bloch.back(), {1.0, 0.0, 0.0});
	const bool collapsed = detect_collapse(weak).collapsed;
	v.require(back < 1e-3 && !collapsed, "gamma=0.5: |v(T)-(1,0,0)|=" + num(back, 3) + " at T=" + num(T, 6) +
		(collapsed ? ", collapsed" : ", no collapse"));

	const double elapsed = seconds_since(t0);
	v.require(elapsed < 1.0, "runtime " + num(elapsed, 3) + " s");
	return v;
}

Verdict strong_coupling()
{
	Verdict v;
	const auto t0 = Clock::now();
	const auto traj = integrate_deterministic(plus(), fig1(100.0), horizon(0.05));
	double sup = 0.0;
	for(std::size_t i = 0; i < traj.size(); ++i)
		sup = std::max(sup, std::abs(traj.bloch[i].z -
			analytic_z_strong_coupling(traj.times[i], 100.0, 1.0, 1.0, -1.0)));
	v.require(sup <= 1e-3, "sup|z - tanh(200 t)| on [0,0.05] = " + num(sup, 3) + " (" +
		std::to_string(traj.size()) + " samples)");
	const double elapsed = seconds_since(t0);
	v.require(elapsed < 1.0, "runtime " + num(elapsed, 3) + " s");
	return v;
}

Verdict born_rule()
{
	Verdict v;
	const auto t0 = Clock::now();
	const std::size_t n = 10'000;
	struct Case
	{
		const char* name;
		StateVector psi;
		double p0;
		std::uint64_t seed;
	};
	for(const auto& c : {Case{"|+>", plus(), 0.5, 101}, Case{"cos(pi/6)|0>+sin(pi/6)|1>", tilted(), 0.75, 202}})
	{
		const auto r = run_ensemble(c.psi, pure_collapse(), NoiseConfig{10.0, c.seed, Scheme::ito, 1e-3}, 2.0, n);
		const auto& s = r.stats;
		const double sigma = std::sqrt(c.p0 * (1.0 - c.p0) / static_cast<double>(n));
		const double f = s.fraction_0.value_or(std::nan(""));
		v.require(std::abs(f - c.p0) < 3.0 * sigma,
			std::string(c.name) + ": fraction_0=" + num(f, 5) + " vs " + num(c.p0) + " +- " + num(3.0 * sigma, 3));
		v.require(s.uncollapsed_fraction() < 0.01, "uncollapsed " + num(s.uncollapsed_fraction(), 3));
	}
	const double elapsed = seconds_since(t0);
	v.require(elapsed < 60.0, "runtime " + num(elapsed, 3) + " s");
	return v;
}

Verdict lindblad_oracle()
{
	Verdict v;
	const auto t0 = Clock::now();
	const std::size_t n = 10'000;
	const double rate = 1.0;
	const NoiseConfig noise{rate, 303, Scheme::ito, 1e-3};
	std::vector<StochasticTrajectory> ens;
	ens.reserve(n);
	for(std::size_t i = 0; i < n; ++i)
		ens.push_back(simulate_stochastic(plus(), pure_collapse(), noise, 0.5, RecordOptions{250, i}));
	const auto cmp = compare_to_lindblad(ens, pure_collapse(), rate);
	const auto& last = cmp.back();
	const double expected = 0.5 * std::exp(-2.0 * rate * 0.5);
	const double got = std::abs(last.averaged(0, 1));
	const double rel = std::abs(got - expected) / expected;
	v.require(rel < 0.05, "|rho01(0.5)|=" + num(got, 5) + " vs " + num(expected, 5) + ", rel err " + num(rel, 3));
	v.require(std::abs(std::abs(last.lindblad(0, 1)) - expected) < 1e-9,
		"master equation |rho01|=" + num(std::abs(last.lindblad(0, 1)), 8));
	v.detail << "; runtime " << num(seconds_since(t0), 3) << " s";
	return v;
}

Verdict scheme_equivalence()
{
	Verdict v;
	const auto t0 = Clock::now();
	const std::size_t n = 10'000;
	EnsembleOptions opts;
	opts.checkpoints = {0.1};
	const auto ito = run_ensemble(plus(), pure_collapse(), NoiseConfig{10.0, 404, Scheme::ito, 1e-4}, 0.1, n, opts);
	const auto str = run_ensemble(plus(), pure_collapse(), NoiseConfig{10.0, 505, Scheme::stratonovich, 1e-4}, 0.1,
		n, opts);
	const auto& a = ito.stats.z_moments.front();
	const auto& b = str.stats.z_moments.front();
	const double se_mean = std::hypot(a.se_mean, b.se_mean);
	const double se_var = std::hypot(a.se_variance, b.se_variance);
	v.require(std::abs(a.mean - b.mean) <= 3.0 * se_mean,
		"mean z(0.1): ito " + num(a.mean, 4) + ", stratonovich " + num(b.mean, 4) + ", |diff| " +
			num(std::abs(a.mean - b.mean), 3) + " <= " + num(3.0 * se_mean, 3));
	v.require(std::abs(a.variance - b.variance) <= 3.0 * se_var,
		"var z(0.1): ito " + num(a.variance, 5) + ", stratonovich " + num(b.variance, 5) + ", |diff| " +
			num(std::abs(a.variance - b.variance), 3) + " <= " + num(3.0 * se_var, 3));
	v.detail << "; runtime " << num(seconds_since(t0), 3) << " s";
	return v;
}

Verdict invariant_suite()
{
	Verdict v;
	std::mt19937_64 rng(606);
	std::uniform_real_distribution<double> u(-1.0, 1.0);

	// norm drift: halving dt shrinks the per-step drift by >= 16
	{
		IntegratorConfig c = horizon(3.0, 0.01);
		c.norm_drift_tolerance = 1e-5;
		const double coarse = integrate_deterministic(plus(), fig1(2.0), c).max_norm_drift();
		c.dt = 0.005;
		const double fine = integrate_deterministic(plus(), fig1(2.0), c).max_norm_drift();
		v.require(coarse / fine >= 16.0, "drift ratio dt/(dt/2) = " + num(coarse / fine, 4));
	}

	// random specs: sphere invariance and state-vs-Bloch agreement
	double worst_sphere = 0.0;
	double worst_repr = 0.0;
	int specs = 0;
	while(specs < 100)
	{
		const Matrix H0 = random_hermitian(rng, 1.0);
		const Matrix A = random_hermitian(rng, 2.0);
		if(!validate_hamiltonian(H0, A, 0.2).empty())
			continue;
		++specs;
		const auto spec = HamiltonianSpec::make(1.0 + 0.5 * u(rng), H0, A, 1.5 * u(rng));
		const auto eb = to_eigenbasis_of_A(spec);
		const auto c = horizon(3.0, 1e-3);
		const auto s = integrate_deterministic(normalize(random_state(rng)), spec, c);
		const auto b = integrate_bloch(s.bloch.front(), eb.params, spec.omega, spec.gamma, c);
		for(std::size_t i = 0; i < b.size(); ++i)
		{
			const auto& w = b.bloch[i];
			worst_sphere = std::max(worst_sphere, std::abs(w.x * w.x + w.y * w.y + w.z * w.z - 1.0));
			worst_repr = std::max(worst_repr, distance(w, s.bloch[i]));
		}
	}
	v.require(worst_sphere < 1e-7, "sphere | |v|^2-1 | max " + num(worst_sphere, 3));
	v.require(worst_repr < 1e-6, "state vs Bloch sup " + num(worst_repr, 3));

	// martingale of <A> with H0 = 0
	{
		const double rate = 10.0;
		const double dt = 1e-4;
		const std::size_t n = 10'000;
		EnsembleOptions opts;
		opts.checkpoints = {0.1 / rate, 0.5 / rate, 1.0 / rate};
		const auto r = run_ensemble(tilted(), pure_collapse(), NoiseConfig{rate, 707, Scheme::ito, dt}, 1.0 / rate, n,
			opts);
		bool ok = true;
		double worst = 0.0;
		for(const auto& m : r.stats.z_moments)
		{
			const double sd = std::sqrt(m.variance);
			const double score = std::abs(m.mean - 0.5) / (sd / std::sqrt(static_cast<double>(n)));
			worst = std::max(worst, score);
			ok = ok && score <= 3.0;
		}
		v.require(ok, "martingale max |mean-<A>0|/(sd/sqrt N) = " + num(worst, 3));
	}

	// eigenstates of A are fixed when omega = 0
	{
		double worst = 0.0;
		for(int k = 0; k < 200; ++k)
		{
			Matrix A = Matrix::Zero(2, 2);
			A(0, 0) = 2.0 * u(rng);
			A(1, 1) = A(0, 0) - 0.1 - std::abs(u(rng));
			const auto spec = HamiltonianSpec::make(0.0, random_hermitian(rng, 1.0), A, 10.0 * u(rng));
			for(int j = 0; j < 2; ++j)
			{
				Vector e = Vector::Zero(2);
				e(j) = std::polar(1.0, 3.0 * u(rng));
				worst = std::max(worst, rhs_state(normalize(e), spec).norm());
				const auto traj = integrate_deterministic(normalize(e), spec, horizon(1.0));
				worst = std::max(worst, std::abs(std::abs(traj.bloch.back().z) - 1.0));
			}
		}
		v.require(worst < 1e-14, "eigenstate fixed points max " + num(worst, 3));
	}

	// sign of gamma alone picks the target at gamma * gap / omega >= 50
	{
		int agree = 0;
		int tested = 0;
		while(tested < 100)
		{
			const auto psi = normalize(random_state(rng));
			if(std::abs(expectation(pauli::z(), psi)) >= 0.99)
				continue;
			++tested;
			bool ok = true;
			for(double g : {25.0, -25.0, 100.0, -100.0})
			{
				const auto rep = detect_collapse(integrate_deterministic(psi, fig1(g), horizon(1.0)));
				ok = ok && rep.collapsed && *rep.target_index == (g > 0 ? 0 : 1);
			}
			agree += ok;
		}
		v.require(agree == tested, "sign selection " + std::to_string(agree) + "/" + std::to_string(tested));
	}
	return v;
}

Verdict degeneracy_rejection()
{
	Verdict v;
	std::mt19937_64 rng(808);
	std::uniform_real_distribution<double> u(-1.0, 1.0);
	int refused = 0;
	const int trials = 200;
	for(int k = 0; k < trials; ++k)
	{
		// A = c I + small Hermitian perturbation with eigenvalue gap < 1e-9
		const double c = 3.0 * u(rng);
		Matrix P = random_hermitian(rng, 1.0);
		P -= 0.5 * P.trace() * Matrix::Identity(2, 2);
		const double gap = 2.0 * std::sqrt(std::max(0.0, P.determinant().real() * -1.0));
		const double want = 0.99e-9 * std::abs(u(rng));
		const Matrix A = c * Matrix::Identity(2, 2) + (gap > 0.0 ? want / gap : 0.0) * P;
		std::ostringstream yaml;
		yaml.precision(17);
		yaml << "mode: deterministic\nhamiltonian:\n  H0: sigma_x\n  A: [[" << A(0, 0).real() << ", [" << A(0, 1).real()
			 << ", " << A(0, 1).imag() << "]], [[" << A(1, 0).real() << ", " << A(1, 0).imag() << "], "
			 << A(1, 1).real() << "]]\n  gamma: 1\ninitial: {state: plus}\nt_end: 1\n";
		try
		{
			parse_config_text(yaml.str(), "generated");
		}
		catch(const ConfigError& e)
		{
			for(const auto& msg : e.errors())
				if(msg.find("degenerate collapse operator") != std::string::npos)
				{
					++refused;
					break;
				}
		}
	}
	v.require(refused == trials, "refused " + std::to_string(refused) + "/" + std::to_string(trials) +
		" configs with gap < 1e-9 (\"degenerate collapse operator\")");

	bool identity_refused = false;
	try
	{
		parse_config_text("mode: deterministic\nhamiltonian: {H0: sigma_x, A: identity, gamma: 1}\n"
						  "initial: {state: plus}\nt_end: 1\n");
	}
	catch(const ConfigError& e)
	{
		identity_refused = std::string(e.what()).find("degenerate collapse operator") != std::string::npos;
	}
	v.require(identity_refused, "A = identity refused");
	return v;
}

}

int main()
{
	struct Criterion
	{
		int id;
		const char* name;
		std::function<Verdict()> run;
	};
	const std::vector<Criterion> criteria{
		{1, "deterministic collapse panels", fig1_reproduction},
		{2, "strong-coupling closed form", strong_coupling},
		{3, "Born rule from the CSL ensemble", born_rule},
		{4, "Lindblad oracle for the averaged state", lindblad_oracle},
		{5, "Ito / Stratonovich equivalence", scheme_equivalence},
		{6, "invariant suite", invariant_suite},
		{7, "degeneracy rejection", degeneracy_rejection},
	};
	int failed = 0;
	for(const auto& c : criteria)
	{
		Verdict v;
		try
		{
			v = c.run();
		}
		catch(const std::exception& e)
		{
			v.require(false, std::string("exception: ") + e.what());
		}
		failed += !v.pass;
		std::printf("%s  criterion %d: %s -- %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.str().c_str());
		std::fflush(stdout);
	}
	std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
	return failed ? 1 : 0;
}
