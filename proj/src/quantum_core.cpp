#include "collapse/quantum_core.hpp"

#include "collapse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace collapse
{

namespace pauli
{
Matrix identity()
{
	return Matrix::Identity(2, 2);
}

Matrix x()
{
	Matrix m(2, 2);
	m << 0.0, 1.0, 1.0, 0.0;
	return m;
}

Matrix y()
{
	const cx_double I(0.0, 1.0);
	Matrix m(2, 2);
	m << 0.0, -I, I, 0.0;
	return m;
}

Matrix z()
{
	Matrix m(2, 2);
	m << 1.0, 0.0, 0.0, -1.0;
	return m;
}
}

StateVector::StateVector() : amp_{Vector::Unit(2, 0)}
{
}

StateVector StateVector::normalize(const Vector& phi)
{
	if(phi.size() < 2)
		throw ValidationError("state dimension must be at least 2");
	const double n2 = phi.squaredNorm();
	if(!(n2 > 0.0) || !std::isfinite(n2))
		throw ValidationError("null state");
	// already unit up to rounding: keep the bits so normalize is idempotent
	if(std::abs(n2 - 1.0) <= 16.0 * std::numeric_limits<double>::epsilon())
		return StateVector(phi);
	return StateVector(phi / std::sqrt(n2));
}

StateVector normalize(const Vector& phi)
{
	return StateVector::normalize(phi);
}

bool is_hermitian(const Matrix& m, double tol)
{
	if(m.rows() != m.cols())
		return false;
	for(Eigen::Index i = 0; i < m.rows(); ++i)
		for(Eigen::Index j = i; j < m.cols(); ++j)
			if(std::abs(m(i, j) - std::conj(m(j, i))) > tol)
				return false;
	return true;
}

DensityMatrix::DensityMatrix(Matrix entries) : rho_{std::move(entries)}
{
	if(rho_.rows() != rho_.cols() || rho_.rows() < 2)
		throw ValidationError("density matrix must be square with n >= 2");
	if(!is_hermitian(rho_))
		throw ValidationError("density matrix is not Hermitian");
	const cx_double tr = rho_.trace();
	if(std::abs(tr - 1.0) > kTraceTolerance)
	{
		std::ostringstream msg;
		msg << "density matrix trace " << tr.real() << " differs from 1";
		throw ValidationError(msg.str());
	}
}

DensityMatrix DensityMatrix::from_state(const StateVector& psi)
{
	return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

double DensityMatrix::purity() const
{
	return (rho_ * rho_).trace().real();
}

bool DensityMatrix::is_pure(double tol) const
{
	return std::abs(purity() - 1.0) <= tol;
}

double BlochVector::norm() const
{
	return std::sqrt(x * x + y * y + z * z);
}

std::vector<std::string> validate_hamiltonian(const Matrix& H0, const Matrix& A,
	double degeneracy_tolerance)
{
	std::vector<std::string> problems;
	if(H0.rows() != H0.cols())
		problems.emplace_back("H0 is not square");
	if(A.rows() != A.cols())
		problems.emplace_back("A is not square");
	if(!problems.empty())
		return problems;
	if(A.rows() < 2)
		problems.emplace_back("dimension must be at least 2");
	if(H0.rows() != A.rows())
		problems.emplace_back("H0 and A dimensions differ");
	if(!H0.allFinite())
		problems.emplace_back("H0 has non-finite entries");
	if(!A.allFinite())
		problems.emplace_back("A has non-finite entries");
	if(!is_hermitian(H0))
		problems.emplace_back("H0 is not Hermitian");
	if(!is_hermitian(A))
		problems.emplace_back("A is not Hermitian");
	if(A.rows() >= 2 && A.allFinite() && is_hermitian(A))
	{
		Eigen::SelfAdjointEigenSolver<Matrix> solver(A, Eigen::EigenvaluesOnly);
		const Eigen::VectorXd& ev = solver.eigenvalues();
		double min_gap = std::numeric_limits<double>::infinity();
		for(Eigen::Index i = 1; i < ev.size(); ++i)
			min_gap = std::min(min_gap, ev(i) - ev(i - 1));
		if(!(min_gap > degeneracy_tolerance))
			problems.emplace_back("degenerate collapse operator");
	}
	return problems;
}

HamiltonianSpec HamiltonianSpec::make(double omega, Matrix H0, Matrix A, double gamma,
	double degeneracy_tolerance)
{
	auto problems = validate_hamiltonian(H0, A, degeneracy_tolerance);
	if(!std::isfinite(omega))
		problems.emplace_back("omega is not finite");
	if(!std::isfinite(gamma))
		problems.emplace_back("gamma is not finite");
	if(!problems.empty())
	{
		std::string msg = problems.front();
		for(std::size_t i = 1; i < problems.size(); ++i)
			msg += "; " + problems[i];
		throw ValidationError(msg);
	}
	return HamiltonianSpec{omega, std::move(H0), std::move(A), gamma};
}

SortedEigensystem sorted_eigensystem(const Matrix& hermitian)
{
	Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
	const Eigen::Index n = hermitian.rows();
	SortedEigensystem out{Eigen::VectorXd(n), Matrix(n, n)};
	// Eigen sorts ascending; we want descending
	for(Eigen::Index k = 0; k < n; ++k)
	{
		out.values(k) = solver.eigenvalues()(n - 1 - k);
		Vector v = solver.eigenvectors().col(n - 1 - k);
		for(Eigen::Index i = 0; i < n; ++i)
		{
			if(std::abs(v(i)) > 1e-8)
			{
				v *= std::conj(v(i)) / std::abs(v(i));
				v(i) = std::abs(v(i));
				break;
			}
		}
		out.vectors.col(k) = v;
	}
	return out;
}

Eigenbasis to_eigenbasis_of_A(const HamiltonianSpec& spec, double degeneracy_tolerance)
{
	if(spec.A.rows() != 2 || spec.H0.rows() != 2)
		throw ValidationError("two-level parameterization requires n = 2");
	auto eig = sorted_eigensystem(spec.A);
	if(!(eig.values(0) - eig.values(1) > degeneracy_tolerance))
		throw ValidationError("degenerate collapse operator");
	const Matrix h = eig.vectors.adjoint() * spec.H0 * eig.vectors;
	TwoLevelParams p;
	p.a0 = h(0, 0).real();
	p.d0 = h(1, 1).real();
	p.b0r = h(0, 1).real();
	p.b0i = h(0, 1).imag();
	p.lambda0 = eig.values(0);
	p.lambda1 = eig.values(1);
	return Eigenbasis{p, std::move(eig.vectors)};
}

double expectation(const Matrix& A, const StateVector& psi)
{
	if(A.rows() != psi.dim() || A.cols() != psi.dim())
		throw ValidationError("dimension mismatch between operator and state");
	return psi.amplitudes().dot(A * psi.amplitudes()).real();
}

BlochVector state_to_bloch(const StateVector& psi)
{
	if(psi.dim() != 2)
		throw ValidationError("Bloch representation requires n = 2");
	const cx_double c0 = psi[0];
	const cx_double c1 = psi[1];
	// rho_01 = c0 conj(c1) = (x - i y) / 2
	const cx_double r01 = c0 * std::conj(c1);
	return BlochVector{2.0 * r01.real(), -2.0 * r01.imag(), std::norm(c0) - std::norm(c1)};
}

StateVector bloch_to_state(const BlochVector& v)
{
	const double r = v.norm();
	if(std::abs(r - 1.0) > 1e-8)
		throw ValidationError("Bloch vector of a pure state must have unit length");
	const double z = std::clamp(v.z / r, -1.0, 1.0);
	const double theta = std::acos(z);
	const double phi = std::atan2(v.y, v.x);
	Vector amp(2);
	amp << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
	return normalize(amp);
}

DensityMatrix bloch_to_density(const BlochVector& v)
{
	if(v.norm() > 1.0 + kBlochTolerance)
		throw ValidationError("Bloch vector lies outside the unit ball");
	const cx_double I(0.0, 1.0);
	Matrix rho(2, 2);
	rho << 0.5 * (1.0 + v.z), 0.5 * (v.x - I * v.y),
		0.5 * (v.x + I * v.y), 0.5 * (1.0 - v.z);
	return DensityMatrix(rho);
}

BlochVector density_to_bloch(const DensityMatrix& rho)
{
	if(rho.dim() != 2)
		throw ValidationError("Bloch representation requires n = 2");
	const Matrix& m = rho.entries();
	return BlochVector{2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

}
