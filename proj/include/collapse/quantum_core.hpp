#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace collapse
{

using cx_double = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-9;
inline constexpr double kPurityTolerance = 1e-8;
inline constexpr double kBlochTolerance = 1e-9;
inline constexpr double kDefaultDegeneracyTolerance = 1e-9;

namespace pauli
{
Matrix identity();
Matrix x();
Matrix y();
Matrix z();
}

/// Unit-norm pure state with n >= 2 complex amplitudes.
class StateVector
{
public:
	/// |0>, the first basis state of a two-level system.
	StateVector();

	/// Rescales phi to unit norm. Throws ValidationError("null state") for a
	/// zero (or non-finite) vector and for n < 2.
	static StateVector normalize(const Vector& phi);

	const Vector& amplitudes() const { return amp_; }
	Eigen::Index dim() const { return amp_.size(); }
	cx_double operator[](Eigen::Index i) const { return amp_(i); }

private:
	explicit StateVector(Vector amp) : amp_{std::move(amp)} {}
	Vector amp_;
};

/// Convenience wrapper around StateVector::normalize.
StateVector normalize(const Vector& phi);

/// Hermitian, unit-trace density matrix.
class DensityMatrix
{
public:
	/// Validates Hermiticity (1e-12) and unit trace (1e-9).
	explicit DensityMatrix(Matrix entries);

	static DensityMatrix from_state(const StateVector& psi);

	const Matrix& entries() const { return rho_; }
	Eigen::Index dim() const { return rho_.rows(); }
	double purity() const;
	bool is_pure(double tol = kPurityTolerance) const;

private:
	Matrix rho_;
};

struct BlochVector
{
	double x = 0.0;
	double y = 0.0;
	double z = 0.0;

	double norm() const;
};

/// H = hbar*omega*H0 + i*gamma*A with hbar = 1.
struct HamiltonianSpec
{
	double omega = 0.0;
	Matrix H0;
	Matrix A;
	double gamma = 0.0;

	/// Builds and validates; throws ValidationError listing every problem.
	static HamiltonianSpec make(double omega, Matrix H0, Matrix A, double gamma,
		double degeneracy_tolerance = kDefaultDegeneracyTolerance);

	Eigen::Index dim() const { return A.rows(); }
};

/// Returns every validation problem (empty when valid).
std::vector<std::string> validate_hamiltonian(const Matrix& H0, const Matrix& A,
	double degeneracy_tolerance = kDefaultDegeneracyTolerance);

bool is_hermitian(const Matrix& m, double tol = kHermitianTolerance);

/// H0 entries and A eigenvalues in the eigenbasis of A (lambda0 > lambda1).
struct TwoLevelParams
{
	double a0 = 0.0;
	double b0r = 0.0;
	double b0i = 0.0;
	double d0 = 0.0;
	double lambda0 = 1.0;
	double lambda1 = -1.0;

	double gap() const { return lambda0 - lambda1; }
};

/// Eigenvalues in descending order and matching eigenvectors as columns.
/// Each eigenvector's phase is fixed so its first non-negligible component is
/// real and positive.
struct SortedEigensystem
{
	Eigen::VectorXd values;
	Matrix vectors;
};

SortedEigensystem sorted_eigensystem(const Matrix& hermitian);

struct Eigenbasis
{
	TwoLevelParams params;
	Matrix basis; ///< columns: eigenvectors of A for lambda0, lambda1
};

/// Rewrites H0 in the eigenbasis of A. Throws ValidationError for n != 2 or
/// "degenerate collapse operator".
Eigenbasis to_eigenbasis_of_A(const HamiltonianSpec& spec,
	double degeneracy_tolerance = kDefaultDegeneracyTolerance);

/// <psi|A|psi>.
double expectation(const Matrix& A, const StateVector& psi);

BlochVector state_to_bloch(const StateVector& psi);
/// Pure state on the sphere with the given Bloch direction (|v| must be 1).
StateVector bloch_to_state(const BlochVector& v);
DensityMatrix bloch_to_density(const BlochVector& v);
BlochVector density_to_bloch(const DensityMatrix& rho);

}
