#pragma once

// Dense complex kernels shared by every other module.
//
// Composite index convention: on H_1 (x) H_2 (x) ... (x) H_k the basis index is
// the mixed-radix number with the FIRST factor varying slowest, i.e. for two
// factors i = a * dB + b. Every routine in the library relies on this.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "purcorr/errors.hpp"

namespace purcorr {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace tol {
inline constexpr double kScalar = 1e-9;          ///< absolute, scalar comparisons
inline constexpr double kReconstruction = 1e-10; ///< relative Frobenius, matrix reconstructions
inline constexpr double kHermitian = 1e-9;       ///< scale-relative Hermiticity defect
inline constexpr double kUnitary = 1e-10;        ///< ||U^dagger U - I||_F
} // namespace tol

/// Dimensions of a bipartite space H_A (x) H_B.
struct DimPair {
	std::size_t dA = 1;
	std::size_t dB = 1;

	constexpr std::size_t total() const noexcept { return dA * dB; }
	friend constexpr bool operator==(const DimPair&, const DimPair&) = default;
};

enum class Subsystem { A, B };

/// Eigenvalues descending; eigenvectors are the matching columns of a unitary.
struct EigDecomposition {
	RealVector eigenvalues;
	ComplexMatrix eigenvectors;
};

/// M = U diag(sigma) V^dagger with U, V square unitaries and sigma descending.
struct SvdDecomposition {
	RealVector singular_values;
	ComplexMatrix left;
	ComplexMatrix right;
};

/// Hilbert-Schmidt orthonormal operator basis on one factor.
using OperatorBasis = std::vector<ComplexMatrix>;

// ---------------------------------------------------------------------------
// Predicates and scalar helpers

inline bool all_finite(const ComplexMatrix& m) {
	for (Index j = 0; j < m.cols(); ++j)
		for (Index i = 0; i < m.rows(); ++i)
			if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
	return true;
}

inline bool is_square(const ComplexMatrix& m) { return m.rows() == m.cols(); }

/// ||M - M^dagger||_F <= tol * max(1, ||M||_F)
inline bool is_hermitian(const ComplexMatrix& m, double tolerance = tol::kHermitian) {
	if (!is_square(m)) return false;
	return (m - m.adjoint()).norm() <= tolerance * std::max(1.0, m.norm());
}

inline bool is_unitary(const ComplexMatrix& u, double tolerance = tol::kUnitary) {
	if (!is_square(u)) return false;
	return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() <= tolerance;
}

inline Complex trace(const ComplexMatrix& m) { return m.trace(); }

/// ||reference - approx||_F / ||reference||_F, falling back to the absolute error for a zero reference.
inline double relative_residual(const ComplexMatrix& reference, const ComplexMatrix& approx) {
	const double denom = reference.norm();
	const double err = (reference - approx).norm();
	return denom > 0.0 ? err / denom : err;
}

inline std::size_t product(std::span<const std::size_t> dims) {
	return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

// ---------------------------------------------------------------------------
// Tensor product and partial traces

/// Kronecker product (column vectors included): (A (x) B)[a*rB + b, a'*cB + b'] = A[a,a'] * B[b,b'].
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
	const Index rB = b.rows(), cB = b.cols();
	ComplexMatrix out(a.rows() * rB, a.cols() * cB);
	for (Index i = 0; i < a.rows(); ++i)
		for (Index j = 0; j < a.cols(); ++j)
			out.block(i * rB, j * cB, rB, cB) = a(i, j) * b;
	return out;
}

namespace detail {

/// Row-major strides of a mixed-radix layout (first factor slowest).
inline std::vector<std::size_t> strides(std::span<const std::size_t> dims) {
	std::vector<std::size_t> s(dims.size(), 1);
	for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
	return s;
}

/// Offsets into the full index for every value of the sub-index spanned by `factors`
/// (taken in the given order, first slowest).
inline std::vector<std::size_t> sub_offsets(std::span<const std::size_t> dims, std::span<const std::size_t> factors) {
	const auto stride = strides(dims);
	std::size_t count = 1;
	for (auto f : factors) count *= dims[f];
	std::vector<std::size_t> offsets(count, 0);
	std::vector<std::size_t> digit(factors.size(), 0);
	for (std::size_t n = 0; n < count; ++n) {
		std::size_t off = 0;
		for (std::size_t k = 0; k < factors.size(); ++k) off += digit[k] * stride[factors[k]];
		offsets[n] = off;
		for (std::size_t k = factors.size(); k-- > 0;) {
			if (++digit[k] < dims[factors[k]]) break;
			digit[k] = 0;
		}
	}
	return offsets;
}

} // namespace detail

/// Traces out every factor not listed in `keep`; kept factors stay in their original order.
inline ComplexMatrix multi_partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                         std::span<const std::size_t> keep) {
	if (keep.empty()) throw DimensionError("multi_partial_trace: keep set is empty");
	const std::size_t n = product(dims);
	if (!is_square(m) || static_cast<std::size_t>(m.rows()) != n)
		throw DimensionError("multi_partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
		                     std::to_string(m.cols()) + ", factor dimensions multiply to " + std::to_string(n));

	std::vector<bool> kept(dims.size(), false);
	for (auto k : keep) {
		if (k >= dims.size()) throw DimensionError("multi_partial_trace: factor index out of range");
		kept[k] = true;
	}
	std::vector<std::size_t> keep_sorted, traced;
	for (std::size_t f = 0; f < dims.size(); ++f) (kept[f] ? keep_sorted : traced).push_back(f);

	const auto keep_off = detail::sub_offsets(dims, keep_sorted);
	const auto trace_off = detail::sub_offsets(dims, traced);
	const Index k = static_cast<Index>(keep_off.size());
	ComplexMatrix out = ComplexMatrix::Zero(k, k);
	for (Index c = 0; c < k; ++c)
		for (Index r = 0; r < k; ++r) {
			Complex acc{0.0, 0.0};
			for (auto t : trace_off)
				acc += m(static_cast<Index>(keep_off[r] + t), static_cast<Index>(keep_off[c] + t));
			out(r, c) = acc;
		}
	return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, DimPair dims, Subsystem keep) {
	const std::size_t d[2] = {dims.dA, dims.dB};
	const std::size_t k[1] = {keep == Subsystem::A ? 0u : 1u};
	return multi_partial_trace(m, d, k);
}

/// Reorders the tensor factors of a state vector: new factor i is old factor `order[i]`.
inline ComplexVector permute_factors(const ComplexVector& amps, std::span<const std::size_t> dims,
                                     std::span<const std::size_t> order) {
	if (order.size() != dims.size()) throw DimensionError("permute_factors: order has wrong length");
	const auto offsets = detail::sub_offsets(dims, order);
	ComplexVector out(amps.size());
	for (std::size_t n = 0; n < offsets.size(); ++n) out(static_cast<Index>(n)) = amps(static_cast<Index>(offsets[n]));
	return out;
}

// ---------------------------------------------------------------------------
// Deterministic spectral decompositions

namespace detail {

/// Components below this magnitude are skipped when choosing the phase anchor.
inline constexpr double kPhaseAnchor = 1e-8;
/// Spectral values closer than this (relative to the spectrum scale) form one degenerate cluster.
inline constexpr double kCluster = 1e-12;

/// Phase that makes the first significant component of `v` real positive.
inline Complex anchor_phase(const Eigen::Ref<const ComplexVector>& v) {
	for (Index i = 0; i < v.size(); ++i)
		if (std::abs(v(i)) > kPhaseAnchor) return std::conj(v(i)) / std::abs(v(i));
	return {1.0, 0.0};
}

/// Replaces an orthonormal column block by a canonical basis of the same span:
/// pivoted Gram-Schmidt over the columns of the span's projector (largest residual
/// first, lowest index on ties), each result phase-anchored.
inline ComplexMatrix canonical_span(const ComplexMatrix& q) {
	const Index n = q.rows(), k = q.cols();
	const ComplexMatrix proj = q * q.adjoint();
	ComplexMatrix basis(n, k);
	ComplexMatrix residual = proj;
	for (Index picked = 0; picked < k; ++picked) {
		RealVector norms = residual.colwise().norm().transpose();
		const double best = norms.maxCoeff();
		Index pivot = 0;
		while (norms(pivot) < (1.0 - 1e-8) * best) ++pivot;
		ComplexVector v = residual.col(pivot) / norms(pivot);
		for (int pass = 0; pass < 2; ++pass)
			for (Index j = 0; j < picked; ++j) v -= basis.col(j) * basis.col(j).dot(v);
		v.normalize();
		v *= anchor_phase(v);
		basis.col(picked) = v;
		residual -= v * (v.adjoint() * residual);
	}
	return basis;
}

/// Calls fn(begin, count) for runs of values that agree within `scale * kCluster`.
template <typename Fn>
void for_each_cluster(const RealVector& values, double scale, Fn&& fn) {
	Index begin = 0;
	for (Index i = 1; i <= values.size(); ++i) {
		if (i == values.size() || std::abs(values(i - 1) - values(i)) > kCluster * scale) {
			fn(begin, i - begin);
			begin = i;
		}
	}
}

} // namespace detail

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
/// Degenerate eigenspaces get the canonical basis of detail::canonical_span and
/// every eigenvector's first significant component is real positive, so the
/// output is a deterministic function of the input.
inline EigDecomposition hermitian_eig(const ComplexMatrix& m) {
	if (!is_square(m)) throw DimensionError("hermitian_eig: matrix is not square");
	if (!is_hermitian(m)) throw ValidationError("hermitian", "hermitian_eig: input is not Hermitian");

	const ComplexMatrix h = 0.5 * (m + m.adjoint());
	Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
	if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: solver did not converge");

	const Index n = h.rows();
	EigDecomposition out;
	out.eigenvalues = solver.eigenvalues().reverse();
	out.eigenvectors = solver.eigenvectors().rowwise().reverse();

	const double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
	detail::for_each_cluster(out.eigenvalues, scale, [&](Index begin, Index count) {
		if (count > 1) {
			out.eigenvectors.middleCols(begin, count) =
			    detail::canonical_span(out.eigenvectors.middleCols(begin, count));
		}
	});
	for (Index j = 0; j < n; ++j) out.eigenvectors.col(j) *= detail::anchor_phase(out.eigenvectors.col(j));
	return out;
}

/// Full singular value decomposition with the same determinism rules as hermitian_eig.
/// For a nonzero singular value the left vector is anchored and the right vector follows
/// (v = M^dagger u / ||M^dagger u||), so real inputs give real singular vectors.
inline SvdDecomposition svd(const ComplexMatrix& m) {
	const Index rows = m.rows(), cols = m.cols();
	const Index r = std::min(rows, cols);
	Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);

	SvdDecomposition out{solver.singularValues(), solver.matrixU(), solver.matrixV()};
	if (r == 0) return out;

	const double top = out.singular_values(0);
	const double zero_level = detail::kCluster * std::max(1.0, top);
	Index nonzero = 0;
	while (nonzero < r && out.singular_values(nonzero) > zero_level) ++nonzero;

	RealVector head = out.singular_values.head(nonzero);
	detail::for_each_cluster(head, std::max(1.0, top), [&](Index begin, Index count) {
		if (count > 1)
			out.left.middleCols(begin, count) = detail::canonical_span(out.left.middleCols(begin, count));
		for (Index j = begin; j < begin + count; ++j) {
			out.left.col(j) *= detail::anchor_phase(out.left.col(j));
			out.right.col(j) = (m.adjoint() * out.left.col(j)).normalized();
		}
	});
	if (nonzero < rows) out.left.rightCols(rows - nonzero) = detail::canonical_span(out.left.rightCols(rows - nonzero));
	if (nonzero < cols)
		out.right.rightCols(cols - nonzero) = detail::canonical_span(out.right.rightCols(cols - nonzero));
	return out;
}

/// Reassembles U diag(sigma) V^dagger (rectangular shapes handled).
inline ComplexMatrix reconstruct(const SvdDecomposition& s) {
	const Index r = s.singular_values.size();
	return s.left.leftCols(r) * s.singular_values.cast<Complex>().asDiagonal() * s.right.leftCols(r).adjoint();
}

inline ComplexMatrix reconstruct(const EigDecomposition& e) {
	return e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------
// Operator bases and coefficient matrices

/// Generalized Gell-Mann basis plus I/sqrt(d), all Hermitian and Hilbert-Schmidt orthonormal.
/// Order: identity; for each pair j<k the symmetric then antisymmetric element; then the
/// d-1 diagonal elements. For d = 2 this is {I, sx, sy, sz} / sqrt(2).
inline OperatorBasis hermitian_operator_basis(std::size_t d) {
	if (d == 0) throw DimensionError("hermitian_operator_basis: dimension must be >= 1");
	const Index n = static_cast<Index>(d);
	const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
	OperatorBasis basis;
	basis.reserve(d * d);
	basis.push_back(ComplexMatrix::Identity(n, n) / std::sqrt(static_cast<double>(d)));
	for (Index j = 0; j < n; ++j)
		for (Index k = j + 1; k < n; ++k) {
			ComplexMatrix sym = ComplexMatrix::Zero(n, n);
			sym(j, k) = sym(k, j) = inv_sqrt2;
			basis.push_back(std::move(sym));
			ComplexMatrix anti = ComplexMatrix::Zero(n, n);
			anti(j, k) = Complex(0.0, -inv_sqrt2);
			anti(k, j) = Complex(0.0, inv_sqrt2);
			basis.push_back(std::move(anti));
		}
	for (Index l = 1; l < n; ++l) {
		ComplexMatrix diag = ComplexMatrix::Zero(n, n);
		const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
		for (Index j = 0; j < l; ++j) diag(j, j) = c;
		diag(l, l) = -static_cast<double>(l) * c;
		basis.push_back(std::move(diag));
	}
	return basis;
}

namespace detail {

/// Columns are the row-major vectorizations of the basis elements.
inline ComplexMatrix basis_columns(const OperatorBasis& basis, std::size_t d, const char* name) {
	const Index n = static_cast<Index>(d);
	if (basis.size() != d * d)
		throw DimensionError(std::string("operator basis ") + name + " must have " + std::to_string(d * d) +
		                     " elements, got " + std::to_string(basis.size()));
	ComplexMatrix cols(n * n, n * n);
	for (Index k = 0; k < n * n; ++k) {
		const auto& g = basis[static_cast<std::size_t>(k)];
		if (g.rows() != n || g.cols() != n)
			throw DimensionError(std::string("operator basis ") + name + " element has wrong shape");
		for (Index a = 0; a < n; ++a)
			for (Index b = 0; b < n; ++b) cols(a * n + b, k) = g(a, b);
	}
	const ComplexMatrix gram = cols.adjoint() * cols;
	if ((gram - ComplexMatrix::Identity(n * n, n * n)).cwiseAbs().maxCoeff() > 1e-10)
		throw ValidationError("orthonormal basis", std::string("operator basis ") + name +
		                                               " is not Hilbert-Schmidt orthonormal");
	return cols;
}

/// Realignment R[(a,a'),(b,b')] = M[a*dB+b, a'*dB+b'].
inline ComplexMatrix realign(const ComplexMatrix& m, DimPair dims) {
	const Index dA = static_cast<Index>(dims.dA), dB = static_cast<Index>(dims.dB);
	ComplexMatrix r(dA * dA, dB * dB);
	for (Index a = 0; a < dA; ++a)
		for (Index ap = 0; ap < dA; ++ap)
			for (Index b = 0; b < dB; ++b)
				for (Index bp = 0; bp < dB; ++bp) r(a * dA + ap, b * dB + bp) = m(a * dB + b, ap * dB + bp);
	return r;
}

inline ComplexMatrix unrealign(const ComplexMatrix& r, DimPair dims) {
	const Index dA = static_cast<Index>(dims.dA), dB = static_cast<Index>(dims.dB);
	ComplexMatrix m(dA * dB, dA * dB);
	for (Index a = 0; a < dA; ++a)
		for (Index ap = 0; ap < dA; ++ap)
			for (Index b = 0; b < dB; ++b)
				for (Index bp = 0; bp < dB; ++bp) m(a * dB + b, ap * dB + bp) = r(a * dA + ap, b * dB + bp);
	return m;
}

} // namespace detail

/// Coefficients c[k,l] = Tr((G_k (x) H_l)^dagger M), so M = sum_kl c[k,l] G_k (x) H_l.
inline ComplexMatrix operator_to_coefficient_matrix(const ComplexMatrix& m, DimPair dims, const OperatorBasis& basis_a,
                                                    const OperatorBasis& basis_b) {
	if (!is_square(m) || static_cast<std::size_t>(m.rows()) != dims.total())
		throw DimensionError("operator_to_coefficient_matrix: operator does not act on dA*dB dimensions");
	const ComplexMatrix ga = detail::basis_columns(basis_a, dims.dA, "A");
	const ComplexMatrix hb = detail::basis_columns(basis_b, dims.dB, "B");
	return ga.adjoint() * detail::realign(m, dims) * hb.conjugate();
}

/// Inverse of operator_to_coefficient_matrix.
inline ComplexMatrix coefficient_matrix_to_operator(const ComplexMatrix& coeffs, DimPair dims,
                                                    const OperatorBasis& basis_a, const OperatorBasis& basis_b) {
	const ComplexMatrix ga = detail::basis_columns(basis_a, dims.dA, "A");
	const ComplexMatrix hb = detail::basis_columns(basis_b, dims.dB, "B");
	if (coeffs.rows() != ga.cols() || coeffs.cols() != hb.cols())
		throw DimensionError("coefficient_matrix_to_operator: coefficient matrix has wrong shape");
	return detail::unrealign(ga * coeffs * hb.transpose(), dims);
}

/// sum_k coeffs[k] * basis[k]
inline ComplexMatrix combine(const OperatorBasis& basis, const Eigen::Ref<const ComplexVector>& coeffs) {
	ComplexMatrix out = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
	for (std::size_t k = 0; k < basis.size(); ++k) out += coeffs(static_cast<Index>(k)) * basis[k];
	return out;
}

// Pauli matrices, used throughout tests and the CLI.
inline ComplexMatrix pauli_x() { return (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(); }
inline ComplexMatrix pauli_y() { return (ComplexMatrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished(); }
inline ComplexMatrix pauli_z() { return (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished(); }

} // namespace purcorr
