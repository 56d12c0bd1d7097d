#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "purcorr/linalg.hpp"
#include "purcorr/rng.hpp"

namespace purcorr {

/// Hermitian, unit-trace, positive semidefinite matrix. The stored matrix is the
/// one passed in (no symmetrization), so serialized values survive unchanged.
class DensityMatrix {
public:
	explicit DensityMatrix(ComplexMatrix m, double tolerance = tol::kScalar) : matrix_(std::move(m)) {
		validate(matrix_, tolerance);
	}

	const ComplexMatrix& matrix() const noexcept { return matrix_; }
	std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

	static void validate(const ComplexMatrix& m, double tolerance = tol::kScalar) {
		if (m.size() == 0 || !is_square(m)) throw ValidationError("square", "density matrix must be square and nonempty");
		if (!all_finite(m)) throw ValidationError("finite", "density matrix has NaN or infinite entries");
		if (!is_hermitian(m, tol::kHermitian)) throw ValidationError("hermitian", "density matrix is not Hermitian");
		const double tr = m.trace().real();
		if (std::abs(tr - 1.0) > tolerance)
			throw ValidationError("trace", "density matrix trace is " + std::to_string(tr) + ", expected 1");
		const ComplexMatrix h = 0.5 * (m + m.adjoint());
		const double smallest = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
		if (smallest < -tolerance)
			throw ValidationError("positive semidefinite",
			                      "density matrix has eigenvalue " + std::to_string(smallest));
	}

	friend bool operator==(const DensityMatrix& a, const DensityMatrix& b) { return a.matrix_ == b.matrix_; }

private:
	ComplexMatrix matrix_;
};

/// rho_AB with its factor dimensions.
class BipartiteState {
public:
	BipartiteState(DensityMatrix state, DimPair dims) : state_(std::move(state)), dims_(dims) {
		if (dims_.dA == 0 || dims_.dB == 0 || dims_.total() != state_.dim())
			throw DimensionError("bipartite state: dims " + std::to_string(dims_.dA) + "x" + std::to_string(dims_.dB) +
			                     " do not match matrix dimension " + std::to_string(state_.dim()));
	}

	const DensityMatrix& state() const noexcept { return state_; }
	const ComplexMatrix& matrix() const noexcept { return state_.matrix(); }
	DimPair dims() const noexcept { return dims_; }

	ComplexMatrix marginal(Subsystem keep) const { return partial_trace(state_.matrix(), dims_, keep); }

	friend bool operator==(const BipartiteState& a, const BipartiteState& b) {
		return a.dims_ == b.dims_ && a.state_ == b.state_;
	}

private:
	DensityMatrix state_;
	DimPair dims_;
};

/// One tensor factor of a pure state's layout.
struct Factor {
	std::string label;
	std::size_t dim = 1;
	friend bool operator==(const Factor&, const Factor&) = default;
};

using Layout = std::vector<Factor>;

/// Unit vector over a labelled tensor-product layout (labels such as A, B, C, C1, C2, AB).
class PureState {
public:
	PureState(ComplexVector amplitudes, Layout layout, double tolerance = tol::kScalar)
		: amplitudes_(std::move(amplitudes)), layout_(std::move(layout)) {
		if (layout_.empty()) throw DimensionError("pure state: layout is empty");
		for (std::size_t i = 0; i < layout_.size(); ++i) {
			if (layout_[i].dim == 0) throw DimensionError("pure state: factor " + layout_[i].label + " has dimension 0");
			if (layout_[i].label.empty()) throw DimensionError("pure state: empty factor label");
			for (std::size_t j = 0; j < i; ++j)
				if (layout_[i].label == layout_[j].label)
					throw DimensionError("pure state: duplicate factor label " + layout_[i].label);
		}
		if (total_dim() != static_cast<std::size_t>(amplitudes_.size()))
			throw DimensionError("pure state: layout dimensions multiply to " + std::to_string(total_dim()) +
			                     ", vector has length " + std::to_string(amplitudes_.size()));
		if (!all_finite(amplitudes_)) throw ValidationError("finite", "pure state has NaN or infinite amplitudes");
		if (std::abs(amplitudes_.norm() - 1.0) > tolerance)
			throw ValidationError("normalization",
			                      "pure state norm is " + std::to_string(amplitudes_.norm()) + ", expected 1");
	}

	const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
	const Layout& layout() const noexcept { return layout_; }

	std::vector<std::size_t> dims() const {
		std::vector<std::size_t> d;
		for (const auto& f : layout_) d.push_back(f.dim);
		return d;
	}
	std::size_t total_dim() const { return product(dims()); }

	std::size_t factor_index(const std::string& label) const {
		for (std::size_t i = 0; i < layout_.size(); ++i)
			if (layout_[i].label == label) return i;
		throw DimensionError("pure state has no factor labelled " + label);
	}

	friend bool operator==(const PureState& a, const PureState& b) {
		return a.layout_ == b.layout_ && a.amplitudes_ == b.amplitudes_;
	}

private:
	ComplexVector amplitudes_;
	Layout layout_;
};

/// Convex combination sum_i weights[i] * states[i].
struct Ensemble {
	std::vector<double> weights;
	std::vector<std::variant<PureState, DensityMatrix>> states;
};

// ---------------------------------------------------------------------------

/// |psi><psi|
inline DensityMatrix from_pure(const PureState& psi) {
	const auto& v = psi.amplitudes();
	if (std::abs(v.norm() - 1.0) > tol::kScalar) throw ValidationError("normalization", "from_pure: input not normalized");
	return DensityMatrix(v * v.adjoint());
}

/// Reduced density matrix of a pure state on the factors named in `keep` (kept in layout order),
/// normalized to unit trace.
inline ComplexMatrix reduced_density(const PureState& psi, const std::vector<std::string>& keep) {
	if (keep.empty()) throw DimensionError("reduced_density: keep set is empty");
	const auto dims = psi.dims();
	std::vector<bool> kept(dims.size(), false);
	for (const auto& label : keep) kept[psi.factor_index(label)] = true;
	std::vector<std::size_t> order;
	std::size_t keep_dim = 1;
	for (std::size_t i = 0; i < dims.size(); ++i)
		if (kept[i]) {
			order.push_back(i);
			keep_dim *= dims[i];
		}
	for (std::size_t i = 0; i < dims.size(); ++i)
		if (!kept[i]) order.push_back(i);
	const ComplexVector permuted = permute_factors(psi.amplitudes(), dims, order);
	const Index k = static_cast<Index>(keep_dim);
	const Index rest = permuted.size() / k;
	using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
	const Eigen::Map<const RowMajor> amp(permuted.data(), k, rest);
	ComplexMatrix rho = amp * amp.adjoint();
	// Dividing by the computed trace removes the rounding carried by the amplitudes' norm;
	// e.g. the two-party marginal of (|000>+|111>)/sqrt(2) comes out exactly diag(1/2,0,0,1/2).
	return rho / rho.trace().real();
}

inline DensityMatrix mix(const Ensemble& e) {
	if (e.weights.size() != e.states.size())
		throw DimensionError("mix: " + std::to_string(e.weights.size()) + " weights for " +
		                     std::to_string(e.states.size()) + " states");
	if (e.states.empty()) throw DimensionError("mix: empty ensemble");
	double total = 0.0;
	for (double w : e.weights) {
		if (!(w >= 0.0)) throw ValidationError("weights", "mix: negative or NaN weight");
		total += w;
	}
	if (std::abs(total - 1.0) > tol::kScalar) throw ValidationError("weights", "mix: weights do not sum to 1");

	auto as_matrix = [](const auto& s) -> ComplexMatrix {
		using T = std::decay_t<decltype(s)>;
		if constexpr (std::is_same_v<T, PureState>) return s.amplitudes() * s.amplitudes().adjoint();
		else return s.matrix();
	};
	ComplexMatrix acc;
	for (std::size_t i = 0; i < e.states.size(); ++i) {
		ComplexMatrix m = std::visit(as_matrix, e.states[i]);
		if (i == 0) acc = ComplexMatrix::Zero(m.rows(), m.cols());
		if (m.rows() != acc.rows()) throw DimensionError("mix: states have different dimensions");
		acc += e.weights[i] * m;
	}
	return DensityMatrix(std::move(acc));
}

/// Computational basis vector |index> over `layout`.
inline PureState basis_state(Layout layout, std::size_t index) {
	std::size_t n = 1;
	for (const auto& f : layout) n *= f.dim;
	if (index >= n) throw DimensionError("basis_state: index out of range");
	ComplexVector v = ComplexVector::Zero(static_cast<Index>(n));
	v(static_cast<Index>(index)) = 1.0;
	return PureState(std::move(v), std::move(layout));
}

inline BipartiteState product_state(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
	return BipartiteState(DensityMatrix(tensor_product(rho_a.matrix(), rho_b.matrix())), {rho_a.dim(), rho_b.dim()});
}

/// Two qubits emitted as |00> or |11> with probability 1/2 each: diag(1/2, 0, 0, 1/2).
inline BipartiteState example_source_state() {
	const Layout ab{{"A", 2}, {"B", 2}};
	Ensemble e{{0.5, 0.5}, {basis_state(ab, 0), basis_state(ab, 3)}};
	return BipartiteState(mix(e), {2, 2});
}

/// (|000> + |111>)/sqrt(2) on factors A, B, C.
inline PureState ghz() {
	ComplexVector v = ComplexVector::Zero(8);
	v(0) = v(7) = 1.0 / std::numbers::sqrt2;
	return PureState(std::move(v), {{"A", 2}, {"B", 2}, {"C", 2}});
}

// ---------------------------------------------------------------------------
// Seeded random states

/// Haar-random unit vector in C^d, labelled as one factor "A" unless a layout is given.
inline PureState random_pure(std::size_t d, std::uint64_t seed) {
	if (d == 0) throw DimensionError("random_pure: dimension must be >= 1");
	Rng rng(seed);
	ComplexVector v(static_cast<Index>(d));
	for (Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
	v.normalize();
	return PureState(std::move(v), {{"A", d}});
}

inline ComplexMatrix ginibre(Index rows, Index cols, Rng& rng) {
	ComplexMatrix g(rows, cols);
	for (Index i = 0; i < rows; ++i)
		for (Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
	return g;
}

/// Rank-`rank` Ginibre state G G^dagger / Tr(G G^dagger), G of shape (dA*dB) x rank.
inline BipartiteState random_density(DimPair dims, std::size_t rank, std::uint64_t seed) {
	if (dims.dA == 0 || dims.dB == 0) throw DimensionError("random_density: dimensions must be >= 1");
	if (rank < 1 || rank > dims.total())
		throw DimensionError("random_density: rank " + std::to_string(rank) + " outside [1, " +
		                     std::to_string(dims.total()) + "]");
	Rng rng(seed);
	const ComplexMatrix g = ginibre(static_cast<Index>(dims.total()), static_cast<Index>(rank), rng);
	ComplexMatrix rho = g * g.adjoint();
	rho /= rho.trace().real();
	return BipartiteState(DensityMatrix(std::move(rho)), dims);
}

/// Single-factor Ginibre density matrix (full rank).
inline DensityMatrix random_density_matrix(std::size_t d, std::uint64_t seed) {
	return random_density({d, 1}, d, seed).state();
}

/// rho_A (x) rho_B with independent full-rank Ginibre factors.
inline BipartiteState random_product_state(DimPair dims, std::uint64_t seed) {
	return product_state(random_density_matrix(dims.dA, derive_seed(seed, 0)),
	                     random_density_matrix(dims.dB, derive_seed(seed, 1)));
}

/// Haar unitary: QR of a complex Ginibre matrix with R's diagonal made real positive.
inline ComplexMatrix random_unitary(std::size_t d, std::uint64_t seed) {
	if (d == 0) throw DimensionError("random_unitary: dimension must be >= 1");
	Rng rng(seed);
	const Index n = static_cast<Index>(d);
	const ComplexMatrix g = ginibre(n, n, rng);
	Eigen::HouseholderQR<ComplexMatrix> qr(g);
	ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
	const ComplexMatrix& r = qr.matrixQR();
	for (Index j = 0; j < n; ++j) {
		const Complex rjj = r(j, j);
		if (std::abs(rjj) > 0.0) q.col(j) *= rjj / std::abs(rjj);
	}
	return q;
}

} // namespace purcorr
