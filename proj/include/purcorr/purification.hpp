#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "purcorr/correlation.hpp"
#include "purcorr/linalg.hpp"
#include "purcorr/report.hpp"
#include "purcorr/states.hpp"

namespace purcorr {

/// Singular values above this count toward the Schmidt rank (states are unit norm).
inline constexpr double kRankTolerance = 1e-7;
/// Eigenvalues at or below this are treated as zero when building purifications.
inline constexpr double kSpectrumClip = 1e-9;

/// A pure state whose ancilla factors (labels starting with 'C') trace out to `original`.
struct Purification {
	PureState state;
	BipartiteState original;
};

/// Bipartition of a layout's factor labels.
struct CutSpec {
	std::vector<std::string> left;
	std::vector<std::string> right;
};

struct EntanglementReport {
	std::vector<double> schmidt_coefficients;
	std::size_t schmidt_rank = 0;
	double entropy_bits = 0.0;
	bool entangled = false;
};

inline bool is_ancilla_label(const std::string& label) { return !label.empty() && label.front() == 'C'; }

/// Reduced state on the non-ancilla factors.
inline ComplexMatrix trace_out_ancillas(const PureState& psi) {
	std::vector<std::string> keep;
	for (const auto& f : psi.layout())
		if (!is_ancilla_label(f.label)) keep.push_back(f.label);
	return reduced_density(psi, keep);
}

namespace detail {

/// sqrt of a density spectrum after clipping noise to zero and renormalizing.
inline RealVector clipped_amplitudes(const RealVector& eigenvalues) {
	RealVector p = eigenvalues.unaryExpr([](double x) { return x > kSpectrumClip ? x : 0.0; });
	p /= p.sum();
	return p.cwiseSqrt();
}

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Vector of a matrix read in row-major order.
inline ComplexVector row_major_vector(const ComplexMatrix& m) {
	RowMajorMatrix rm = m;
	return Eigen::Map<const ComplexVector>(rm.data(), rm.size());
}

/// Canonical purification of one density matrix with an ancilla of the same dimension:
/// amplitude[s * d + i] = sqrt(p_i) e_i[s].
inline ComplexVector local_purification(const DensityMatrix& rho) {
	const EigDecomposition eig = hermitian_eig(rho.matrix());
	const RealVector amp = clipped_amplitudes(eig.eigenvalues);
	return row_major_vector(eig.eigenvectors * amp.cast<Complex>().asDiagonal());
}

} // namespace detail

/// Spectral purification sum_i sqrt(p_i) |e_i>_AB |i>_C with dim C = numerical rank.
inline Purification purify(const BipartiteState& rho) {
	const EigDecomposition eig = hermitian_eig(rho.matrix());
	const RealVector amp = detail::clipped_amplitudes(eig.eigenvalues);
	Index rank = 0;
	while (rank < amp.size() && amp(rank) > 0.0) ++rank;
	const ComplexMatrix block = eig.eigenvectors.leftCols(rank) * amp.head(rank).cast<Complex>().asDiagonal();
	PureState psi(detail::row_major_vector(block),
	              {{"AB", rho.dims().total()}, {"C", static_cast<std::size_t>(rank)}});
	return {std::move(psi), rho};
}

/// |phi_1>_{AC1} (x) |phi_2>_{BC2} with dim C1 = dim A, dim C2 = dim B, laid out (A, B, C1, C2).
/// Unentangled across AC1|BC2 by construction.
inline Purification factored_purification(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
	const ComplexVector a_c1 = detail::local_purification(rho_a);
	const ComplexVector b_c2 = detail::local_purification(rho_b);
	const std::size_t da = rho_a.dim(), db = rho_b.dim();
	const std::size_t dims[4] = {da, da, db, db}; // A, C1, B, C2
	const std::size_t order[4] = {0, 2, 1, 3};
	ComplexVector v = permute_factors(tensor_product(a_c1, b_c2), dims, order);
	v.normalize();
	PureState psi(std::move(v), {{"A", da}, {"B", db}, {"C1", da}, {"C2", db}});
	return {std::move(psi), product_state(rho_a, rho_b)};
}

/// Re-expresses a spectral purification (AB, C) on layout (A, B, C1, C2): ancilla basis
/// vector |i>_C becomes the composite index i of C1 (x) C2, the rest is zero padding.
inline Purification embed_ancillas(const Purification& p, std::size_t dim_c1, std::size_t dim_c2) {
	const Layout& layout = p.state.layout();
	if (layout.size() != 2 || layout[0].label != "AB" || layout[1].label != "C")
		throw DimensionError("embed_ancillas: expected a purification laid out as (AB, C)");
	const std::size_t sys = layout[0].dim, rank = layout[1].dim, anc = dim_c1 * dim_c2;
	if (anc < rank)
		throw DimensionError("embed_ancillas: ancilla dimension " + std::to_string(anc) + " is below rank " +
		                     std::to_string(rank));
	ComplexVector v = ComplexVector::Zero(static_cast<Index>(sys * anc));
	for (std::size_t s = 0; s < sys; ++s)
		v.segment(static_cast<Index>(s * anc), static_cast<Index>(rank)) =
		    p.state.amplitudes().segment(static_cast<Index>(s * rank), static_cast<Index>(rank));
	const DimPair d = p.original.dims();
	PureState psi(std::move(v), {{"A", d.dA}, {"B", d.dB}, {"C1", dim_c1}, {"C2", dim_c2}});
	return {std::move(psi), p.original};
}

/// Applies I (x) U with U acting on the ancilla factors (in layout order).
inline Purification apply_ancilla_unitary(const Purification& p, const ComplexMatrix& u) {
	const auto dims = p.state.dims();
	const Layout& layout = p.state.layout();
	std::vector<std::size_t> order, inverse(dims.size());
	std::size_t anc = 1;
	for (std::size_t i = 0; i < layout.size(); ++i)
		if (!is_ancilla_label(layout[i].label)) order.push_back(i);
	for (std::size_t i = 0; i < layout.size(); ++i)
		if (is_ancilla_label(layout[i].label)) {
			order.push_back(i);
			anc *= layout[i].dim;
		}
	if (!is_square(u) || static_cast<std::size_t>(u.rows()) != anc)
		throw DimensionError("apply_ancilla_unitary: unitary is " + std::to_string(u.rows()) + "x" +
		                     std::to_string(u.cols()) + ", ancilla dimension is " + std::to_string(anc));
	if (!is_unitary(u)) throw ValidationError("unitary", "apply_ancilla_unitary: matrix is not unitary");

	const ComplexVector permuted = permute_factors(p.state.amplitudes(), dims, order);
	const Index rows = permuted.size() / static_cast<Index>(anc);
	const Eigen::Map<const detail::RowMajorMatrix> psi(permuted.data(), rows, static_cast<Index>(anc));
	const detail::RowMajorMatrix rotated = psi * u.transpose();
	const ComplexVector flat = Eigen::Map<const ComplexVector>(rotated.data(), rotated.size());

	std::vector<std::size_t> permuted_dims;
	for (auto i : order) permuted_dims.push_back(dims[i]);
	for (std::size_t i = 0; i < order.size(); ++i) inverse[order[i]] = i;
	PureState out(permute_factors(flat, permuted_dims, inverse), layout);
	return {std::move(out), p.original};
}

/// Schmidt decomposition of a pure state across `cut`.
inline EntanglementReport cut_entanglement(const PureState& psi, const CutSpec& cut,
                                           double rank_tolerance = kRankTolerance) {
	const auto dims = psi.dims();
	if (cut.left.empty() || cut.right.empty()) throw DimensionError("invalid cut: both sides must be nonempty");
	std::vector<int> side(dims.size(), -1);
	std::vector<std::size_t> order;
	std::size_t left_dim = 1;
	auto assign = [&](const std::vector<std::string>& labels, int which) {
		for (const auto& label : labels) {
			std::size_t i = 0;
			try {
				i = psi.factor_index(label);
			} catch (const DimensionError&) {
				throw DimensionError("invalid cut: unknown factor " + label);
			}
			if (side[i] != -1) throw DimensionError("invalid cut: factor " + label + " listed twice");
			side[i] = which;
			order.push_back(i);
			if (which == 0) left_dim *= dims[i];
		}
	};
	assign(cut.left, 0);
	assign(cut.right, 1);
	if (order.size() != dims.size()) throw DimensionError("invalid cut: not every factor is assigned a side");

	const ComplexVector permuted = permute_factors(psi.amplitudes(), dims, order);
	const Index rows = static_cast<Index>(left_dim);
	const Eigen::Map<const detail::RowMajorMatrix> amp(permuted.data(), rows, permuted.size() / rows);
	const SvdDecomposition s = svd(amp);

	EntanglementReport rep;
	double entropy = 0.0;
	for (Index k = 0; k < s.singular_values.size(); ++k) {
		const double c = s.singular_values(k);
		rep.schmidt_coefficients.push_back(c);
		if (c > rank_tolerance) ++rep.schmidt_rank;
		const double p = c * c;
		if (p > 0.0) entropy -= p * std::log2(p);
	}
	rep.entropy_bits = std::max(entropy, 0.0);
	rep.entangled = rep.schmidt_rank > 1;
	return rep;
}

inline const CutSpec& ac1_bc2_cut() {
	static const CutSpec cut{{"A", "C1"}, {"B", "C2"}};
	return cut;
}

struct Theorem1Options {
	double factorability_tolerance = kFactorabilityTolerance;
	/// A sampled purification of a non-factorable state must carry more than this entropy.
	double min_entropy_bits = 1e-3;
	double rank_tolerance = kRankTolerance;
};

/// Samples `trials` purifications U_{C1C2} |psi> of rho, |psi> the spectral purification
/// embedded with dim C1 = dim C2 = dim AB, and checks every AC1|BC2 cut. For a
/// factorable rho it also checks that the factored purification is unentangled.
inline TheoremReport verify_theorem1(const BipartiteState& rho, std::size_t trials, std::uint64_t seed,
                                     const Theorem1Options& opts = {}) {
	TheoremReport report;
	report.theorem = 1;
	report.ensemble = "single " + std::to_string(rho.dims().dA) + "x" + std::to_string(rho.dims().dB) + " state";
	report.seed = seed;
	report.trials = trials;
	report.tolerances = {{"factorability", opts.factorability_tolerance},
	                     {"schmidt_rank", opts.rank_tolerance},
	                     {"min_entropy_bits", opts.min_entropy_bits}};
	report.states_checked = 1;

	const bool factorable = is_factorable(rho, opts.factorability_tolerance);
	(factorable ? report.factorable_states : report.nonfactorable_states) = 1;

	const std::size_t n = rho.dims().total();
	const Purification base = embed_ancillas(purify(rho), n, n);
	std::optional<double> sampled_min, sampled_max;
	for (std::size_t t = 0; t < trials; ++t) {
		const Purification p = apply_ancilla_unitary(base, random_unitary(n * n, derive_seed(seed, t)));
		const EntanglementReport e = cut_entanglement(p.state, ac1_bc2_cut(), opts.rank_tolerance);
		++report.purifications_checked;
		report.note_min(sampled_min, e.entropy_bits);
		report.note_max(sampled_max, e.entropy_bits);
		if (!factorable && (!e.entangled || e.entropy_bits <= opts.min_entropy_bits))
			report.counterexamples.push_back("trial " + std::to_string(t) + ": Schmidt rank " +
			                                 std::to_string(e.schmidt_rank) + ", entropy " +
			                                 format_double(e.entropy_bits) + " bits");
	}
	if (!factorable) {
		report.min_entropy_bits = sampled_min;
		report.max_entropy_bits = sampled_max;
	} else {
		const Purification f = factored_purification(DensityMatrix(rho.marginal(Subsystem::A)),
		                                             DensityMatrix(rho.marginal(Subsystem::B)));
		const EntanglementReport e = cut_entanglement(f.state, ac1_bc2_cut(), opts.rank_tolerance);
		++report.purifications_checked;
		report.max_factored_entropy_bits = e.entropy_bits;
		report.max_entropy_bits = sampled_max;
		if (e.schmidt_rank != 1)
			report.counterexamples.push_back("factored purification has Schmidt rank " + std::to_string(e.schmidt_rank));
	}
	return report;
}

/// `states` seeded full-rank Ginibre states and `states` seeded product states of the
/// given dims, each checked with `unitaries` sampled purifications.
inline TheoremReport verify_theorem1_campaign(DimPair dims, std::size_t states, std::size_t unitaries,
                                              std::uint64_t seed, const Theorem1Options& opts = {}) {
	TheoremReport report;
	report.theorem = 1;
	const std::string d = std::to_string(dims.dA) + "x" + std::to_string(dims.dB);
	report.ensemble = d + " full-rank Ginibre + " + d + " Ginibre products, " + std::to_string(unitaries) +
	                  " Haar ancilla unitaries each";
	report.seed = seed;
	report.trials = states;
	for (std::size_t s = 0; s < states; ++s) {
		const auto tag = [&](const char* kind) { return std::string(kind) + " #" + std::to_string(s) + " "; };
		TheoremReport g = verify_theorem1(random_density(dims, dims.total(), derive_seed(seed, 4 * s)), unitaries,
		                                  derive_seed(seed, 4 * s + 1), opts);
		for (auto& c : g.counterexamples) c = tag("ginibre") + c;
		report.absorb(g);
		TheoremReport p =
		    verify_theorem1(random_product_state(dims, derive_seed(seed, 4 * s + 2)), unitaries,
		                    derive_seed(seed, 4 * s + 3), opts);
		for (auto& c : p.counterexamples) c = tag("product") + c;
		report.absorb(p);
	}
	if (report.tolerances.empty())
		report.tolerances = {{"factorability", opts.factorability_tolerance},
		                     {"schmidt_rank", opts.rank_tolerance},
		                     {"min_entropy_bits", opts.min_entropy_bits}};
	return report;
}

} // namespace purcorr
