#pragma once

// Covariance of local observables, the correlation operator
// Delta = rho_AB - rho_A (x) rho_B, factorability, and witness synthesis.
//
// For observables E on A and F on B,
//   Cov(E, F) = Tr(rho (E (x) F)) - Tr(rho_A E) Tr(rho_B F) = Tr(Delta (E (x) F)),
// so the best unit-norm pair is the top operator-Schmidt pair of Delta and the
// maximal covariance is its largest operator-Schmidt coefficient.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "purcorr/linalg.hpp"
#include "purcorr/report.hpp"
#include "purcorr/states.hpp"

namespace purcorr {

inline constexpr double kFactorabilityTolerance = 1e-9;
inline constexpr double kWitnessTolerance = 1e-7;
inline constexpr double kOutcomeGrouping = 1e-8;

/// Hermitian matrix standing for an orthogonal measurement.
class Observable {
public:
	explicit Observable(ComplexMatrix m) : matrix_(std::move(m)) {
		if (matrix_.size() == 0 || !is_square(matrix_)) throw DimensionError("observable must be a nonempty square matrix");
		if (!all_finite(matrix_)) throw ValidationError("finite", "observable has NaN or infinite entries");
		if (!is_hermitian(matrix_)) throw ValidationError("hermitian", "observable is not Hermitian");
	}

	const ComplexMatrix& matrix() const noexcept { return matrix_; }
	std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

private:
	ComplexMatrix matrix_;
};

struct CorrelationOperator {
	ComplexMatrix delta;
	DimPair dims;
	double frobenius_norm = 0.0;
};

/// Delta = sum_k coefficients[k] ops_a[k] (x) ops_b[k], factors Hilbert-Schmidt orthonormal.
struct OperatorSchmidt {
	std::vector<double> coefficients;
	std::vector<ComplexMatrix> ops_a;
	std::vector<ComplexMatrix> ops_b;
};

struct CorrelationWitness {
	Observable e;
	Observable f;
	double covariance = 0.0;
	double sigma1 = 0.0;
	OperatorSchmidt schmidt;
};

struct ProjectiveOutcome {
	double value = 0.0;
	ComplexMatrix projector;
};

struct JointOutcome {
	double e = 0.0;
	double f = 0.0;
	double probability = 0.0;
	std::size_t count = 0;
};

struct SamplingResult {
	std::vector<JointOutcome> joint; ///< every (E outcome, F outcome) cell, E-major
	double empirical_covariance = 0.0;
	double analytic_covariance = 0.0;
	std::size_t trials = 0;
};

struct ChiSquare {
	double statistic = 0.0;
	std::size_t dof = 0;
	double p_value = 1.0;
};

namespace detail {

/// Tr(X Y) without forming the product.
inline Complex trace_of_product(const ComplexMatrix& x, const ComplexMatrix& y) {
	return x.cwiseProduct(y.transpose()).sum();
}

inline void check_observables(const BipartiteState& rho, const Observable& e, const Observable& f) {
	if (e.dim() != rho.dims().dA || f.dim() != rho.dims().dB)
		throw DimensionError("observables of dimension " + std::to_string(e.dim()) + " and " + std::to_string(f.dim()) +
		                     " do not fit a " + std::to_string(rho.dims().dA) + "x" +
		                     std::to_string(rho.dims().dB) + " state");
}

} // namespace detail

/// Tr(rho (E (x) F)) - Tr(rho_A E) Tr(rho_B F)
inline double covariance(const BipartiteState& rho, const Observable& e, const Observable& f) {
	detail::check_observables(rho, e, f);
	const Complex joint = detail::trace_of_product(rho.matrix(), tensor_product(e.matrix(), f.matrix()));
	const Complex mean_e = detail::trace_of_product(rho.marginal(Subsystem::A), e.matrix());
	const Complex mean_f = detail::trace_of_product(rho.marginal(Subsystem::B), f.matrix());
	const Complex c = joint - mean_e * mean_f;
	if (std::abs(c.imag()) > 1e-10 * std::max(1.0, e.matrix().norm() * f.matrix().norm()))
		throw ValidationError("hermitian", "covariance has an imaginary part of " + std::to_string(c.imag()));
	return c.real();
}

inline bool correlated(const BipartiteState& rho, const Observable& e, const Observable& f,
                       double tolerance = tol::kScalar) {
	return std::abs(covariance(rho, e, f)) > tolerance;
}

inline CorrelationOperator correlation_operator(const BipartiteState& rho) {
	ComplexMatrix delta =
	    rho.matrix() - tensor_product(rho.marginal(Subsystem::A), rho.marginal(Subsystem::B));
	const double norm = delta.norm();
	return {std::move(delta), rho.dims(), norm};
}

/// rho == rho_A (x) rho_B, decided by ||Delta||_F <= tolerance.
inline bool is_factorable(const BipartiteState& rho, double tolerance = kFactorabilityTolerance) {
	return correlation_operator(rho).frobenius_norm <= tolerance;
}

/// Operator Schmidt decomposition in the generalized Gell-Mann bases. The coefficient
/// matrix of a Hermitian operator in Hermitian bases is real, so its singular vectors
/// and therefore every output operator are real combinations of Hermitian matrices.
inline OperatorSchmidt operator_schmidt(const CorrelationOperator& delta) {
	if (!is_hermitian(delta.delta)) throw ValidationError("hermitian", "operator_schmidt: operator is not Hermitian");
	const auto basis_a = hermitian_operator_basis(delta.dims.dA);
	const auto basis_b = hermitian_operator_basis(delta.dims.dB);
	const ComplexMatrix coeffs = operator_to_coefficient_matrix(delta.delta, delta.dims, basis_a, basis_b);
	const RealMatrix real_coeffs = coeffs.real();

	const SvdDecomposition s = svd(real_coeffs.cast<Complex>());
	const Index r = s.singular_values.size();
	OperatorSchmidt out;
	out.coefficients.reserve(static_cast<std::size_t>(r));
	for (Index k = 0; k < r; ++k) {
		out.coefficients.push_back(s.singular_values(k));
		const ComplexVector u = s.left.col(k).real().cast<Complex>();
		const ComplexVector v = s.right.col(k).real().cast<Complex>();
		out.ops_a.push_back(combine(basis_a, u));
		out.ops_b.push_back(combine(basis_b, v));
	}
	return out;
}

/// Observable pair with the largest covariance on rho among unit Hilbert-Schmidt-norm pairs.
inline CorrelationWitness synthesize_witness(const BipartiteState& rho,
                                             double factorability_tolerance = kFactorabilityTolerance) {
	const CorrelationOperator delta = correlation_operator(rho);
	OperatorSchmidt schmidt = operator_schmidt(delta);
	Observable e(schmidt.ops_a.front());
	Observable f(schmidt.ops_b.front());
	double cov = 0.0, sigma1 = 0.0;
	if (delta.frobenius_norm > factorability_tolerance) {
		cov = covariance(rho, e, f);
		sigma1 = schmidt.coefficients.front();
	}
	return {std::move(e), std::move(f), cov, sigma1, std::move(schmidt)};
}

/// Random Hermitian matrix with unit Hilbert-Schmidt norm.
inline ComplexMatrix random_unit_hermitian(std::size_t d, Rng& rng) {
	const ComplexMatrix x = ginibre(static_cast<Index>(d), static_cast<Index>(d), rng);
	ComplexMatrix h = 0.5 * (x + x.adjoint());
	return h / h.norm();
}

/// Largest |covariance| over `trials` random unit-norm observable pairs. Evaluates the
/// covariance functional directly, independently of the correlation operator.
inline double brute_force_max_covariance(const BipartiteState& rho, std::size_t trials, std::uint64_t seed) {
	Rng rng(seed);
	double best = 0.0;
	for (std::size_t t = 0; t < trials; ++t) {
		Observable e(random_unit_hermitian(rho.dims().dA, rng));
		Observable f(random_unit_hermitian(rho.dims().dB, rng));
		best = std::max(best, std::abs(covariance(rho, e, f)));
	}
	return best;
}

/// Spectral decomposition into (outcome, projector) pairs; eigenvalues within
/// `grouping` of a group's first member share one projector.
inline std::vector<ProjectiveOutcome> to_projective(const Observable& obs, double grouping = kOutcomeGrouping) {
	const EigDecomposition eig = hermitian_eig(obs.matrix());
	std::vector<ProjectiveOutcome> out;
	Index i = 0;
	const Index n = eig.eigenvalues.size();
	while (i < n) {
		Index j = i;
		double sum = 0.0;
		ComplexMatrix proj = ComplexMatrix::Zero(n, n);
		while (j < n && std::abs(eig.eigenvalues(i) - eig.eigenvalues(j)) <= grouping) {
			sum += eig.eigenvalues(j);
			proj += eig.eigenvectors.col(j) * eig.eigenvectors.col(j).adjoint();
			++j;
		}
		out.push_back({sum / static_cast<double>(j - i), std::move(proj)});
		i = j;
	}
	return out;
}

/// Joint outcome probabilities Tr(rho (P_i (x) Q_j)), E-major.
inline std::vector<JointOutcome> joint_distribution(const BipartiteState& rho, const Observable& e, const Observable& f) {
	detail::check_observables(rho, e, f);
	const auto pe = to_projective(e);
	const auto pf = to_projective(f);
	std::vector<JointOutcome> cells;
	double total = 0.0;
	for (const auto& a : pe)
		for (const auto& b : pf) {
			double p = detail::trace_of_product(rho.matrix(), tensor_product(a.projector, b.projector)).real();
			if (p < -tol::kScalar) throw ValidationError("probabilities", "negative outcome probability");
			p = std::max(p, 0.0);
			total += p;
			cells.push_back({a.value, b.value, p, 0});
		}
	if (std::abs(total - 1.0) > tol::kScalar)
		throw ValidationError("probabilities", "outcome probabilities sum to " + std::to_string(total));
	return cells;
}

/// Simulates `trials` joint measurements of E on A and F on B.
inline SamplingResult sample_measurements(const BipartiteState& rho, const Observable& e, const Observable& f,
                                          std::size_t trials, std::uint64_t seed) {
	if (trials == 0) throw DimensionError("sample_measurements: trials must be >= 1");
	SamplingResult out;
	out.joint = joint_distribution(rho, e, f);
	out.trials = trials;
	out.analytic_covariance = covariance(rho, e, f);

	std::vector<double> cumulative;
	double acc = 0.0;
	for (const auto& c : out.joint) cumulative.push_back(acc += c.probability);

	Rng rng(seed);
	for (std::size_t t = 0; t < trials; ++t) {
		const double u = rng.uniform() * acc;
		auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
		std::size_t cell = static_cast<std::size_t>(it - cumulative.begin());
		if (cell >= out.joint.size()) cell = out.joint.size() - 1;
		// upper_bound can only land on a zero-probability cell through rounding at its left edge
		while (out.joint[cell].probability == 0.0 && cell > 0) --cell;
		++out.joint[cell].count;
	}

	double mean_e = 0.0, mean_f = 0.0, mean_ef = 0.0;
	const double n = static_cast<double>(trials);
	for (const auto& c : out.joint) {
		const double w = static_cast<double>(c.count) / n;
		mean_e += w * c.e;
		mean_f += w * c.f;
		mean_ef += w * c.e * c.f;
	}
	out.empirical_covariance = mean_ef - mean_e * mean_f;
	return out;
}

namespace detail {

inline double chi_square_survival(double statistic, std::size_t dof) {
	if (dof == 0) return 1.0;
	if (!std::isfinite(statistic)) return 0.0;
	const boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
	return boost::math::cdf(boost::math::complement(dist, statistic));
}

} // namespace detail

/// Pearson statistic of the observed counts against the analytic joint law.
inline ChiSquare chi_square_goodness_of_fit(const SamplingResult& r) {
	ChiSquare out;
	std::size_t cells = 0;
	const double n = static_cast<double>(r.trials);
	for (const auto& c : r.joint) {
		if (c.probability <= 0.0) {
			if (c.count > 0) out.statistic = std::numeric_limits<double>::infinity();
			continue;
		}
		const double expected = n * c.probability;
		const double diff = static_cast<double>(c.count) - expected;
		out.statistic += diff * diff / expected;
		++cells;
	}
	out.dof = cells > 0 ? cells - 1 : 0;
	out.p_value = detail::chi_square_survival(out.statistic, out.dof);
	return out;
}

/// Pearson test that two runs with the same observables share one joint law
/// (2 x k contingency table, empty columns dropped).
inline ChiSquare chi_square_homogeneity(const SamplingResult& a, const SamplingResult& b) {
	if (a.joint.size() != b.joint.size()) throw DimensionError("chi_square_homogeneity: outcome tables differ");
	for (std::size_t i = 0; i < a.joint.size(); ++i)
		if (std::abs(a.joint[i].e - b.joint[i].e) > kOutcomeGrouping ||
		    std::abs(a.joint[i].f - b.joint[i].f) > kOutcomeGrouping)
			throw DimensionError("chi_square_homogeneity: outcome labels differ");
	const double na = static_cast<double>(a.trials), nb = static_cast<double>(b.trials);
	const double n = na + nb;
	ChiSquare out;
	std::size_t columns = 0;
	for (std::size_t i = 0; i < a.joint.size(); ++i) {
		const double oa = static_cast<double>(a.joint[i].count), ob = static_cast<double>(b.joint[i].count);
		const double col = oa + ob;
		if (col == 0.0) continue;
		++columns;
		const double ea = na * col / n, eb = nb * col / n;
		out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
	}
	out.dof = columns > 0 ? columns - 1 : 0;
	out.p_value = detail::chi_square_survival(out.statistic, out.dof);
	return out;
}

// ---------------------------------------------------------------------------

/// Which random states a Theorem 2 campaign draws.
struct EnsembleSpec {
	DimPair dims{2, 2};
	bool ginibre = true;  ///< full-rank Ginibre states
	bool products = true; ///< rho_A (x) rho_B with Ginibre factors

	std::string describe() const {
		const std::string d = std::to_string(dims.dA) + "x" + std::to_string(dims.dB);
		std::string s;
		if (ginibre) s += d + " full-rank Ginibre";
		if (products) s += std::string(s.empty() ? "" : " + ") + d + " Ginibre products";
		return s;
	}
};

struct Theorem2Options {
	double factorability_tolerance = kFactorabilityTolerance;
	double witness_tolerance = kWitnessTolerance;
};

/// Checks, state by state, that the synthesized witness is correlated exactly when the
/// state is non-factorable. Each state comes from its own derived seed.
inline TheoremReport verify_theorem2(const EnsembleSpec& spec, std::size_t trials, std::uint64_t seed,
                                     const Theorem2Options& opts = {}) {
	TheoremReport report;
	report.theorem = 2;
	report.ensemble = spec.describe();
	report.seed = seed;
	report.trials = trials;
	report.tolerances = {{"factorability", opts.factorability_tolerance}, {"witness", opts.witness_tolerance}};

	auto check = [&](const BipartiteState& rho, const std::string& tag) {
		const CorrelationWitness w = synthesize_witness(rho, opts.factorability_tolerance);
		const bool nonfactorable = !is_factorable(rho, opts.factorability_tolerance);
		const double cov = std::abs(covariance(rho, w.e, w.f));
		const bool witnessed = cov > opts.witness_tolerance;
		++report.states_checked;
		if (nonfactorable) {
			++report.nonfactorable_states;
			report.note_min(report.min_nonfactorable_covariance, cov);
		} else {
			++report.factorable_states;
			report.note_max(report.max_factorable_covariance, cov);
		}
		if (witnessed != nonfactorable)
			report.counterexamples.push_back(tag + ": |covariance| = " + format_double(cov) +
			                                 ", ||Delta||_F = " + format_double(correlation_operator(rho).frobenius_norm));
	};

	for (std::size_t t = 0; t < trials; ++t) {
		if (spec.ginibre)
			check(random_density(spec.dims, spec.dims.total(), derive_seed(seed, 2 * t)), "ginibre #" + std::to_string(t));
		if (spec.products)
			check(random_product_state(spec.dims, derive_seed(seed, 2 * t + 1)), "product #" + std::to_string(t));
	}
	return report;
}

} // namespace purcorr
