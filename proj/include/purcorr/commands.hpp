#pragma once

// Command implementations behind the `purcorr` executable. Each command takes
// already-read file contents and returns its output, so everything here is
// testable without touching the filesystem.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "purcorr/correlation.hpp"
#include "purcorr/purification.hpp"
#include "purcorr/report.hpp"
#include "purcorr/state_file.hpp"
#include "purcorr/states.hpp"

namespace purcorr::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCounterexample = 1;
inline constexpr int kExitInputError = 2;

struct CommandResult {
	int exit_code = kExitPass;
	std::string output;                   ///< report text or JSON
	std::optional<std::string> state_file; ///< produced state, for commands that write one
};

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Shared helpers

/// "2x3" -> {2, 3}
inline DimPair parse_dims(const std::string& s) {
	const auto x = s.find('x');
	if (x == std::string::npos) throw DimensionError("dims must look like 2x2, got '" + s + "'");
	std::size_t a = 0, b = 0;
	const auto ra = std::from_chars(s.data(), s.data() + x, a);
	const auto rb = std::from_chars(s.data() + x + 1, s.data() + s.size(), b);
	if (ra.ec != std::errc() || ra.ptr != s.data() + x || rb.ec != std::errc() || rb.ptr != s.data() + s.size() ||
	    a == 0 || b == 0)
		throw DimensionError("dims must look like 2x2, got '" + s + "'");
	return {a, b};
}

/// Named Pauli observables: x, y, z, i (case-insensitive).
inline std::optional<Observable> named_observable(std::string name) {
	for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
	if (name == "x" || name == "sx" || name == "sigma_x") return Observable(pauli_x());
	if (name == "y" || name == "sy" || name == "sigma_y") return Observable(pauli_y());
	if (name == "z" || name == "sz" || name == "sigma_z") return Observable(pauli_z());
	if (name == "i" || name == "id" || name == "identity") return Observable(ComplexMatrix::Identity(2, 2));
	return std::nullopt;
}

/// Turns a parsed file into the bipartite state to analyze. Pure states become
/// density matrices after tracing out `trace_out`; exactly two factors must remain.
inline BipartiteState to_bipartite(const ParsedState& parsed, const std::vector<std::string>& trace_out) {
	if (const auto* rho = std::get_if<BipartiteState>(&parsed)) {
		if (!trace_out.empty()) throw DimensionError("--trace-out applies to pure-state files only");
		return *rho;
	}
	const auto& psi = std::get<PureState>(parsed);
	for (const auto& label : trace_out) psi.factor_index(label);
	std::vector<std::string> keep;
	std::vector<std::size_t> dims;
	for (const auto& f : psi.layout())
		if (std::find(trace_out.begin(), trace_out.end(), f.label) == trace_out.end()) {
			keep.push_back(f.label);
			dims.push_back(f.dim);
		}
	if (keep.size() != 2)
		throw DimensionError("analysis needs exactly two factors after --trace-out, " + std::to_string(keep.size()) +
		                     " remain");
	return BipartiteState(DensityMatrix(reduced_density(psi, keep)), {dims[0], dims[1]});
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json matrix_json(const ComplexMatrix& m) {
	Json rows = Json::array();
	for (Index i = 0; i < m.rows(); ++i) {
		Json row = Json::array();
		for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
		rows.push_back(std::move(row));
	}
	return rows;
}

inline Json vector_json(const RealVector& v) {
	Json a = Json::array();
	for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
	return a;
}

inline std::string list_text(const Json& values) {
	std::string out = "[";
	for (std::size_t i = 0; i < values.size(); ++i) {
		if (i) out += ", ";
		out += format_double(values[i].get<double>());
	}
	return out + "]";
}

inline void matrix_text(std::ostringstream& os, const ComplexMatrix& m, const std::string& indent) {
	for (Index i = 0; i < m.rows(); ++i) {
		os << indent;
		for (Index j = 0; j < m.cols(); ++j) {
			if (j) os << "  ";
			os << '(' << format_double(m(i, j).real()) << ", " << format_double(m(i, j).imag()) << ')';
		}
		os << '\n';
	}
}

inline Json entanglement_json(const EntanglementReport& e, const CutSpec& cut) {
	Json j;
	j["cut"] = {{"left", cut.left}, {"right", cut.right}};
	j["schmidt_coefficients"] = e.schmidt_coefficients;
	j["schmidt_rank"] = e.schmidt_rank;
	j["entropy_bits"] = e.entropy_bits;
	j["entangled"] = e.entangled;
	j["rank_tolerance"] = kRankTolerance;
	return j;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
	double tolerance = kFactorabilityTolerance;
	std::vector<std::string> trace_out;
	bool json = false;
};

inline Json analysis_json(const BipartiteState& rho, double tolerance) {
	const CorrelationOperator delta = correlation_operator(rho);
	const CorrelationWitness w = synthesize_witness(rho, tolerance);
	Json j;
	j["dims"] = {rho.dims().dA, rho.dims().dB};
	j["marginal_a_eigenvalues"] = vector_json(hermitian_eig(rho.marginal(Subsystem::A)).eigenvalues);
	j["marginal_b_eigenvalues"] = vector_json(hermitian_eig(rho.marginal(Subsystem::B)).eigenvalues);
	j["delta_frobenius_norm"] = delta.frobenius_norm;
	j["factorable"] = delta.frobenius_norm <= tolerance;
	j["factorability_tolerance"] = tolerance;
	Json wj;
	wj["sigma1"] = w.sigma1;
	wj["covariance"] = w.covariance;
	wj["operator_schmidt_coefficients"] = w.schmidt.coefficients;
	wj["E"] = matrix_json(w.e.matrix());
	wj["F"] = matrix_json(w.f.matrix());
	auto projective = [](const Observable& o) {
		Json outcomes = Json::array();
		for (const auto& p : to_projective(o))
			outcomes.push_back({{"outcome", p.value}, {"projector", matrix_json(p.projector)}});
		return outcomes;
	};
	wj["E_projective"] = projective(w.e);
	wj["F_projective"] = projective(w.f);
	j["witness"] = std::move(wj);
	return j;
}

inline std::string analysis_text(const Json& j) {
	auto to_matrix = [](const Json& rows) {
		ComplexMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
		for (std::size_t r = 0; r < rows.size(); ++r)
			for (std::size_t c = 0; c < rows[r].size(); ++c)
				m(static_cast<Index>(r), static_cast<Index>(c)) = {rows[r][c][0].get<double>(), rows[r][c][1].get<double>()};
		return m;
	};
	std::ostringstream os;
	const auto& w = j["witness"];
	os << "state: " << j["dims"][0].get<std::size_t>() << "x" << j["dims"][1].get<std::size_t>() << '\n';
	os << "marginal A eigenvalues: " << list_text(j["marginal_a_eigenvalues"]) << '\n';
	os << "marginal B eigenvalues: " << list_text(j["marginal_b_eigenvalues"]) << '\n';
	os << "||Delta||_F: " << format_double(j["delta_frobenius_norm"].get<double>()) << '\n';
	os << "factorable: " << (j["factorable"].get<bool>() ? "true" : "false")
	   << " (tolerance " << format_double(j["factorability_tolerance"].get<double>()) << ")\n";
	os << "witness:\n";
	os << "  sigma1: " << format_double(w["sigma1"].get<double>()) << '\n';
	os << "  covariance: " << format_double(w["covariance"].get<double>()) << '\n';
	os << "  operator Schmidt coefficients: " << list_text(w["operator_schmidt_coefficients"]) << '\n';
	for (const char* name : {"E", "F"}) {
		os << "  " << name << ":\n";
		matrix_text(os, to_matrix(w[name]), "    ");
		os << "  " << name << " as projective measurement:\n";
		for (const auto& p : w[std::string(name) + "_projective"]) {
			os << "    outcome " << format_double(p["outcome"].get<double>()) << ", projector:\n";
			matrix_text(os, to_matrix(p["projector"]), "      ");
		}
	}
	return os.str();
}

inline CommandResult cmd_analyze(std::string_view state_text, const AnalyzeOptions& opts) {
	const BipartiteState rho = to_bipartite(parse_state_file(state_text), opts.trace_out);
	const Json j = analysis_json(rho, opts.tolerance);
	return {kExitPass, opts.json ? j.dump(2) + "\n" : analysis_text(j), std::nullopt};
}

// ---------------------------------------------------------------------------
// purify

struct PurifyOptions {
	std::optional<std::pair<std::size_t, std::size_t>> ancilla_dims;
	std::optional<std::uint64_t> unitary_seed;
	bool json = false;
};

/// Splits an "AB" factor back into A and B so written files carry the bipartition.
inline PureState split_system_factor(const PureState& psi, DimPair dims) {
	Layout layout;
	for (const auto& f : psi.layout()) {
		if (f.label == "AB") {
			layout.push_back({"A", dims.dA});
			layout.push_back({"B", dims.dB});
		} else {
			layout.push_back(f);
		}
	}
	return PureState(psi.amplitudes(), std::move(layout));
}

inline CommandResult cmd_purify(std::string_view state_text, const PurifyOptions& opts) {
	const ParsedState parsed = parse_state_file(state_text);
	const auto* rho = std::get_if<BipartiteState>(&parsed);
	if (!rho) throw ValidationError("kind", "purify expects a density-matrix file");

	Purification p = purify(*rho);
	CutSpec cut{{"AB"}, {"C"}};
	if (opts.ancilla_dims) {
		const auto [c1, c2] = *opts.ancilla_dims;
		if (c1 == 0 || c2 == 0) throw DimensionError("ancilla dimensions must be >= 1");
		p = embed_ancillas(p, c1, c2);
		cut = ac1_bc2_cut();
	}
	std::size_t ancilla = 1;
	for (const auto& f : p.state.layout())
		if (is_ancilla_label(f.label)) ancilla *= f.dim;
	if (opts.unitary_seed) p = apply_ancilla_unitary(p, random_unitary(ancilla, *opts.unitary_seed));

	const EntanglementReport e = cut_entanglement(p.state, cut);
	const PureState written = split_system_factor(p.state, rho->dims());
	const double residual = (trace_out_ancillas(p.state) - rho->matrix()).norm();

	Json j;
	j["layout"] = Json::array();
	for (const auto& f : written.layout()) j["layout"].push_back({{"label", f.label}, {"dim", f.dim}});
	j["unitary_seed"] = opts.unitary_seed ? Json(*opts.unitary_seed) : Json(nullptr);
	j["generator"] = std::string(Rng::kAlgorithm);
	j["roundtrip_residual"] = residual;
	j["entanglement"] = entanglement_json(e, cut);

	std::string out;
	if (opts.json) {
		out = j.dump(2) + "\n";
	} else {
		std::ostringstream os;
		os << "purification layout:";
		for (const auto& f : written.layout()) os << ' ' << f.label << '(' << f.dim << ')';
		os << '\n';
		if (opts.unitary_seed) os << "ancilla unitary seed: " << *opts.unitary_seed << " (" << Rng::kAlgorithm << ")\n";
		os << "||Tr_C(|psi><psi|) - rho||_F: " << format_double(residual) << '\n';
		os << "cut:";
		for (const auto& l : cut.left) os << ' ' << l;
		os << " |";
		for (const auto& l : cut.right) os << ' ' << l;
		os << '\n';
		os << "  Schmidt coefficients: " << list_text(Json(e.schmidt_coefficients)) << '\n';
		os << "  Schmidt rank: " << e.schmidt_rank << " (tolerance " << format_double(kRankTolerance) << ")\n";
		os << "  entropy (bits): " << format_double(e.entropy_bits) << '\n';
		os << "  entangled: " << (e.entangled ? "true" : "false") << '\n';
		out = os.str();
	}
	return {kExitPass, std::move(out), emit_state(written)};
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
	int theorem = 2;
	DimPair dims{2, 2};
	std::size_t trials = 100;
	std::uint64_t seed = 0;
	double tolerance = kFactorabilityTolerance;
	std::size_t unitaries = 20; ///< Theorem 1: sampled ancilla unitaries per state
	bool json = false;
};

inline TheoremReport run_verification(const VerifyOptions& opts) {
	if (opts.trials == 0) throw DimensionError("--trials must be >= 1");
	if (opts.theorem == 1) {
		if (opts.unitaries == 0) throw DimensionError("--unitaries must be >= 1");
		Theorem1Options t;
		t.factorability_tolerance = opts.tolerance;
		return verify_theorem1_campaign(opts.dims, opts.trials, opts.unitaries, opts.seed, t);
	}
	if (opts.theorem == 2) {
		Theorem2Options t;
		t.factorability_tolerance = opts.tolerance;
		return verify_theorem2(EnsembleSpec{opts.dims, true, true}, opts.trials, opts.seed, t);
	}
	throw DimensionError("--theorem must be 1 or 2");
}

inline CommandResult cmd_verify(const VerifyOptions& opts) {
	const TheoremReport r = run_verification(opts);
	return {r.passed() ? kExitPass : kExitCounterexample, opts.json ? r.to_json().dump(2) + "\n" : r.to_text(),
	        std::nullopt};
}

// ---------------------------------------------------------------------------
// sample

struct SampleOptions {
	std::vector<std::string> trace_out;
	std::size_t trials = 10000;
	std::uint64_t seed = 0;
	/// Second state sampled with the same observables (seed + 1) and compared by a homogeneity test.
	std::optional<std::string> compare_text;
	std::vector<std::string> compare_trace_out;
	double significance = 0.001;
	bool json = false;
};

inline Json sampling_json(const SamplingResult& r) {
	Json j;
	j["trials"] = r.trials;
	Json cells = Json::array();
	for (const auto& c : r.joint)
		cells.push_back({{"e", c.e}, {"f", c.f}, {"count", c.count}, {"probability", c.probability}});
	j["joint"] = std::move(cells);
	j["empirical_covariance"] = r.empirical_covariance;
	j["analytic_covariance"] = r.analytic_covariance;
	const ChiSquare g = chi_square_goodness_of_fit(r);
	j["chi_square"] = {{"statistic", g.statistic}, {"dof", g.dof}, {"p_value", g.p_value}};
	return j;
}

inline void sampling_text(std::ostringstream& os, const SamplingResult& r) {
	os << "  trials: " << r.trials << '\n';
	os << "  joint counts (e, f): count [probability]\n";
	for (const auto& c : r.joint)
		os << "    (" << format_double(c.e) << ", " << format_double(c.f) << "): " << c.count << " ["
		   << format_double(c.probability) << "]\n";
	os << "  empirical covariance: " << format_double(r.empirical_covariance) << '\n';
	os << "  analytic covariance: " << format_double(r.analytic_covariance) << '\n';
	const ChiSquare g = chi_square_goodness_of_fit(r);
	os << "  chi-square vs analytic: " << format_double(g.statistic) << " (dof " << g.dof << ", p = "
	   << format_double(g.p_value) << ")\n";
}

inline CommandResult cmd_sample(std::string_view state_text, const Observable& obs_a, const Observable& obs_b,
                                const SampleOptions& opts) {
	const BipartiteState rho = to_bipartite(parse_state_file(state_text), opts.trace_out);
	const SamplingResult r = sample_measurements(rho, obs_a, obs_b, opts.trials, opts.seed);

	Json j;
	j["seed"] = opts.seed;
	j["generator"] = std::string(Rng::kAlgorithm);
	j["sample"] = sampling_json(r);
	std::ostringstream os;
	os << "sample (seed " << opts.seed << ", " << Rng::kAlgorithm << "):\n";
	sampling_text(os, r);

	int exit_code = kExitPass;
	if (opts.compare_text) {
		const BipartiteState other = to_bipartite(parse_state_file(*opts.compare_text), opts.compare_trace_out);
		const SamplingResult s = sample_measurements(other, obs_a, obs_b, opts.trials, opts.seed + 1);
		const ChiSquare h = chi_square_homogeneity(r, s);
		const bool same = h.p_value > opts.significance;
		if (!same) exit_code = kExitCounterexample;
		j["compare"] = sampling_json(s);
		j["homogeneity"] = {{"statistic", h.statistic},
		                    {"dof", h.dof},
		                    {"p_value", h.p_value},
		                    {"significance", opts.significance},
		                    {"distinguishable", !same}};
		os << "comparison sample (seed " << opts.seed + 1 << "):\n";
		sampling_text(os, s);
		os << "homogeneity chi-square: " << format_double(h.statistic) << " (dof " << h.dof << ", p = "
		   << format_double(h.p_value) << "); " << (same ? "no difference" : "distributions differ") << " at p = "
		   << format_double(opts.significance) << '\n';
	}
	return {exit_code, opts.json ? j.dump(2) + "\n" : os.str(), std::nullopt};
}

} // namespace purcorr::cli
