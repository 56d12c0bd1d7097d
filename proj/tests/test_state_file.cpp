#include <cmath>
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "purcorr/purification.hpp"
#include "purcorr/state_file.hpp"
#include "test_helpers.hpp"

using namespace purcorr;

namespace {

const char* kSourceFile = R"(version: 1
dims: [2, 2]
kind: density
matrix: [
  [[0.5, 0], [0, 0], [0, 0], [0, 0]],
  [[0, 0], [0, 0], [0, 0], [0, 0]],
  [[0, 0], [0, 0], [0, 0], [0, 0]],
  [[0, 0], [0, 0], [0, 0], [0.5, 0]]
]
)";

bool bit_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
	return a.rows() == b.rows() && a.cols() == b.cols() &&
	       std::memcmp(a.data(), b.data(), sizeof(Complex) * static_cast<std::size_t>(a.size())) == 0;
}

bool bit_equal(const ComplexVector& a, const ComplexVector& b) {
	return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(Complex) * static_cast<std::size_t>(a.size())) == 0;
}

template <typename Fn>
void expect_validation_error(const std::string& text, const std::string& invariant, Fn&& parse) {
	try {
		parse(text);
		ADD_FAILURE() << "accepted:\n" << text;
	} catch (const ValidationError& e) {
		EXPECT_EQ(e.invariant(), invariant) << e.what();
	}
}

} // namespace

TEST(ParseStateFile, SourceState) {
	const ParsedState s = parse_state_file(kSourceFile);
	ASSERT_TRUE(std::holds_alternative<BipartiteState>(s));
	EXPECT_EQ(std::get<BipartiteState>(s), example_source_state());
}

TEST(ParseStateFile, WhitespaceInsensitive) {
	const std::string compact =
	    "version:1 dims:[2,2] kind:density matrix:[[[0.5,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],"
	    "[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[5e-1,0]]]";
	EXPECT_EQ(std::get<BipartiteState>(parse_state_file(compact)), example_source_state());
}

TEST(ParseStateFile, TraceViolationNamesInvariant) {
	std::string text = kSourceFile;
	text.replace(text.find("[0.5, 0]]\n]"), 8, "[0.4, 0]");
	expect_validation_error(text, "trace", [](const std::string& t) { parse_state_file(t); });
}

TEST(ParseStateFile, NanIsRejected) {
	std::string text = kSourceFile;
	text.replace(text.find("[0.5, 0]"), 8, "[nan, 0]");
	try {
		parse_state_file(text);
		FAIL() << "NaN accepted";
	} catch (const ParseError& e) {
		EXPECT_EQ(e.line(), 5u);
		EXPECT_EQ(e.column(), 5u);
	}
}

TEST(ParseStateFile, HugeValueIsRejected) {
	std::string text = kSourceFile;
	text.replace(text.find("[0.5, 0]"), 8, "[1e999, 0]");
	EXPECT_THROW(parse_state_file(text), ParseError);
}

TEST(ParseStateFile, OtherValidationFailures) {
	const std::string nonhermitian = R"(version: 1
dims: [2, 1]
kind: density
matrix: [[[0.5, 0], [0.3, 0]], [[0, 0], [0.5, 0]]])";
	expect_validation_error(nonhermitian, "hermitian", [](const std::string& t) { parse_state_file(t); });
	const std::string negative = R"(version: 1
dims: [2, 1]
kind: density
matrix: [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]])";
	expect_validation_error(negative, "positive semidefinite", [](const std::string& t) { parse_state_file(t); });
	const std::string unnormalized = "version: 1\ndims: [2]\nkind: pure\nvector: [[1, 0], [1, 0]]";
	expect_validation_error(unnormalized, "normalization", [](const std::string& t) { parse_state_file(t); });
	const std::string wrong_dims = "version: 1\ndims: [2, 2]\nkind: pure\nvector: [[1, 0], [0, 0]]";
	expect_validation_error(wrong_dims, "dimensions", [](const std::string& t) { parse_state_file(t); });
}

TEST(ParseStateFile, SyntaxErrorsCarryPositions) {
	const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> cases = {
	    {"version: 1\ndims: [2, 2\nkind: density", {3, 1}},
	    {"version: 2\n", {1, 1}},
	    {"version: 1\ndims: [2]\nkind: mixed\n", {3, 1}},
	    {"version: 1\ndims: [2]\nfoo: 3\n", {3, 1}},
	    {"version: 1\ndims: [2]\nkind: pure\nvector: [[1, 0] [0, 0]]", {4, 17}},
	};
	for (const auto& [text, pos] : cases) {
		try {
			parse_state_text(text);
			ADD_FAILURE() << "accepted: " << text;
		} catch (const ParseError& e) {
			EXPECT_EQ(e.line(), pos.first) << text << "\n" << e.what();
			EXPECT_EQ(e.column(), pos.second) << text << "\n" << e.what();
		}
	}
	EXPECT_THROW(parse_state_text("dims: [2]\nkind: pure\nvector: [[1, 0], [0, 0]]"), ParseError);
	EXPECT_THROW(parse_state_text("version: 1\nversion: 1\ndims: [2]\nkind: pure\nvector: [[1, 0], [0, 0]]"), ParseError);
	EXPECT_THROW(parse_state_text("version: 1\ndims: [2]\nkind: density\nmatrix: [[[1, 0], [0, 0]]]"), ParseError);
}

TEST(ParseStateFile, PureWithDefaultAndExplicitLabels) {
	const std::string text = "version: 1\ndims: [2, 2, 2]\nkind: pure\nvector: [[0.7071067811865475, 0], [0, 0], [0, 0], "
	                         "[0, 0], [0, 0], [0, 0], [0, 0], [0.7071067811865475, 0]]";
	const PureState g = std::get<PureState>(parse_state_file(text));
	EXPECT_EQ(g, ghz());
	const std::string labelled = "version: 1\ndims: [2, 2]\nlabels: [X, Y]\nkind: pure\nvector: [[1, 0], [0, 0], [0, 0], [0, 0]]";
	const PureState p = std::get<PureState>(parse_state_file(labelled));
	EXPECT_EQ(p.layout()[0].label, "X");
	EXPECT_EQ(p.layout()[1].label, "Y");
}

TEST(ParseObservableFile, RoundTripAndKindCheck) {
	const Observable o(testing_support::random_hermitian(3, 4));
	const Observable back = parse_observable_file(emit_observable(o));
	EXPECT_TRUE(bit_equal(back.matrix(), o.matrix()));
	EXPECT_THROW(parse_observable_file(kSourceFile), ValidationError);
}

TEST(EmitState, CanonicalStatesRoundTripBitExact) {
	const std::vector<ParsedState> canonical = {
	    example_source_state(),
	    ghz(),
	    BipartiteState(DensityMatrix(ComplexMatrix::Identity(4, 4) / 4.0), {2, 2}),
	    BipartiteState(DensityMatrix(reduced_density(ghz(), {"A", "B"})), {2, 2}),
	    purify(example_source_state()).state,
	    factored_purification(DensityMatrix(ComplexMatrix::Identity(2, 2) * 0.5),
	                          DensityMatrix(ComplexMatrix::Identity(2, 2) * 0.5)).state,
	};
	for (const auto& s : canonical) {
		const std::string text = emit_state(s);
		const ParsedState back = parse_state_file(text);
		EXPECT_EQ(emit_state(back), text);
		if (const auto* b = std::get_if<BipartiteState>(&s)) {
			const auto& r = std::get<BipartiteState>(back);
			EXPECT_TRUE(bit_equal(r.matrix(), b->matrix()));
			EXPECT_EQ(r.dims().dA, b->dims().dA);
		} else {
			const auto& p = std::get<PureState>(s);
			const auto& r = std::get<PureState>(back);
			EXPECT_TRUE(bit_equal(r.amplitudes(), p.amplitudes()));
			EXPECT_EQ(r.layout().size(), p.layout().size());
		}
	}
}

TEST(EmitState, RandomStatesRoundTripBitExact) {
	for (std::uint64_t seed = 0; seed < 100; ++seed) {
		const std::size_t da = 1 + seed % 3, db = 1 + (seed / 3) % 3;
		const BipartiteState rho = random_density({da, db}, 1 + seed % (da * db), seed);
		const auto back = std::get<BipartiteState>(parse_state_file(emit_state(rho)));
		EXPECT_TRUE(bit_equal(back.matrix(), rho.matrix()));
		EXPECT_EQ(back, rho);

		const PureState psi(random_pure(da * db * 2, seed).amplitudes(), {{"A", da}, {"B", db}, {"C", 2}});
		const auto pback = std::get<PureState>(parse_state_file(emit_state(psi)));
		EXPECT_TRUE(bit_equal(pback.amplitudes(), psi.amplitudes()));
		EXPECT_EQ(pback, psi);
	}
}

TEST(EmitState, ExtremeDoublesRoundTrip) {
	ComplexVector v(4);
	v << Complex(std::numeric_limits<double>::denorm_min(), -0.0), Complex(1e-300, 5e-324),
	    Complex(std::nextafter(1.0, 0.0), 0.0), Complex(0.0, 2.2250738585072014e-308);
	v.normalize();
	const PureState psi(v, {{"A", 2}, {"B", 2}});
	const auto back = std::get<PureState>(parse_state_file(emit_state(psi)));
	EXPECT_TRUE(bit_equal(back.amplitudes(), psi.amplitudes()));
}
