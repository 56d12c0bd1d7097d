#pragma once

// Text format for states and observables:
//
//   version: 1
//   dims: [2, 2]
//   labels: [A, B]            (optional; pure states only)
//   kind: density             (density | pure | observable)
//   matrix: [[[0.5, 0], [0, 0], ...], ...]     (density, observable)
//   vector: [[0.70710678118654757, 0], ...]    (pure)
//
// Entries are [re, im] pairs. Whitespace between tokens is insignificant and the
// keys may appear in any order. Numbers are written in shortest round-trip form,
// so emit followed by parse reproduces every double bit for bit.

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "purcorr/correlation.hpp"
#include "purcorr/errors.hpp"
#include "purcorr/linalg.hpp"
#include "purcorr/report.hpp"
#include "purcorr/states.hpp"

namespace purcorr {

/// Syntactic content of a state file before physical validation.
struct StateFile {
	int version = 1;
	std::vector<std::size_t> dims;
	std::vector<std::string> labels;
	std::string kind;
	ComplexMatrix matrix; ///< kind density / observable
	ComplexVector vector; ///< kind pure
};

using ParsedState = std::variant<BipartiteState, PureState>;

namespace detail {

class StateFileParser {
public:
	explicit StateFileParser(std::string_view text) : text_(text) {}

	StateFile parse() {
		StateFile out;
		bool seen_version = false, seen_dims = false, seen_kind = false, seen_labels = false;
		std::optional<std::vector<std::vector<Complex>>> rows;
		std::optional<std::vector<Complex>> entries;
		skip_space();
		while (pos_ < text_.size()) {
			const auto [line, col] = location();
			const std::string key = word();
			expect(':');
			auto once = [&](bool& seen) {
				if (seen) throw ParseError(line, col, "duplicate key '" + key + "'");
				seen = true;
			};
			if (key == "version") {
				once(seen_version);
				out.version = static_cast<int>(integer());
				if (out.version != 1) throw ParseError(line, col, "unsupported version " + std::to_string(out.version));
			} else if (key == "dims") {
				once(seen_dims);
				out.dims = list([&] { return integer(); });
				for (auto d : out.dims)
					if (d == 0) throw ParseError(line, col, "dimension 0");
			} else if (key == "labels") {
				once(seen_labels);
				out.labels = list([&] { return word(); });
			} else if (key == "kind") {
				once(seen_kind);
				out.kind = word();
				if (out.kind != "density" && out.kind != "pure" && out.kind != "observable")
					throw ParseError(line, col, "kind must be density, pure or observable");
			} else if (key == "matrix") {
				if (rows || entries) throw ParseError(line, col, "more than one data block");
				rows = list([&] { return list([&] { return pair(); }); });
			} else if (key == "vector") {
				if (rows || entries) throw ParseError(line, col, "more than one data block");
				entries = list([&] { return pair(); });
			} else {
				throw ParseError(line, col, "unknown key '" + key + "'");
			}
			skip_space();
		}
		const auto [line, col] = location();
		if (!seen_version) throw ParseError(line, col, "missing 'version'");
		if (!seen_dims) throw ParseError(line, col, "missing 'dims'");
		if (!seen_kind) throw ParseError(line, col, "missing 'kind'");
		if (out.kind == "pure") {
			if (!entries) throw ParseError(line, col, "pure state needs a 'vector' block");
			out.vector = ComplexVector(static_cast<Index>(entries->size()));
			for (std::size_t i = 0; i < entries->size(); ++i) out.vector(static_cast<Index>(i)) = (*entries)[i];
		} else {
			if (!rows) throw ParseError(line, col, out.kind + " needs a 'matrix' block");
			const std::size_t n = rows->size();
			out.matrix = ComplexMatrix(static_cast<Index>(n), static_cast<Index>(n));
			for (std::size_t i = 0; i < n; ++i) {
				if ((*rows)[i].size() != n)
					throw ParseError(line, col, "matrix row " + std::to_string(i) + " has " +
					                                std::to_string((*rows)[i].size()) + " entries, expected " +
					                                std::to_string(n));
				for (std::size_t j = 0; j < n; ++j)
					out.matrix(static_cast<Index>(i), static_cast<Index>(j)) = (*rows)[i][j];
			}
		}
		if (!out.labels.empty() && out.labels.size() != out.dims.size())
			throw ParseError(line, col, "labels and dims have different lengths");
		return out;
	}

private:
	std::pair<std::size_t, std::size_t> location() const {
		std::size_t line = 1, col = 1;
		for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
			if (text_[i] == '\n') {
				++line;
				col = 1;
			} else {
				++col;
			}
		}
		return {line, col};
	}

	[[noreturn]] void fail(const std::string& what) const {
		const auto [line, col] = location();
		throw ParseError(line, col, what);
	}

	void skip_space() {
		while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
	}

	bool peek(char c) {
		skip_space();
		return pos_ < text_.size() && text_[pos_] == c;
	}

	void expect(char c) {
		if (!peek(c)) fail(std::string("expected '") + c + "'");
		++pos_;
	}

	std::string word() {
		skip_space();
		const std::size_t start = pos_;
		while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
			++pos_;
		if (start == pos_ || std::isdigit(static_cast<unsigned char>(text_[start]))) {
			pos_ = start;
			fail("expected a name");
		}
		return std::string(text_.substr(start, pos_ - start));
	}

	double number() {
		skip_space();
		const std::size_t start = pos_;
		auto digits = [&] {
			const std::size_t s = pos_;
			while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
			return pos_ > s;
		};
		if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
		bool any = digits();
		if (pos_ < text_.size() && text_[pos_] == '.') {
			++pos_;
			any = digits() || any;
		}
		if (!any) {
			pos_ = start;
			fail("expected a number");
		}
		if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
			++pos_;
			if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
			if (!digits()) fail("malformed exponent");
		}
		double value = 0.0;
		const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
		if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
			pos_ = start;
			fail("number out of range");
		}
		return value;
	}

	std::size_t integer() {
		skip_space();
		const std::size_t start = pos_;
		while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
		std::size_t value = 0;
		const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
		if (start == pos_ || res.ec != std::errc()) {
			pos_ = start;
			fail("expected a nonnegative integer");
		}
		return value;
	}

	Complex pair() {
		expect('[');
		const double re = number();
		expect(',');
		const double im = number();
		expect(']');
		return {re, im};
	}

	template <typename Fn>
	std::vector<std::invoke_result_t<Fn&>> list(Fn&& element) {
		std::vector<std::invoke_result_t<Fn&>> out;
		expect('[');
		if (peek(']')) {
			++pos_;
			return out;
		}
		for (;;) {
			out.push_back(element());
			if (peek(',')) {
				++pos_;
				continue;
			}
			expect(']');
			return out;
		}
	}

	std::string_view text_;
	std::size_t pos_ = 0;
};

inline std::vector<std::string> default_labels(std::size_t factors) {
	switch (factors) {
	case 1: return {"A"};
	case 2: return {"A", "B"};
	case 3: return {"A", "B", "C"};
	case 4: return {"A", "B", "C1", "C2"};
	default: throw ValidationError("labels", "pure states with " + std::to_string(factors) + " factors need explicit labels");
	}
}

inline void write_pair(std::string& out, Complex z) {
	out += '[';
	out += format_double(z.real());
	out += ", ";
	out += format_double(z.imag());
	out += ']';
}

inline void write_list(std::string& out, const std::vector<std::string>& items) {
	out += '[';
	for (std::size_t i = 0; i < items.size(); ++i) {
		if (i) out += ", ";
		out += items[i];
	}
	out += ']';
}

inline void write_matrix(std::string& out, const ComplexMatrix& m) {
	out += "matrix: [\n";
	for (Index i = 0; i < m.rows(); ++i) {
		out += "  [";
		for (Index j = 0; j < m.cols(); ++j) {
			if (j) out += ", ";
			write_pair(out, m(i, j));
		}
		out += i + 1 < m.rows() ? "],\n" : "]\n";
	}
	out += "]\n";
}

inline std::string header(const std::vector<std::size_t>& dims, const std::string& kind) {
	std::vector<std::string> d;
	for (auto x : dims) d.push_back(std::to_string(x));
	std::string out = "version: 1\ndims: ";
	write_list(out, d);
	out += "\nkind: " + kind + "\n";
	return out;
}

} // namespace detail

/// Syntax-only parse; throws ParseError with the line and column of the problem.
inline StateFile parse_state_text(std::string_view text) { return detail::StateFileParser(text).parse(); }

/// Parses and validates a density or pure state file. Density files must have two factors.
inline ParsedState parse_state_file(std::string_view text) {
	StateFile f = parse_state_text(text);
	const std::size_t n = product(f.dims);
	if (f.kind == "density") {
		if (f.dims.size() != 2)
			throw ValidationError("dimensions", "density files must list exactly two factor dimensions");
		if (static_cast<std::size_t>(f.matrix.rows()) != n)
			throw ValidationError("dimensions", "matrix is " + std::to_string(f.matrix.rows()) + "x" +
			                                        std::to_string(f.matrix.rows()) + ", dims multiply to " +
			                                        std::to_string(n));
		return BipartiteState(DensityMatrix(std::move(f.matrix)), {f.dims[0], f.dims[1]});
	}
	if (f.kind == "pure") {
		if (static_cast<std::size_t>(f.vector.size()) != n)
			throw ValidationError("dimensions", "vector has " + std::to_string(f.vector.size()) +
			                                        " entries, dims multiply to " + std::to_string(n));
		const auto labels = f.labels.empty() ? detail::default_labels(f.dims.size()) : f.labels;
		Layout layout;
		for (std::size_t i = 0; i < labels.size(); ++i) layout.push_back({labels[i], f.dims[i]});
		return PureState(std::move(f.vector), std::move(layout));
	}
	throw ValidationError("kind", "expected a density or pure state, found kind '" + f.kind + "'");
}

/// Parses an observable file (kind: observable, one factor).
inline Observable parse_observable_file(std::string_view text) {
	StateFile f = parse_state_text(text);
	if (f.kind != "observable") throw ValidationError("kind", "expected kind 'observable', found '" + f.kind + "'");
	if (static_cast<std::size_t>(f.matrix.rows()) != product(f.dims))
		throw ValidationError("dimensions", "observable matrix does not match dims");
	return Observable(std::move(f.matrix));
}

inline std::string emit_state(const BipartiteState& rho) {
	std::string out = detail::header({rho.dims().dA, rho.dims().dB}, "density");
	detail::write_matrix(out, rho.matrix());
	return out;
}

inline std::string emit_state(const PureState& psi) {
	std::string out = detail::header(psi.dims(), "pure");
	std::vector<std::string> labels;
	for (const auto& f : psi.layout()) labels.push_back(f.label);
	out += "labels: ";
	detail::write_list(out, labels);
	out += "\nvector: [\n";
	const auto& v = psi.amplitudes();
	for (Index i = 0; i < v.size(); ++i) {
		out += "  ";
		detail::write_pair(out, v(i));
		out += i + 1 < v.size() ? ",\n" : "\n";
	}
	out += "]\n";
	return out;
}

inline std::string emit_state(const ParsedState& s) {
	return std::visit([](const auto& x) { return emit_state(x); }, s);
}

inline std::string emit_observable(const Observable& obs) {
	std::string out = detail::header({obs.dim()}, "observable");
	detail::write_matrix(out, obs.matrix());
	return out;
}

} // namespace purcorr
