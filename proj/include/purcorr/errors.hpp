#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace purcorr {

/// Operand shapes do not fit together (wrong factor dimensions, bad index sets).
class DimensionError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

/// A value violates a physical or mathematical invariant. `invariant()` names it
/// ("hermitian", "trace", "positive semidefinite", "normalization", ...).
class ValidationError : public std::invalid_argument {
public:
	ValidationError(std::string invariant, const std::string& detail)
		: std::invalid_argument(invariant + ": " + detail), invariant_(std::move(invariant)) {}

	const std::string& invariant() const noexcept { return invariant_; }

private:
	std::string invariant_;
};

/// Malformed state-file text; carries the 1-based line/column of the offending token.
class ParseError : public std::runtime_error {
public:
	ParseError(std::size_t line, std::size_t column, const std::string& what)
		: std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
		  line_(line), column_(column) {}

	std::size_t line() const noexcept { return line_; }
	std::size_t column() const noexcept { return column_; }

private:
	std::size_t line_;
	std::size_t column_;
};

} // namespace purcorr
