#pragma once

#include <cstdint>

#include "purcorr/linalg.hpp"
#include "purcorr/rng.hpp"

namespace testing_support {

using purcorr::ComplexMatrix;
using purcorr::Index;

inline ComplexMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
	purcorr::Rng rng(seed);
	ComplexMatrix m(rows, cols);
	for (Index i = 0; i < rows; ++i)
		for (Index j = 0; j < cols; ++j) m(i, j) = rng.complex_normal();
	return m;
}

inline ComplexMatrix random_hermitian(Index n, std::uint64_t seed) {
	const ComplexMatrix x = random_matrix(n, n, seed);
	return 0.5 * (x + x.adjoint());
}

} // namespace testing_support
