#pragma once

// Independent reference computations used to check the library.

#include <complex>
#include <vector>

#include "qaccel/graph.hpp"
#include "qaccel/params.hpp"

namespace qaccel::fx {

/// Final QAOA state from dense Kronecker-built operators and matrix
/// exponentials; qubit q is bit q of the basis index.
std::vector<std::complex<double>> dense_state(const IsingGraph& g, const ParameterVector& p);

/// -<psi| H_C |psi> from dense_state.
double dense_score(const IsingGraph& g, const ParameterVector& p);

/// Central finite-difference gradient of the library score.
std::vector<double> central_difference(const IsingGraph& g, const ParameterVector& p, double h);

}  // namespace qaccel::fx
