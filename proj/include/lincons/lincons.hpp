#pragma once

// Umbrella header for the linear-consensus toolkit: classification of
// consensus solvability, closed-form consensus functions, similarity-based
// synthesis, and switched block-Laplacian simulation with Lyapunov auditing.

#include "lincons/blocks.hpp"
#include "lincons/classify.hpp"
#include "lincons/consensus_function.hpp"
#include "lincons/errors.hpp"
#include "lincons/linalg.hpp"
#include "lincons/matrix_io.hpp"
#include "lincons/report.hpp"
#include "lincons/similarity.hpp"
#include "lincons/switched.hpp"
