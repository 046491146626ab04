#pragma once

// Continuous-time higher-order Markov processes: history-segment state
// functions, moving-average SDE models, Euler-Maruyama simulation,
// jump-moment / Chapman-Kolmogorov diagnostics, and pseudo-likelihood
// parameter estimation.

#include "homp/csv.hpp"
#include "homp/errors.hpp"
#include "homp/estimate.hpp"
#include "homp/functional.hpp"
#include "homp/history.hpp"
#include "homp/inference.hpp"
#include "homp/model.hpp"
#include "homp/optimize.hpp"
#include "homp/rng.hpp"
#include "homp/simulate.hpp"
#include "homp/stats.hpp"
#include "homp/version.hpp"
#include "homp/weights.hpp"
