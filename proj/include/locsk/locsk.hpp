#pragma once

#include "locsk/analytic.hpp"
#include "locsk/enumerate.hpp"
#include "locsk/errors.hpp"
#include "locsk/harness.hpp"
#include "locsk/interpolation.hpp"
#include "locsk/kernel.hpp"
#include "locsk/lattice.hpp"
#include "locsk/logsumexp.hpp"
#include "locsk/mcmc.hpp"
#include "locsk/model.hpp"
#include "locsk/parallel.hpp"
#include "locsk/quadrature.hpp"
#include "locsk/rng.hpp"
#include "locsk/stats.hpp"
