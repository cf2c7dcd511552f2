#pragma once

#include "trdsa/analytics.hpp"
#include "trdsa/combinatorics.hpp"
#include "trdsa/errors.hpp"
#include "trdsa/numeric.hpp"
#include "trdsa/params.hpp"
#include "trdsa/probability.hpp"
#include "trdsa/rng.hpp"
#include "trdsa/simulator.hpp"
#include "trdsa/sweep.hpp"
