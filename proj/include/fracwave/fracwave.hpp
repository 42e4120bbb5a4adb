#pragma once

// Umbrella header: spectral solver and experiment harness for the fractional
// telegraph equation u_tt + (-Lap)^s u + a(x) u + b(x) u_t = 0 with
// mollifier-regularized singular coefficients.

#include "fracwave/errors.hpp"
#include "fracwave/reduce.hpp"
#include "fracwave/grid.hpp"
#include "fracwave/fracops.hpp"
#include "fracwave/mollify.hpp"
#include "fracwave/propagate.hpp"
#include "fracwave/duhamel.hpp"
#include "fracwave/experiments.hpp"
#include "fracwave/io.hpp"
#include "fracwave/config.hpp"
#include "fracwave/commands.hpp"
