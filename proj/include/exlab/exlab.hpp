#pragma once

/// \file exlab.hpp
/// Everything: model, analysis, catalog, sampling, learning, validation and
/// the sweep harness.

#include "exlab/analysis.hpp"
#include "exlab/core.hpp"
#include "exlab/env_io.hpp"
#include "exlab/error.hpp"
#include "exlab/learning.hpp"
#include "exlab/rng.hpp"
#include "exlab/sampling.hpp"
#include "exlab/sweep.hpp"
#include "exlab/validation.hpp"
#include "exlab/zoo.hpp"
