#pragma once

#include "exlab/learning/config.hpp"
#include "exlab/learning/counts.hpp"
#include "exlab/learning/encoders.hpp"
#include "exlab/learning/engine.hpp"
#include "exlab/learning/learn.hpp"
#include "exlab/learning/select.hpp"
#include "exlab/learning/statistics.hpp"
