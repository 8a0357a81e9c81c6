#pragma once

#include "kite/analysis.hpp"
#include "kite/baselines.hpp"
#include "kite/config.hpp"
#include "kite/errors.hpp"
#include "kite/io.hpp"
#include "kite/kernels.hpp"
#include "kite/linalg.hpp"
#include "kite/rng.hpp"
#include "kite/selector.hpp"
#include "kite/serialize.hpp"
#include "kite/synthbench.hpp"
#include "kite/types.hpp"
