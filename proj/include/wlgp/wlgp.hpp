#pragma once

// Convenience header pulling in the whole library.

#include "wlgp/diagnostics.hpp"
#include "wlgp/expr.hpp"
#include "wlgp/fit.hpp"
#include "wlgp/gaussian.hpp"
#include "wlgp/grid.hpp"
#include "wlgp/kernels.hpp"
#include "wlgp/model_json.hpp"
#include "wlgp/quadrature.hpp"
#include "wlgp/telemetry.hpp"
