#pragma once

// Everything: state and projection, prox operators, splitting solvers,
// limiters and the DG simulator.

#include "idp/cubic.hpp"
#include "idp/diagnostics.hpp"
#include "idp/errors.hpp"
#include "idp/field.hpp"
#include "idp/io.hpp"
#include "idp/limiter.hpp"
#include "idp/numerics.hpp"
#include "idp/projection.hpp"
#include "idp/prox.hpp"
#include "idp/splitting.hpp"
#include "idp/state.hpp"
#include "idp/dg/basis.hpp"
#include "idp/dg/quadrature.hpp"
#include "idp/dg/solution.hpp"
#include "idp/sim/advection1d.hpp"
#include "idp/sim/config.hpp"
#include "idp/sim/euler.hpp"
#include "idp/sim/experiments.hpp"
#include "idp/sim/manufactured.hpp"
#include "idp/sim/pipeline.hpp"
#include "idp/sim/riemann.hpp"
#include "idp/sim/runs.hpp"
#include "idp/sim/time_integration.hpp"
