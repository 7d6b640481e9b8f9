#pragma once

#include "gldual/config.hpp"
#include "gldual/report.hpp"

namespace gldual {

/// Dispatches a scenario to the matching verification and collects scalars,
/// verdicts and a row table. Module errors become failed verdicts; the result
/// depends only on the scenario (seed included).
Report run_scenario(const Scenario& s);

/// Worker count for fan-out work, from GLDUAL_THREADS (default 1).
unsigned worker_threads();

}  // namespace gldual
