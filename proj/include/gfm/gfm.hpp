#pragma once

// Core model: network, controller, IVS switching, scenarios, simulation and
// closed-form analysis. Serialization lives in gfm/report_io.hpp.

#include "gfm/analysis.hpp"
#include "gfm/controller.hpp"
#include "gfm/dq.hpp"
#include "gfm/filters.hpp"
#include "gfm/ivs_switch.hpp"
#include "gfm/network.hpp"
#include "gfm/scenario.hpp"
#include "gfm/simulator.hpp"
