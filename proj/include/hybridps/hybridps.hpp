#pragma once

// Umbrella header.

#include "hybridps/core.hpp"
#include "hybridps/dynamics.hpp"
#include "hybridps/integrator.hpp"
#include "hybridps/oracle.hpp"
#include "hybridps/output.hpp"
#include "hybridps/representations.hpp"
#include "hybridps/rng.hpp"
#include "hybridps/run_config.hpp"
#include "hybridps/stats.hpp"
