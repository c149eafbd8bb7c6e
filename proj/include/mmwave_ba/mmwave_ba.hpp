#pragma once

#include "mmwave_ba/config.hpp"
#include "mmwave_ba/random.hpp"
#include "mmwave_ba/geometry.hpp"
#include "mmwave_ba/antenna.hpp"
#include "mmwave_ba/channel.hpp"
#include "mmwave_ba/beam_training.hpp"
#include "mmwave_ba/metrics.hpp"
#include "mmwave_ba/quadrature.hpp"
#include "mmwave_ba/analytic.hpp"
#include "mmwave_ba/sim_engine.hpp"
