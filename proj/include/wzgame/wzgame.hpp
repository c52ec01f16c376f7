#pragma once

#include "wzgame/car_following.hpp"
#include "wzgame/config.hpp"
#include "wzgame/core.hpp"
#include "wzgame/game.hpp"
#include "wzgame/harness.hpp"
#include "wzgame/io.hpp"
#include "wzgame/metrics.hpp"
#include "wzgame/planner.hpp"
#include "wzgame/sampling.hpp"
#include "wzgame/sim.hpp"
#include "wzgame/stats.hpp"
