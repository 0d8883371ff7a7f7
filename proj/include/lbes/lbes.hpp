#pragma once

#include "lbes/analysis.hpp"
#include "lbes/bracket.hpp"
#include "lbes/config.hpp"
#include "lbes/cost.hpp"
#include "lbes/dither.hpp"
#include "lbes/io.hpp"
#include "lbes/iterated_integrals.hpp"
#include "lbes/presets.hpp"
#include "lbes/simulator.hpp"
