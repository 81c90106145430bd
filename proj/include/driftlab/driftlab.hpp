#pragma once

#include "driftlab/core.hpp"
#include "driftlab/drift.hpp"
#include "driftlab/games.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/lab.hpp"
#include "driftlab/regularizers.hpp"
#include "driftlab/stability.hpp"
