#pragma once

#include "hetsched/model.hpp"
#include "hetsched/cab.hpp"
#include "hetsched/grin.hpp"
#include "hetsched/instances.hpp"
#include "hetsched/sim.hpp"
#include "hetsched/experiment.hpp"
#include "hetsched/acceptance.hpp"
