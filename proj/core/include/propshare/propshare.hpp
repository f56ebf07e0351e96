#pragma once

#include "propshare/dynamics.hpp"
#include "propshare/errors.hpp"
#include "propshare/experiment.hpp"
#include "propshare/game.hpp"
#include "propshare/hungarian.hpp"
#include "propshare/matrix.hpp"
#include "propshare/metrics.hpp"
#include "propshare/optimum.hpp"
#include "propshare/rng.hpp"
#include "propshare/strategies.hpp"
