#pragma once

#include "rbal/active_learning.hpp"
#include "rbal/config.hpp"
#include "rbal/decision.hpp"
#include "rbal/error.hpp"
#include "rbal/evpi_grid.hpp"
#include "rbal/experiment.hpp"
#include "rbal/gmm.hpp"
#include "rbal/io.hpp"
#include "rbal/preprocessing.hpp"
#include "rbal/probability.hpp"
#include "rbal/rng.hpp"
#include "rbal/synthetic.hpp"
