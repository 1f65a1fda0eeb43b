#pragma once

#include "replicator/errors.hpp"
#include "replicator/model_zoo.hpp"
#include "replicator/dynamics.hpp"
#include "replicator/equilibria.hpp"
#include "replicator/sweep.hpp"
#include "replicator/stochastic.hpp"
