#pragma once

#include "algorithms.hpp"
#include "components.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "rational.hpp"
#include "solver.hpp"
#include "stochastic.hpp"
