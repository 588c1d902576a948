#pragma once

#include "fsspack/geometry.hpp"
#include "fsspack/correction.hpp"
#include "fsspack/formulation.hpp"
#include "fsspack/solver.hpp"
#include "fsspack/rng.hpp"
#include "fsspack/engine.hpp"
#include "fsspack/io.hpp"
#include "fsspack/instances.hpp"
#include "fsspack/report.hpp"
