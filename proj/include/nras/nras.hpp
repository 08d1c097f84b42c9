#pragma once

#include "nras/coarse.hpp"
#include "nras/common.hpp"
#include "nras/decomposition.hpp"
#include "nras/experiment.hpp"
#include "nras/linalg.hpp"
#include "nras/linesearch.hpp"
#include "nras/mesh.hpp"
#include "nras/newton.hpp"
#include "nras/objective.hpp"
#include "nras/problems.hpp"
#include "nras/qp.hpp"
#include "nras/schwarz.hpp"
