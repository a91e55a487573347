#pragma once

#include "mpsh/errors.hpp"
#include "mpsh/combinatorics.hpp"
#include "mpsh/hermitian.hpp"
#include "mpsh/cones.hpp"
#include "mpsh/fm_operator.hpp"
#include "mpsh/curvature.hpp"
#include "mpsh/grid.hpp"
#include "mpsh/solver.hpp"
#include "mpsh/regularization.hpp"
