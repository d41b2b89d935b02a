#pragma once

#include "analysis.hpp"
#include "assembly.hpp"
#include "dg_function.hpp"
#include "expression.hpp"
#include "felib/basis.hpp"
#include "felib/local_operators.hpp"
#include "felib/quadrature.hpp"
#include "mesh.hpp"
#include "problem.hpp"
#include "solver.hpp"
#include "study.hpp"
