#pragma once

#include "funceq/chebyshev.hpp"
#include "funceq/config.hpp"
#include "funceq/errors.hpp"
#include "funceq/expr.hpp"
#include "funceq/jet.hpp"
#include "funceq/operator.hpp"
#include "funceq/problems.hpp"
#include "funceq/report.hpp"
#include "funceq/solver.hpp"
#include "funceq/strip.hpp"
