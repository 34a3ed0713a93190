#pragma once

#include "gpwide/config.hpp"
#include "gpwide/diagnostics.hpp"
#include "gpwide/expr.hpp"
#include "gpwide/functional.hpp"
#include "gpwide/grid.hpp"
#include "gpwide/io.hpp"
#include "gpwide/minimize.hpp"
#include "gpwide/parabolic.hpp"
#include "gpwide/problem.hpp"
#include "gpwide/run.hpp"
#include "gpwide/threading.hpp"
