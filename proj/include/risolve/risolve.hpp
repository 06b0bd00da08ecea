#pragma once

// Umbrella header.

#include "risolve/bench.hpp"
#include "risolve/engine.hpp"
#include "risolve/model.hpp"
#include "risolve/oracle.hpp"
#include "risolve/parser.hpp"
#include "risolve/pretty.hpp"
#include "risolve/solver.hpp"
#include "risolve/subst.hpp"
#include "risolve/term.hpp"
#include "risolve/theory_x.hpp"
#include "risolve/value.hpp"
