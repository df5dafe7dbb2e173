#ifndef NLSYS_NLSYS_HPP
#define NLSYS_NLSYS_HPP

#include "nlsys/params.hpp"
#include "nlsys/grid.hpp"
#include "nlsys/functionals.hpp"
#include "nlsys/scaling.hpp"
#include "nlsys/soliton.hpp"
#include "nlsys/solver.hpp"
#include "nlsys/closedform.hpp"
#include "nlsys/bstar.hpp"
#include "nlsys/io.hpp"

#endif  // NLSYS_NLSYS_HPP
