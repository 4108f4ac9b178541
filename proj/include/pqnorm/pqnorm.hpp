#pragma once

#include "pqnorm/common.hpp"
#include "pqnorm/rng.hpp"
#include "pqnorm/specfn.hpp"
#include "pqnorm/quadrature.hpp"
#include "pqnorm/inversion.hpp"
#include "pqnorm/norms.hpp"
#include "pqnorm/oracle.hpp"
#include "pqnorm/relaxation.hpp"
#include "pqnorm/rounding.hpp"
