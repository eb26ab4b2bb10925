#pragma once

#include "banded.hpp"
#include "boundary.hpp"
#include "chebyshev.hpp"
#include "cmv.hpp"
#include "common.hpp"
#include "herglotz.hpp"
#include "io.hpp"
#include "jacobi.hpp"
#include "measure.hpp"
#include "mobius.hpp"
#include "potential.hpp"
#include "purity.hpp"
#include "quadrature.hpp"
#include "schrodinger.hpp"
#include "sets.hpp"
