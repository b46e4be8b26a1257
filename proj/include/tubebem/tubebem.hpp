#pragma once

// Umbrella header.

#include "tubebem/common.hpp"
#include "tubebem/config.hpp"
#include "tubebem/gauss.hpp"
#include "tubebem/geometry.hpp"
#include "tubebem/kernels.hpp"
#include "tubebem/mesh.hpp"
#include "tubebem/operators.hpp"
#include "tubebem/potentials.hpp"
#include "tubebem/quadrature.hpp"
#include "tubebem/reporting.hpp"
#include "tubebem/solve.hpp"
#include "tubebem/verify.hpp"
