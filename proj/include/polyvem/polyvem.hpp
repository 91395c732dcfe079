#pragma once

#include "polyvem/geometry.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/quadrature.hpp"
#include "polyvem/parallel.hpp"
#include "polyvem/element.hpp"
#include "polyvem/system.hpp"
#include "polyvem/estimator.hpp"
#include "polyvem/jet.hpp"
#include "polyvem/zshape_profile.hpp"
#include "polyvem/bench.hpp"
#include "polyvem/adaptive.hpp"
