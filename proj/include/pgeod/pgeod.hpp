#pragma once

// Everything except io.hpp, which additionally needs nlohmann_json.

#include "pgeod/catalog.hpp"
#include "pgeod/config.hpp"
#include "pgeod/error.hpp"
#include "pgeod/expr.hpp"
#include "pgeod/facts.hpp"
#include "pgeod/geodesic.hpp"
#include "pgeod/level.hpp"
#include "pgeod/metric.hpp"
#include "pgeod/ode.hpp"
#include "pgeod/path.hpp"
#include "pgeod/projective.hpp"
#include "pgeod/symmetry.hpp"
