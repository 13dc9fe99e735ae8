#pragma once

#include "hobake/errors.hpp"
#include "hobake/quadrature.hpp"
#include "hobake/basis.hpp"
#include "hobake/tensor.hpp"
#include "hobake/parallel.hpp"
#include "hobake/mesh.hpp"
#include "hobake/assembly.hpp"
#include "hobake/operators.hpp"
#include "hobake/reference.hpp"
#include "hobake/krylov.hpp"
#include "hobake/bakeoff.hpp"
#include "hobake/metrics.hpp"
#include "hobake/config.hpp"
#include "hobake/verify.hpp"
