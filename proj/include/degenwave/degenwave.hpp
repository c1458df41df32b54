#pragma once

#include "errors.hpp"
#include "quadrature.hpp"
#include "weights.hpp"
#include "spectral.hpp"
#include "feedback.hpp"
#include "discretization.hpp"
#include "dynamics.hpp"
#include "observability.hpp"
#include "hum.hpp"
#include "decay.hpp"
#include "parallel.hpp"
