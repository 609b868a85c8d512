#pragma once
// Everything in one include.

#include "context.hpp"
#include "codes.hpp"
#include "cfmaps.hpp"
#include "domain.hpp"
#include "geometry.hpp"
#include "reduction.hpp"
#include "flow.hpp"
#include "measure.hpp"
