#pragma once

#include "error.hpp"
#include "vec.hpp"
#include "rng.hpp"
#include "parallel.hpp"
#include "gauss.hpp"
#include "kernels.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "exterior_data.hpp"
#include "harmonic.hpp"
#include "wos.hpp"
#include "lp.hpp"
#include "gaps.hpp"
#include "limits.hpp"
#include "io.hpp"
