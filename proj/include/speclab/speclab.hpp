#pragma once

#include "blockops.hpp"
#include "emit.hpp"
#include "errors.hpp"
#include "fourier_pde.hpp"
#include "grid.hpp"
#include "hausdorff.hpp"
#include "json_io.hpp"
#include "numlin.hpp"
#include "parallel.hpp"
#include "pseudo.hpp"
#include "quadrature.hpp"
#include "study.hpp"
#include "toeplitz.hpp"
