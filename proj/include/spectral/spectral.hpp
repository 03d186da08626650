#pragma once

#include "spectral/common.hpp"
#include "spectral/order.hpp"
#include "spectral/band.hpp"
#include "spectral/skew.hpp"
#include "spectral/sheaf.hpp"
#include "spectral/patch.hpp"
#include "spectral/generate.hpp"
#include "spectral/io.hpp"
#include "spectral/dot.hpp"
#include "spectral/suite.hpp"
