#pragma once

#include "fockconc/common.hpp"
#include "fockconc/special.hpp"
#include "fockconc/fock.hpp"
#include "fockconc/transforms.hpp"
#include "fockconc/grid.hpp"
#include "fockconc/concentration.hpp"
#include "fockconc/geometry.hpp"
#include "fockconc/stability.hpp"
#include "fockconc/highdim.hpp"
#include "fockconc/properties.hpp"
#include "fockconc/report.hpp"
#include "fockconc/verify.hpp"
