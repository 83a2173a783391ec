#pragma once

#include "yano/manifold.hpp"
#include "yano/sphharm.hpp"
#include "yano/grid.hpp"
#include "yano/forms.hpp"
#include "yano/operators.hpp"
#include "yano/invariants.hpp"
#include "yano/oracles.hpp"
#include "yano/report_io.hpp"
