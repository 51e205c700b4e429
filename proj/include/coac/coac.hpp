#pragma once

// Umbrella header.

#include "coac/arch.hpp"
#include "coac/error.hpp"
#include "coac/explorer.hpp"
#include "coac/flex_overhead.hpp"
#include "coac/loop_dims.hpp"
#include "coac/mapping_cost.hpp"
#include "coac/pareto.hpp"
#include "coac/report.hpp"
#include "coac/study.hpp"
#include "coac/su_space.hpp"
#include "coac/workload.hpp"
