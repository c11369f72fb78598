#pragma once

#include "zigzag/analytics.hpp"
#include "zigzag/diagnostics.hpp"
#include "zigzag/lmc.hpp"
#include "zigzag/manifest.hpp"
#include "zigzag/output.hpp"
#include "zigzag/parallel.hpp"
#include "zigzag/potentials.hpp"
#include "zigzag/random.hpp"
#include "zigzag/sampler.hpp"
#include "zigzag/statistics.hpp"
