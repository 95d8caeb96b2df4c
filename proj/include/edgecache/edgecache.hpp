#pragma once

// Everything in one include.

#include "edgecache/analysis.hpp"
#include "edgecache/cache.hpp"
#include "edgecache/config.hpp"
#include "edgecache/error.hpp"
#include "edgecache/generator.hpp"
#include "edgecache/geo.hpp"
#include "edgecache/geocollab.hpp"
#include "edgecache/io.hpp"
#include "edgecache/manifest.hpp"
#include "edgecache/reference.hpp"
#include "edgecache/report.hpp"
#include "edgecache/rng.hpp"
#include "edgecache/sim.hpp"
#include "edgecache/trace.hpp"
