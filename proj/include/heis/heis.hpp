#pragma once

#include "bmo.hpp"
#include "cc.hpp"
#include "core.hpp"
#include "fields.hpp"
#include "hom.hpp"
#include "maps.hpp"
#include "measure.hpp"
#include "metrics.hpp"
#include "metrics_basic.hpp"
#include "necessity.hpp"
#include "pansu.hpp"
#include "parallel.hpp"
#include "qc.hpp"
#include "rng.hpp"
#include "sets.hpp"
#include "stats.hpp"
