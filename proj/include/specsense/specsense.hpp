#pragma once

// Umbrella header: distributed compressed wideband spectrum sensing
// simulator. Individual headers can be included on their own.

#include "specsense/aliasing_reference.hpp"
#include "specsense/bpdn.hpp"
#include "specsense/decision.hpp"
#include "specsense/experiment.hpp"
#include "specsense/measurement.hpp"
#include "specsense/metrics.hpp"
#include "specsense/oracle.hpp"
#include "specsense/rng.hpp"
#include "specsense/sampler.hpp"
#include "specsense/spectrum.hpp"
