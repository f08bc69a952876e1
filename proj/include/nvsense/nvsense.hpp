#pragma once

#include "nvsense/calibration.hpp"
#include "nvsense/classifier.hpp"
#include "nvsense/config.hpp"
#include "nvsense/constants.hpp"
#include "nvsense/errors.hpp"
#include "nvsense/experiments.hpp"
#include "nvsense/parallel.hpp"
#include "nvsense/physics.hpp"
#include "nvsense/readout.hpp"
#include "nvsense/rng.hpp"
#include "nvsense/sampling.hpp"
#include "nvsense/sensitivity.hpp"
