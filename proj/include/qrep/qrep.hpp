#pragma once

// Umbrella header.

#include "qrep/core.hpp"
#include "qrep/mc.hpp"
#include "qrep/optimize.hpp"
#include "qrep/presets.hpp"
#include "qrep/rates.hpp"
#include "qrep/rng.hpp"
#include "qrep/sweep.hpp"
#include "qrep/table.hpp"
#include "qrep/version.hpp"
