#pragma once

#include "lacuna/error.hpp"
#include "lacuna/dyadic.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/orlicz.hpp"
#include "lacuna/signal.hpp"
#include "lacuna/spectral.hpp"
#include "lacuna/multipliers.hpp"
#include "lacuna/step_multiplier_json.hpp"
#include "lacuna/martingale.hpp"
#include "lacuna/czd.hpp"
#include "lacuna/czd_json.hpp"
#include "lacuna/harness/config.hpp"
#include "lacuna/harness/report.hpp"
#include "lacuna/harness/ensemble.hpp"
#include "lacuna/harness/experiments.hpp"
#include "lacuna/harness/sharpness.hpp"
