#pragma once

// Umbrella header.

#include "flucast/calendar.hpp"
#include "flucast/common.hpp"
#include "flucast/region_series.hpp"

#include "flucast/predictor_grid.hpp"
#include "flucast/sikjalpha.hpp"
#include "flucast/trajectories.hpp"

#include "flucast/forest.hpp"
#include "flucast/lsboost.hpp"
#include "flucast/tree.hpp"

#include "flucast/features.hpp"
#include "flucast/pipeline.hpp"

#include "flucast/backtest.hpp"
#include "flucast/metrics.hpp"
#include "flucast/quantiles.hpp"

#include "flucast/csv.hpp"
#include "flucast/ingest.hpp"
#include "flucast/model_io.hpp"
#include "flucast/run_config.hpp"
#include "flucast/submission.hpp"
