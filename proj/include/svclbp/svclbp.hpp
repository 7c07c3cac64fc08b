#pragma once

#include "svclbp/types.hpp"
#include "svclbp/model.hpp"
#include "svclbp/lbp_skip.hpp"
#include "svclbp/lbp_noskip.hpp"
#include "svclbp/prediction.hpp"
#include "svclbp/playback_sim.hpp"
#include "svclbp/online_engine.hpp"
#include "svclbp/baselines.hpp"
#include "svclbp/metrics.hpp"
#include "svclbp/validator.hpp"
#include "svclbp/oracle.hpp"
