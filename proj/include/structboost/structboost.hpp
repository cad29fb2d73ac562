#pragma once

#include "structboost/bench.hpp"
#include "structboost/column_generation.hpp"
#include "structboost/datagen.hpp"
#include "structboost/graphcut.hpp"
#include "structboost/lp.hpp"
#include "structboost/master_1slack.hpp"
#include "structboost/master_mslack.hpp"
#include "structboost/metrics.hpp"
#include "structboost/model_io.hpp"
#include "structboost/parallel.hpp"
#include "structboost/rng.hpp"
#include "structboost/task.hpp"
#include "structboost/tasks_crf.hpp"
#include "structboost/tasks_multiclass.hpp"
#include "structboost/tasks_ranking.hpp"
#include "structboost/types.hpp"
#include "structboost/weak_learners.hpp"
