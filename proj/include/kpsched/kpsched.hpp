#pragma once

#include "kpsched/analysis.hpp"
#include "kpsched/error.hpp"
#include "kpsched/graph.hpp"
#include "kpsched/io.hpp"
#include "kpsched/rational.hpp"
#include "kpsched/scheduler.hpp"
#include "kpsched/simulator.hpp"
#include "kpsched/transform.hpp"
#include "kpsched/words.hpp"
