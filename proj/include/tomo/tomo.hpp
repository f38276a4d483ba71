#pragma once

#include "cluster.hpp"
#include "csv.hpp"
#include "eval.hpp"
#include "experiment.hpp"
#include "export.hpp"
#include "maxmin.hpp"
#include "metric.hpp"
#include "partition.hpp"
#include "pieces.hpp"
#include "rng.hpp"
#include "scenarios.hpp"
#include "swarm.hpp"
#include "topology.hpp"
