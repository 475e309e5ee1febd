#pragma once

#include "crowdgraph/assignment.hpp"
#include "crowdgraph/cluster_partition.hpp"
#include "crowdgraph/errors.hpp"
#include "crowdgraph/estimators.hpp"
#include "crowdgraph/experiments.hpp"
#include "crowdgraph/graphon.hpp"
#include "crowdgraph/model.hpp"
#include "crowdgraph/rational.hpp"
#include "crowdgraph/rng.hpp"
#include "crowdgraph/theory.hpp"
