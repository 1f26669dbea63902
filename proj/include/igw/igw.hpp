#pragma once

#include "igw/analytics.hpp"
#include "igw/bigfloat.hpp"
#include "igw/experiments.hpp"
#include "igw/newick.hpp"
#include "igw/offspring.hpp"
#include "igw/pruning.hpp"
#include "igw/rng.hpp"
#include "igw/sampler.hpp"
#include "igw/special.hpp"
#include "igw/stats.hpp"
#include "igw/tree.hpp"
