#pragma once

// Everything at once.

#include "rvs/common.hpp"
#include "rvs/data/filters.hpp"
#include "rvs/data/io.hpp"
#include "rvs/data/outcome.hpp"
#include "rvs/data/trajectory.hpp"
#include "rvs/env/collect.hpp"
#include "rvs/env/registry.hpp"
#include "rvs/eval/analyses.hpp"
#include "rvs/eval/evaluate.hpp"
#include "rvs/eval/rollout.hpp"
#include "rvs/nn/adam.hpp"
#include "rvs/nn/gradient_check.hpp"
#include "rvs/nn/loss.hpp"
#include "rvs/nn/mlp.hpp"
#include "rvs/nn/sample.hpp"
#include "rvs/train/artifact.hpp"
#include "rvs/train/config.hpp"
#include "rvs/train/sweep.hpp"
#include "rvs/train/trainer.hpp"
#include "rvs/util/parallel.hpp"
