#pragma once

#include "nigmix/bench.hpp"
#include "nigmix/datagen.hpp"
#include "nigmix/distributions.hpp"
#include "nigmix/engine.hpp"
#include "nigmix/eval.hpp"
#include "nigmix/gmm.hpp"
#include "nigmix/priors.hpp"
#include "nigmix/specfun.hpp"
