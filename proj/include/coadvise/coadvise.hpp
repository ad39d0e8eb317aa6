#pragma once

#include "coadvise/dataset.hpp"
#include "coadvise/estimators.hpp"
#include "coadvise/glm.hpp"
#include "coadvise/imputer.hpp"
#include "coadvise/lasso.hpp"
#include "coadvise/pipeline.hpp"
#include "coadvise/rng.hpp"
#include "coadvise/selector.hpp"
#include "coadvise/simlab.hpp"
#include "coadvise/stats.hpp"
