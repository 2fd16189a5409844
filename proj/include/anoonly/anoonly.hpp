#pragma once

#include "anoonly/checkpoint.hpp"
#include "anoonly/data.hpp"
#include "anoonly/dense.hpp"
#include "anoonly/errors.hpp"
#include "anoonly/experiment.hpp"
#include "anoonly/grad_check.hpp"
#include "anoonly/losses.hpp"
#include "anoonly/matrix.hpp"
#include "anoonly/metrics.hpp"
#include "anoonly/model.hpp"
#include "anoonly/normalization.hpp"
#include "anoonly/optimizer.hpp"
#include "anoonly/training.hpp"
