#pragma once

#include "wic/corpus.hpp"
#include "wic/dualhead.hpp"
#include "wic/encoder.hpp"
#include "wic/error.hpp"
#include "wic/experiment.hpp"
#include "wic/linalg.hpp"
#include "wic/metrics.hpp"
#include "wic/model.hpp"
#include "wic/optimizer.hpp"
#include "wic/precomputed.hpp"
#include "wic/random.hpp"
#include "wic/search.hpp"
#include "wic/spanalign.hpp"
#include "wic/trainer.hpp"
#include "wic/unicode.hpp"
