#pragma once

// Umbrella header: the whole chess-recognition library.

#include "chesscv/augment.hpp"
#include "chesscv/board_detect.hpp"
#include "chesscv/canny.hpp"
#include "chesscv/chess.hpp"
#include "chesscv/clustering.hpp"
#include "chesscv/crops.hpp"
#include "chesscv/fewshot.hpp"
#include "chesscv/geometry.hpp"
#include "chesscv/hough.hpp"
#include "chesscv/image.hpp"
#include "chesscv/imageio.hpp"
#include "chesscv/labels.hpp"
#include "chesscv/layers.hpp"
#include "chesscv/metrics.hpp"
#include "chesscv/model_io.hpp"
#include "chesscv/network.hpp"
#include "chesscv/optim.hpp"
#include "chesscv/pipeline.hpp"
#include "chesscv/projective_warp.hpp"
#include "chesscv/synth.hpp"
#include "chesscv/tensor.hpp"
#include "chesscv/train.hpp"
