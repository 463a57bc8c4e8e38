#pragma once

#include "xmloc/core/error.hpp"
#include "xmloc/core/geometry.hpp"
#include "xmloc/core/grid.hpp"
#include "xmloc/core/parallel.hpp"
#include "xmloc/core/point_cloud.hpp"
#include "xmloc/image/heatmap.hpp"
#include "xmloc/image/image_io.hpp"
#include "xmloc/image/morphology.hpp"
#include "xmloc/bev/voxelize.hpp"
#include "xmloc/bev/encoder.hpp"
#include "xmloc/map/encoder.hpp"
#include "xmloc/scale/scale_align.hpp"
#include "xmloc/match/fft.hpp"
#include "xmloc/match/rotate.hpp"
#include "xmloc/match/score_volume.hpp"
#include "xmloc/match/pairing.hpp"
#include "xmloc/match/probability.hpp"
#include "xmloc/loss/losses.hpp"
#include "xmloc/pipeline/localizer.hpp"
#include "xmloc/synth/town.hpp"
#include "xmloc/synth/lidar.hpp"
#include "xmloc/synth/scene.hpp"
#include "xmloc/synth/dataset.hpp"
#include "xmloc/io/checksum.hpp"
#include "xmloc/io/config.hpp"
#include "xmloc/eval/metrics.hpp"
#include "xmloc/eval/harness.hpp"
#include "xmloc/eval/bench.hpp"
