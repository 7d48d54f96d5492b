#pragma once

#include <vector>

#include "midorf/core.hpp"
#include "midorf/metrics.hpp"

namespace midorf {

/// Frame decoding for any model type. CHAIN models decode the plain L-state
/// chain; MAX and REL mix over candidate bag labels.
FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, ModelType type,
                               DecodeMode mode);

std::vector<FramePrediction> predict_dataset(const Dataset& ds, const ModelParams& params,
                                             ModelType type, DecodeMode mode, int jobs = 1);

/// Ground-truth frame labels of a fully annotated dataset. Throws Error
/// naming the first bag with a missing annotation.
std::vector<std::vector<int>> frame_truth(const Dataset& ds);

/// Frame-level metrics of a model on a fully annotated dataset.
metrics::Report evaluate_model(const Dataset& annotated, const ModelParams& params, ModelType type,
                               DecodeMode mode, int jobs = 1);

}  // namespace midorf
