#include "midorf/predict.hpp"

#include "midorf/bag_model.hpp"
#include "midorf/model_max.hpp"
#include "midorf/model_rel.hpp"
#include "midorf/parallel.hpp"

namespace midorf {

namespace {

FramePrediction predict_plain(const Sequence& seq, const ModelParams& params, DecodeMode mode) {
  const int L = params.levels();
  const auto lattice = build_plain_lattice(seq, params);
  const auto post = chain::forward_backward(lattice, {.per_step_pairwise = false});
  FramePrediction out;
  out.posterior = post.unary;
  if (mode == DecodeMode::Marginal) {
    out.levels = argmax_levels(out.posterior);
  } else {
    const auto path = chain::viterbi(lattice);
    out.levels.resize(path.states.size());
    for (std::size_t t = 0; t < path.states.size(); ++t) out.levels[t] = level_of(path.states[t], L);
  }
  return out;
}

}  // namespace

FramePrediction predict_frames(const Sequence& seq, const ModelParams& params, ModelType type,
                               DecodeMode mode) {
  switch (type) {
    case ModelType::Max: return max_model::predict_frames(seq, params, mode);
    case ModelType::Rel: return rel_model::predict_frames(seq, params, mode);
    case ModelType::Chain: return predict_plain(seq, params, mode);
  }
  throw Error("unknown model type");
}

std::vector<FramePrediction> predict_dataset(const Dataset& ds, const ModelParams& params,
                                             ModelType type, DecodeMode mode, int jobs) {
  if (params.levels() != ds.scale.L || params.dim() != ds.d)
    throw Error("model L/d does not match the dataset");
  return parallel_map(ds.bags.size(), jobs, [&](std::size_t i) {
    return predict_frames(ds.bags[i].sequence, params, type, mode);
  });
}

std::vector<std::vector<int>> frame_truth(const Dataset& ds) {
  std::vector<std::vector<int>> truth;
  truth.reserve(ds.bags.size());
  for (const auto& bag : ds.bags) {
    if (!fully_annotated(bag.observed, bag.sequence.length()))
      throw Error("bag '" + bag.sequence.id + "' lacks full frame labels");
    truth.push_back(annotated_path(bag.observed));
  }
  return truth;
}

metrics::Report evaluate_model(const Dataset& annotated, const ModelParams& params, ModelType type,
                               DecodeMode mode, int jobs) {
  const auto truth = frame_truth(annotated);
  const auto preds = predict_dataset(annotated, params, type, mode, jobs);
  std::vector<std::string> ids;
  std::vector<std::vector<int>> levels;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ids.push_back(annotated.bags[i].sequence.id);
    levels.push_back(preds[i].levels);
  }
  return metrics::evaluate_sequences(ids, levels, truth);
}

}  // namespace midorf
