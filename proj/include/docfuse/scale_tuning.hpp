#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docfuse/decoder.hpp"
#include "docfuse/eval.hpp"
#include "docfuse/fusion.hpp"
#include "docfuse/scale_table.hpp"
#include "docfuse/translation_model.hpp"
#include "docfuse/types.hpp"

namespace docfuse {

/// One tuning example (F, E, E_{-k}^{-1}).
struct TuneExample {
    Sentence source;
    Sentence reference;
    std::vector<Sentence> context;
};

std::vector<TuneExample> tune_examples_from_docs(const std::vector<ParallelDocument>& docs,
                                                 int k);

enum class TuneObjective { Bleu, CrossEntropy };

struct GridPointScore {
    FusionScales scales;
    double score; // BLEU (higher better) or CE (lower better)
};

struct GridSearchResult {
    FusionScales best;
    std::vector<GridPointScore> report; // every grid point, grid order
};

/// BLEU objective decodes the validation set once per grid point; CE sums
/// fused negative log-likelihood of the references without decoding.
/// Ties pick the lexicographically smallest triple.
GridSearchResult grid_search_scales(const std::vector<TuneExample>& valid,
                                    const ScaleGrid& grid, TuneObjective objective,
                                    const FusionModels& models, const DecodeConfig& config);

/// Cross-entropy loss of Eq.-3-style subword-dependent fusion and its
/// analytic gradient. Models are frozen; only the table is variable.
struct LossAndGrad {
    double loss = 0.0;
    std::size_t tokens = 0;
    SubwordScaleTable grad;
};

LossAndGrad scale_loss_and_grad(const std::vector<TuneExample>& batch,
                                const SubwordScaleTable& table, const FusionModels& models,
                                int context_k);

struct LearnOptions {
    double init_std = 0.01;
    double lr = 0.1;
    int epochs = 20;
    std::uint64_t seed = 1;
    /// lambda0(e) pinned to 1 and lambda1(e) == lambda2(e) (one learned
    /// parameter per subword).
    bool restricted = true;
    /// Single shared triple for all subwords (subword-agnostic).
    bool tied = false;
    int context_k = 2;
};

struct LearnResult {
    SubwordScaleTable table;
    std::vector<double> loss_trace; // mean CE per token, per epoch
};

/// Plain SGD with per-epoch seeded shuffling; deterministic given the seed.
/// Aborts when the loss exceeds 10x its initial value.
LearnResult learn_subword_scales(const std::vector<TuneExample>& train,
                                 const FusionModels& models, const LearnOptions& opts);

/// Tuning data via back-translation: synthetic sources, authentic targets
/// and contexts from the monolingual documents.
std::vector<TuneExample> make_tuning_data(const std::vector<Document>& mono_docs,
                                          const TranslationModel& reverse_tm, int k,
                                          int beam_size = 4);

} // namespace docfuse
