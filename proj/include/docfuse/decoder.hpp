#pragma once

#include <optional>
#include <vector>

#include "docfuse/fusion.hpp"
#include "docfuse/ngram.hpp"
#include "docfuse/scale_table.hpp"
#include "docfuse/translation_model.hpp"
#include "docfuse/types.hpp"

namespace docfuse {

enum class FusionMode { None, Static, ContextDelta, OnTheFly, Learned };

FusionMode fusion_mode_from_string(const std::string& name);
std::string to_string(FusionMode mode);

struct DecodeConfig {
    int beam_size = 12;
    double length_norm_alpha = 1.0;
    /// max generated tokens (incl. EOS) = max_len_factor * |F| + max_len_bias
    int max_len_factor = 3;
    int max_len_bias = 5;
    FusionMode fusion = FusionMode::None;
    FusionScales scales;          // Static / ContextDelta
    ScaleGrid grid = restricted_grid(); // OnTheFly
    SubwordScaleTable table;      // Learned
    int context_k = 2;            // target-side context sentences
};

/// The three scorers of the fused combination. lm/ilm may be null when the
/// fusion mode does not need them.
struct FusionModels {
    const TranslationModel* tm = nullptr;
    const NGramLM* lm = nullptr;
    const NGramLM* ilm = nullptr;
};

struct Hypothesis {
    Sentence tokens; // generated tokens, EOS included once finished
    double score = 0.0;
    bool finished = false;

    std::size_t length() const { return tokens.size(); }
};

struct DecodeResult {
    Sentence tokens; // without EOS
    double score = 0.0;           // accumulated log score
    double normalized_score = 0.0; // score / length^alpha, length incl. EOS
    bool reached_max_len = false; // no finished hypothesis within the limit
};

/// Per-step fused distribution for an explicit decoding state; shared by
/// the beam search, CE-based tuning and the fused contrastive scorer.
LogDist fused_step_dist(const FusionModels& models, const DecodeConfig& config,
                        const Sentence& source, const std::vector<Sentence>& context,
                        const Sentence& prefix);

/// Beam search over fused step distributions. The LM sees the SEP-joined
/// context plus the generated prefix, the ILM only the prefix, the TM the
/// prefix and the source sentence (plus context when it is context-aware).
/// Ties in pruning are broken by (score, then lexicographic tokens).
DecodeResult beam_decode(const FusionModels& models, const DecodeConfig& config,
                         const Sentence& source, const std::vector<Sentence>& context);

/// `last sentence' strategy: sentence t is decoded with the 1-best outputs
/// of sentences t-k..t-1 as target-side context.
Document decode_document(const FusionModels& models, const DecodeConfig& config,
                         const Document& source_doc);

std::vector<Document> decode_corpus(const FusionModels& models, const DecodeConfig& config,
                                    const std::vector<Document>& source_docs);

/// Replaces pronoun tokens with the document-LM-preferred alternatives.
/// All combinations are scored unless their count exceeds cap, in which
/// case positions are decided independently left to right. Ties keep the
/// original hypothesis tokens.
Sentence rerank_pronouns(const Sentence& hyp, const NGramLM& doc_lm,
                         const std::vector<Sentence>& context,
                         const std::vector<SubwordId>& pronoun_set, std::size_t cap = 81);

} // namespace docfuse
