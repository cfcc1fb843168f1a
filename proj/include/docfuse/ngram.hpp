#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "docfuse/logdist.hpp"
#include "docfuse/types.hpp"
#include "docfuse/vocab.hpp"

namespace docfuse {

/// Count-based backoff n-gram model with interpolated absolute discounting:
///
///   p(w|h) = max(c(h,w) - D, 0) / c(h) + (D * distinct(h) / c(h)) * p(w|h')
///
/// recursing to a unigram level interpolated with the uniform 1/|V|. The
/// interpolated values are stored in standard backoff form, so every
/// conditional distribution sums to one exactly and every probability is
/// strictly positive.
struct NGramLM {
    struct ContextEntry {
        double bow = 1.0;
        // sorted by token id; probability includes the interpolated mass
        std::vector<std::pair<SubwordId, double>> probs;

        const double* find(SubwordId id) const;
    };

    int order = 1;
    double discount = 0.75;
    int context_k = 0; // sentences of cross-sentence context used in training
    std::shared_ptr<const Vocabulary> vocab;

    std::vector<double> unigram; // dense, size |V|
    // levels[l] = contexts of length l (1 <= l <= order-1)
    std::vector<std::unordered_map<std::string, ContextEntry>> levels;

    std::size_t vocab_size() const { return unigram.size(); }

    /// p(token | history); history truncated to the last order-1 tokens.
    double prob(const Sentence& history, SubwordId token) const;

    /// Full conditional distribution over V, natural-log space.
    LogDist cond_logdist(const Sentence& history) const;

    /// Sum of conditional log-probabilities of the sentence tokens given
    /// SEP-joined context. Context tokens are conditioned on, never scored;
    /// EOS is not scored here.
    double score_sequence(const Sentence& sentence, const std::vector<Sentence>& context) const;

    /// As score_sequence, plus the EOS event at the end of the sentence.
    double score_sequence_with_eos(const Sentence& sentence,
                                   const std::vector<Sentence>& context) const;
};

struct TrainOptions {
    int order = 4;
    double discount = 0.75;
    /// If >= 0, train on document context: each sentence becomes one
    /// training sequence [ctx_1 SEP ctx_2 SEP sentence] with up to k
    /// previous sentences. Negative means plain per-sentence sequences.
    int context_k = 0;
    /// Wrap every training sequence with BOS (history only) and EOS
    /// (predicted event). Disable to count a raw token stream as-is.
    bool sentence_markers = true;
};

NGramLM train_ngram(const std::vector<Document>& corpus,
                    std::shared_ptr<const Vocabulary> vocab, const TrainOptions& opts);

/// Trains directly on explicit token sequences (no SEP joining).
NGramLM train_ngram_sequences(const std::vector<Sentence>& sequences,
                              std::shared_ptr<const Vocabulary> vocab,
                              const TrainOptions& opts);

/// History prefix used for document-context queries:
/// [BOS, ctx_1..., SEP, ctx_2..., SEP]. Empty context gives [BOS].
Sentence lm_history(const std::vector<Sentence>& context);

/// exp(-(sum log p)/T) with T counting every sentence token plus EOS.
/// Context windows of lm.context_k sentences are applied within documents.
double perplexity(const NGramLM& lm, const std::vector<Document>& corpus);

void save_arpa(const NGramLM& lm, const std::string& path);
NGramLM load_arpa(const std::string& path);

} // namespace docfuse
