#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "docfuse/logdist.hpp"
#include "docfuse/ngram.hpp"
#include "docfuse/types.hpp"
#include "docfuse/vocab.hpp"

namespace docfuse {

/// IBM-1 word translation table t(e|f). No NULL source word: spontaneous
/// target tokens are absorbed by the n-gram mixture of the TM.
class Lexicon {
  public:
    double prob(SubwordId source, SubwordId target) const;
    bool has_source(SubwordId source) const;

    /// Per-source rows, each normalized to sum to one.
    std::unordered_map<SubwordId, std::unordered_map<SubwordId, double>> table;

    /// Entries below the floor are dropped and rows renormalized at save
    /// time; probabilities are written with 9 decimal places.
    void save(const std::string& path, const Vocabulary& vocab,
              double floor = 1e-9) const;
    static Lexicon load(const std::string& path, const Vocabulary& vocab);
};

struct Ibm1Options {
    int iterations = 5;
};

struct Ibm1Result {
    Lexicon lexicon;
    std::vector<double> log_likelihood; // per iteration, non-decreasing
};

/// Standard IBM-1 EM over sentence pairs: uniform initialization over
/// co-occurring targets, posterior E-step, renormalizing M-step.
Ibm1Result train_ibm1(const std::vector<SentencePair>& pairs, const Ibm1Options& opts);

/// Sentence-level translation scorer
///   p(e | history, F) = mu * p_lex(e|F) + (1-mu) * p_ngram(e | history),
/// renormalized. The n-gram component doubles as the model's exact internal
/// LM. When trained on document-level data (target_ngram.context_k > 0) the
/// model is context-aware and the caller passes SEP-joined histories.
struct TranslationModel {
    Lexicon lexicon;
    NGramLM target_ngram;
    double mix = 0.5; // mu
    std::shared_ptr<const Vocabulary> vocab;

    int context_k() const { return target_ngram.context_k; }

    /// Step distribution over the target vocabulary. history carries BOS
    /// (and SEP-joined context for document-level models) plus the
    /// generated prefix. EOS mass comes only from the n-gram component.
    LogDist step_dist(const Sentence& history, const Sentence& source) const;

    /// The exact internal LM of this model, by construction.
    const NGramLM& exact_internal_lm() const { return target_ngram; }
};

LogDist tm_step_dist(const TranslationModel& tm, const Sentence& history,
                     const Sentence& source);

/// The paper-style ILM estimate: a separate sentence-level LM trained on
/// the target side of the translation training data.
NGramLM estimate_ilm_separate(const std::vector<Sentence>& target_side,
                              std::shared_ptr<const Vocabulary> vocab,
                              int order, double discount = 0.75);

} // namespace docfuse
