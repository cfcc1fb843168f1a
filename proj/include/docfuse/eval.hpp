#pragma once

#include <functional>
#include <string>
#include <vector>

#include "docfuse/types.hpp"
#include "docfuse/vocab.hpp"

namespace docfuse {

/// Corpus-level BLEU with up to 4-gram precisions pooled over all lines and
/// the standard brevity penalty. Unsmoothed by default: any zero n-gram
/// precision gives BLEU = 0. Inputs are this pipeline's own tokens; no
/// re-tokenization. Returned score is in [0, 1].
double corpus_bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                   double smooth_eps = 0.0);

struct F1Report {
    struct Category {
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
        std::size_t hyp_count = 0;
        std::size_t ref_count = 0;
        std::size_t matched = 0;
    };
    std::vector<Category> per_category;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool no_targets = false; // neither side contained any category token
};

/// Pooled micro F1 over category token counts: per line and category,
/// matched = min(hyp count, ref count).
F1Report targeted_f1(const std::vector<std::vector<std::string>>& hyps,
                     const std::vector<std::vector<std::string>>& refs,
                     const std::vector<std::vector<std::string>>& categories);

struct ContrastiveExample {
    Sentence source;
    std::vector<Sentence> context;
    Sentence reference;
    std::vector<Sentence> contrastive;
};

using SequenceScorer = std::function<double(const Sentence& sentence,
                                            const std::vector<Sentence>& context,
                                            const Sentence& source)>;

/// Fraction of examples whose reference scores strictly above every
/// contrastive variant; ties count as incorrect.
double contrastive_accuracy(const SequenceScorer& scorer,
                            const std::vector<ContrastiveExample>& examples);

struct KeywordExample {
    std::string id;
    std::vector<std::string> correct_terms;   // nonempty
    std::vector<std::string> incorrect_terms; // disjoint from correct
};

/// Hypothesis counts as correct iff it contains at least one correct term
/// and no incorrect term; whole-token, case-insensitive matching.
double keyword_accuracy(const std::vector<std::vector<std::string>>& hyps,
                        const std::vector<KeywordExample>& examples);

// --- challenge-set and keyword file formats ---

struct TextContrastiveExample {
    std::vector<std::string> source;
    std::vector<std::vector<std::string>> context;
    std::vector<std::string> reference;
    std::vector<std::vector<std::string>> contrastive;
};

/// Blocks of "SRC:", "CTX:" (repeatable), "REF:", "ALT:" (repeatable)
/// lines, blocks separated by blank lines.
std::vector<TextContrastiveExample> read_challenge_set(const std::string& path);
void write_challenge_set(const std::string& path,
                         const std::vector<TextContrastiveExample>& examples);

std::vector<ContrastiveExample> encode_challenge_set(
    const std::vector<TextContrastiveExample>& examples, const Vocabulary& vocab);

/// Tab-separated "id<TAB>correct,comma,list<TAB>incorrect,comma,list".
std::vector<KeywordExample> read_keyword_file(const std::string& path);
void write_keyword_file(const std::string& path, const std::vector<KeywordExample>& examples);

// --- comparison report (methods x metrics) ---

/// Fixed-order tab-separated table "system BLEU pronF1 contrAcc kwAcc";
/// missing cells print as "n.a.". Rows keep insertion order; updating an
/// existing system merges its columns.
class ReportTable {
  public:
    void set(const std::string& system, const std::string& metric, double value);
    void save(const std::string& path) const;
    static ReportTable load(const std::string& path);
    std::string to_text() const;

  private:
    struct Row {
        std::string system;
        double values[4];
        bool present[4] = {false, false, false, false};
    };
    std::vector<Row> rows_;
    Row& row(const std::string& system);
};

} // namespace docfuse
