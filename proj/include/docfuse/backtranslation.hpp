#pragma once

#include <string>
#include <vector>

#include "docfuse/decoder.hpp"
#include "docfuse/types.hpp"

namespace docfuse {

/// Sentence-level back-translation of monolingual target documents with a
/// reverse (target->source) model. Document structure is preserved; the
/// source side is synthetic, the target side is the authentic input.
std::vector<ParallelDocument> back_translate_docs(const TranslationModel& reverse_tm,
                                                  const std::vector<Document>& mono_docs,
                                                  int beam_size = 4);

/// Shuffles sentence pairs and regroups them into documents with lengths
/// drawn uniformly from [lo, hi] (the final document may be shorter).
std::vector<ParallelDocument> make_pseudo_documents(const std::vector<SentencePair>& pairs,
                                                    std::size_t lo, std::size_t hi,
                                                    std::uint64_t seed);

/// Training stream with provenance. The smaller part is oversampled by
/// whole-document repetition so that sentence counts roughly match.
struct CorpusBundle {
    std::vector<ParallelDocument> authentic; // after oversampling
    std::vector<ParallelDocument> synthetic; // after oversampling
    std::size_t authentic_repeat = 1;
    std::size_t synthetic_repeat = 1;

    /// authentic block first, then synthetic; shuffling is the trainer's job
    std::vector<ParallelDocument> combined() const;
    std::size_t authentic_sentences() const;
    std::size_t synthetic_sentences() const;

    /// Manifest lines: part, path, repeat factor.
    void save_manifest(const std::string& path, const std::string& authentic_path,
                       const std::string& synthetic_path) const;
};

CorpusBundle combine_balanced(const std::vector<ParallelDocument>& authentic,
                              const std::vector<ParallelDocument>& synthetic);

} // namespace docfuse
