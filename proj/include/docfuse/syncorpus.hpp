#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docfuse/corpus_io.hpp"
#include "docfuse/eval.hpp"
#include "docfuse/types.hpp"

namespace docfuse {

enum class Gender { Masc, Fem, Neut };

/// Toy bilingual grammar with controlled cross-sentence dependencies. Each
/// document opens with a noun-introducing sentence; later sentences either
/// introduce a new noun or refer to the current one with a pronoun (source
/// side always "it") or a gender-inflected profession word. The source side
/// is gender-free, so sentence-level systems face irreducible ambiguity.
struct GrammarSpec {
    struct Noun {
        std::string src, tgt;
        Gender gender;
        double weight; // sampling weight
    };
    struct Profession {
        std::string src, tgt_base; // feminine form = tgt_base + "in"
    };
    struct WordPair {
        std::string src, tgt;
    };
    /// Adverbial phrase with a fixed word order, so that n-gram models can
    /// reproduce it during decoding.
    struct Phrase {
        std::vector<WordPair> words;
    };

    std::vector<Noun> nouns;
    std::vector<Profession> professions;
    std::vector<WordPair> verbs;
    std::vector<WordPair> adjectives;
    std::vector<Phrase> phrases;

    std::size_t doc_len_lo = 3, doc_len_hi = 8;
    double pronoun_rate = 0.6;     // referring-sentence rate after the opener
    double profession_share = 0.25; // profession share among referring sentences
    double adjective_rate = 0.5;
    std::uint64_t seed = 1;

    /// Gender share of the referring-sentence distribution, computed from
    /// the noun sampling weights.
    double gender_share(Gender g) const;
    double majority_gender_rate() const;

    void validate() const;

    static GrammarSpec defaults();
    /// Same sentence shapes, disjoint content lexicon (for domain tests).
    static GrammarSpec alt_domain();
};

const char* pronoun_token(Gender g); // er / sie / es
const char* article_token(Gender g); // der / die / das

struct GeneratedCorpus {
    std::vector<TextDocument> parallel_src;
    std::vector<TextDocument> parallel_tgt;
    std::vector<TextDocument> mono_tgt;
    std::vector<TextContrastiveExample> pronoun_challenge;
    std::vector<TextContrastiveExample> keyword_challenge;
    std::vector<KeywordExample> keywords; // aligned with keyword_challenge
    std::vector<std::pair<std::string, std::string>> lexicon_oracle; // tgt -> src
    std::vector<std::pair<std::string, std::string>> manifest;      // ordered key/value
};

/// Deterministic generation given spec.seed. Challenge examples are
/// harvested at positions whose immediately preceding sentence reveals the
/// referent (a noun-introducing sentence), with contrastive variants
/// swapping only the pronoun (or profession form).
GeneratedCorpus generate(const GrammarSpec& spec, std::size_t n_parallel_docs,
                         std::size_t n_mono_docs, std::size_t n_challenge);

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& manifest);

} // namespace docfuse
