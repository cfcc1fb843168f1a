#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "docfuse/syncorpus.hpp"

using namespace docfuse;

namespace {

std::map<std::string, std::string> oracle_map(const GeneratedCorpus& c) {
    return {c.lexicon_oracle.begin(), c.lexicon_oracle.end()};
}

std::string dump(const GeneratedCorpus& c) {
    std::ostringstream out;
    for (const auto& d : c.parallel_src)
        for (const auto& s : d.sentences) out << join_tokens(s) << '\n';
    for (const auto& d : c.parallel_tgt)
        for (const auto& s : d.sentences) out << join_tokens(s) << '\n';
    for (const auto& d : c.mono_tgt)
        for (const auto& s : d.sentences) out << join_tokens(s) << '\n';
    for (const auto& ex : c.pronoun_challenge) out << join_tokens(ex.reference) << '\n';
    return out.str();
}

} // namespace

TEST_SUITE("syncorpus") {

TEST_CASE("every pronoun agrees with the antecedent gender") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 11;
    GeneratedCorpus c = generate(spec, 50, 20, 30);

    std::map<std::string, Gender> noun_gender;
    for (const auto& n : spec.nouns) noun_gender[n.tgt] = n.gender;
    std::set<std::string> fem_forms, masc_forms;
    for (const auto& p : spec.professions) {
        masc_forms.insert(p.tgt_base);
        fem_forms.insert(p.tgt_base + "in");
    }

    std::size_t pronouns_checked = 0;
    for (const auto& doc : c.parallel_tgt) {
        Gender referent = Gender::Neut;
        bool have_ref = false;
        for (const auto& sent : doc.sentences) {
            REQUIRE(!sent.empty());
            const std::string& first = sent[0];
            if (first == "er" || first == "sie" || first == "es") {
                REQUIRE(have_ref);
                CHECK(first == pronoun_token(referent));
                ++pronouns_checked;
            } else if (masc_forms.count(first)) {
                CHECK(referent != Gender::Fem); // base form covers masc and neut
            } else if (fem_forms.count(first)) {
                CHECK(referent == Gender::Fem);
            } else {
                // introduction: the noun is the final token
                auto it = noun_gender.find(sent.back());
                REQUIRE(it != noun_gender.end());
                referent = it->second;
                have_ref = true;
            }
        }
    }
    CHECK(pronouns_checked > 0);
}

TEST_CASE("generation is byte-identical for the same seed") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 12;
    GeneratedCorpus a = generate(spec, 20, 10, 10);
    GeneratedCorpus b = generate(spec, 20, 10, 10);
    CHECK(dump(a) == dump(b));

    spec.seed = 13;
    GeneratedCorpus c = generate(spec, 20, 10, 10);
    CHECK(dump(a) != dump(c));
}

TEST_CASE("pronoun marginals match the weighted gender shares") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 14;
    GeneratedCorpus c = generate(spec, 2500, 0, 0);

    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& doc : c.parallel_tgt)
        for (const auto& sent : doc.sentences) {
            const std::string& first = sent[0];
            if (first == "er" || first == "sie" || first == "es") {
                ++counts[first];
                ++total;
            }
        }
    REQUIRE(total > 3000);
    auto share = [&](const char* p) {
        return static_cast<double>(counts[p]) / static_cast<double>(total);
    };
    CHECK(std::abs(share("er") - spec.gender_share(Gender::Masc)) <= 0.02);
    CHECK(std::abs(share("sie") - spec.gender_share(Gender::Fem)) <= 0.02);
    CHECK(std::abs(share("es") - spec.gender_share(Gender::Neut)) <= 0.02);
}

TEST_CASE("documents open with an introduction and stay within length range") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 15;
    GeneratedCorpus c = generate(spec, 100, 0, 0);
    std::set<std::string> pronouns = {"er", "sie", "es"};
    for (const auto& doc : c.parallel_tgt) {
        CHECK(doc.sentences.size() >= spec.doc_len_lo);
        CHECK(doc.sentences.size() <= spec.doc_len_hi);
        CHECK_FALSE(pronouns.count(doc.sentences[0][0]));
    }
}

TEST_CASE("challenge examples have revealing contexts and proper variants") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 16;
    GeneratedCorpus c = generate(spec, 5, 0, 40);
    REQUIRE(c.pronoun_challenge.size() == 40);
    REQUIRE(c.keyword_challenge.size() == 40);
    REQUIRE(c.keywords.size() == 40);

    std::set<std::string> pronouns = {"er", "sie", "es"};
    for (const auto& ex : c.pronoun_challenge) {
        REQUIRE(!ex.context.empty());
        CHECK(ex.source[0] == "it");
        CHECK(pronouns.count(ex.reference[0]));
        CHECK(ex.contrastive.size() == 2);
        for (const auto& alt : ex.contrastive) {
            CHECK(alt != ex.reference);
            CHECK(pronouns.count(alt[0]));
            // only the pronoun differs
            for (std::size_t i = 1; i < alt.size(); ++i) CHECK(alt[i] == ex.reference[i]);
        }
    }
    for (std::size_t i = 0; i < c.keyword_challenge.size(); ++i) {
        const auto& ex = c.keyword_challenge[i];
        const auto& kw = c.keywords[i];
        REQUIRE(kw.correct_terms.size() == 1);
        REQUIRE(kw.incorrect_terms.size() == 1);
        CHECK(ex.reference[0] == kw.correct_terms[0]);
        CHECK(ex.contrastive[0][0] == kw.incorrect_terms[0]);
    }
}

TEST_CASE("lexicon oracle inverts every generated content token") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 17;
    GeneratedCorpus c = generate(spec, 40, 10, 0);
    auto oracle = oracle_map(c);
    for (std::size_t d = 0; d < c.parallel_tgt.size(); ++d) {
        for (std::size_t s = 0; s < c.parallel_tgt[d].sentences.size(); ++s) {
            const auto& tgt = c.parallel_tgt[d].sentences[s];
            const auto& src = c.parallel_src[d].sentences[s];
            REQUIRE(tgt.size() == src.size()); // toy grammar aligns 1:1
            for (std::size_t i = 0; i < tgt.size(); ++i) {
                auto it = oracle.find(tgt[i]);
                REQUIRE(it != oracle.end());
                CHECK(it->second == src[i]);
            }
        }
    }
}

TEST_CASE("manifest carries the oracle bounds") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.seed = 18;
    GeneratedCorpus c = generate(spec, 3, 1, 0);
    std::map<std::string, std::string> m(c.manifest.begin(), c.manifest.end());
    CHECK(m.count("pronoun_accuracy_sentence_optimum"));
    CHECK(std::stod(m["pronoun_accuracy_sentence_optimum"]) ==
          doctest::Approx(spec.majority_gender_rate()));
    CHECK(std::stod(m["pronoun_accuracy_context_oracle"]) == doctest::Approx(1.0));
}

TEST_CASE("alternate domain shares no content words with the default") {
    GrammarSpec a = GrammarSpec::defaults();
    GrammarSpec b = GrammarSpec::alt_domain();
    std::set<std::string> a_words, b_words;
    for (const auto& n : a.nouns) a_words.insert(n.tgt);
    for (const auto& v : a.verbs) a_words.insert(v.tgt);
    for (const auto& w : a.fillers) a_words.insert(w.tgt);
    for (const auto& n : b.nouns) b_words.insert(n.tgt);
    for (const auto& v : b.verbs) b_words.insert(v.tgt);
    for (const auto& w : b.fillers) b_words.insert(w.tgt);
    for (const auto& w : b_words) CHECK_FALSE(a_words.count(w));
}

TEST_CASE("invalid specs are rejected") {
    GrammarSpec spec = GrammarSpec::defaults();
    spec.nouns.clear();
    CHECK_THROWS_AS(generate(spec, 1, 0, 0), Error);

    GrammarSpec bad = GrammarSpec::defaults();
    bad.doc_len_lo = 9;
    bad.doc_len_hi = 3;
    CHECK_THROWS_AS(generate(bad, 1, 0, 0), Error);
}

} // TEST_SUITE
