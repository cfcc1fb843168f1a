#include <doctest.h>

#include <algorithm>
#include <memory>
#include <set>

#include "docfuse/backtranslation.hpp"
#include "docfuse/rng.hpp"

using namespace docfuse;

namespace {

std::shared_ptr<Vocabulary> make_vocab(const std::vector<std::string>& tokens) {
    auto v = std::make_shared<Vocabulary>();
    for (const auto& t : tokens) v->add(t);
    return v;
}

std::vector<SentencePair> random_pairs(Rng& rng, std::size_t n) {
    std::vector<SentencePair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        SentencePair p;
        int len = static_cast<int>(rng.uniform_int(1, 4));
        for (int j = 0; j < len; ++j) {
            p.source.push_back(static_cast<SubwordId>(rng.uniform_int(4, 9)));
            p.target.push_back(static_cast<SubwordId>(rng.uniform_int(10, 15)));
        }
        pairs.push_back(p);
    }
    return pairs;
}

std::multiset<std::pair<Sentence, Sentence>> pair_multiset(
    const std::vector<ParallelDocument>& docs) {
    std::multiset<std::pair<Sentence, Sentence>> out;
    for (const auto& d : docs)
        for (std::size_t i = 0; i < d.source.size(); ++i)
            out.insert({d.source[i], d.target[i]});
    return out;
}

} // namespace

TEST_SUITE("backtranslation") {

TEST_CASE("back-translation preserves structure and the target side") {
    auto vocab = make_vocab({"f1", "f2", "e1", "e2"});
    SubwordId f1 = vocab->lookup("f1"), f2 = vocab->lookup("f2");
    SubwordId e1 = vocab->lookup("e1"), e2 = vocab->lookup("e2");

    // reverse model translates target -> source
    std::vector<SentencePair> reverse_pairs;
    for (int i = 0; i < 10; ++i) {
        reverse_pairs.push_back({{e1}, {f1}});
        reverse_pairs.push_back({{e2}, {f2}});
    }
    TranslationModel reverse_tm;
    reverse_tm.vocab = vocab;
    reverse_tm.mix = 0.5;
    reverse_tm.lexicon = train_ibm1(reverse_pairs, {5}).lexicon;
    TrainOptions opts;
    opts.order = 2;
    std::vector<Sentence> tgt;
    for (const auto& p : reverse_pairs) tgt.push_back(p.target);
    reverse_tm.target_ngram = train_ngram_sequences(tgt, vocab, opts);

    std::vector<Document> mono(2);
    mono[0].id = "m0";
    mono[0].sentences = {{e1}, {e2}, {e1, e1}};
    mono[1].id = "m1";
    mono[1].sentences = {{e2}};

    auto synthetic = back_translate_docs(reverse_tm, mono, 4);
    REQUIRE(synthetic.size() == 2);
    CHECK(synthetic[0].source.size() == 3);
    CHECK(synthetic[1].source.size() == 1);
    CHECK(synthetic[0].target == mono[0].sentences); // authentic side verbatim
    CHECK(synthetic[1].target == mono[1].sentences);
    // well-trained reverse model inverts the lexicon
    CHECK(synthetic[0].source[0] == Sentence{f1});
    CHECK(synthetic[1].source[0] == Sentence{f2});
}

TEST_CASE("pseudo-documents preserve the pair multiset") {
    Rng rng(61);
    auto pairs = random_pairs(rng, 57);
    auto docs = make_pseudo_documents(pairs, 2, 10, 7);

    std::multiset<std::pair<Sentence, Sentence>> orig;
    for (const auto& p : pairs) orig.insert({p.source, p.target});
    CHECK(pair_multiset(docs) == orig);

    // all lengths within range except possibly the final remainder
    for (std::size_t i = 0; i + 1 < docs.size(); ++i) {
        CHECK(docs[i].target.size() >= 2);
        CHECK(docs[i].target.size() <= 10);
    }
    CHECK(docs.back().target.size() <= 10);
}

TEST_CASE("pseudo-documents are deterministic given the seed") {
    Rng rng(62);
    auto pairs = random_pairs(rng, 30);
    auto a = make_pseudo_documents(pairs, 2, 6, 99);
    auto b = make_pseudo_documents(pairs, 2, 6, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].source == b[i].source);
        CHECK(a[i].target == b[i].target);
    }
    auto c = make_pseudo_documents(pairs, 2, 6, 100);
    bool same = a.size() == c.size();
    if (same)
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].source != c[i].source) same = false;
    CHECK_FALSE(same);
}

TEST_CASE("make_pseudo_documents validates the length range") {
    CHECK_THROWS_AS(make_pseudo_documents({}, 0, 5, 1), Error);
    CHECK_THROWS_AS(make_pseudo_documents({}, 6, 5, 1), Error);
}

TEST_CASE("combine_balanced: exact multiple") {
    // authentic 100 sentences (10 docs x 10), synthetic 1000 => repeat 10x
    std::vector<ParallelDocument> authentic, synthetic;
    for (int d = 0; d < 10; ++d) {
        ParallelDocument pd;
        pd.id = "a" + std::to_string(d);
        for (int s = 0; s < 10; ++s) {
            pd.source.push_back({4});
            pd.target.push_back({5});
        }
        authentic.push_back(pd);
    }
    for (int d = 0; d < 100; ++d) {
        ParallelDocument pd;
        pd.id = "s" + std::to_string(d);
        for (int s = 0; s < 10; ++s) {
            pd.source.push_back({6});
            pd.target.push_back({7});
        }
        synthetic.push_back(pd);
    }
    CorpusBundle bundle = combine_balanced(authentic, synthetic);
    CHECK(bundle.authentic_repeat == 10);
    CHECK(bundle.authentic_sentences() == 1000);
    CHECK(bundle.synthetic_sentences() == 1000);
    CHECK(bundle.combined().size() == 200);
}

TEST_CASE("combine_balanced: equal sizes need no oversampling") {
    ParallelDocument pd;
    pd.id = "x";
    pd.source = {{4}, {4}};
    pd.target = {{5}, {5}};
    CorpusBundle bundle = combine_balanced({pd}, {pd});
    CHECK(bundle.authentic_repeat == 1);
    CHECK(bundle.synthetic_repeat == 1);
    CHECK(bundle.authentic_sentences() == bundle.synthetic_sentences());
}

TEST_CASE("combine_balanced: truncation at document granularity") {
    // authentic 300 (30 docs x 10), synthetic 1000: repeat 4x = 1200, then
    // drop whole docs while staying >= 1000
    std::vector<ParallelDocument> authentic, synthetic;
    for (int d = 0; d < 30; ++d) {
        ParallelDocument pd;
        pd.id = "a" + std::to_string(d);
        for (int s = 0; s < 10; ++s) {
            pd.source.push_back({4});
            pd.target.push_back({5});
        }
        authentic.push_back(pd);
    }
    for (int d = 0; d < 125; ++d) {
        ParallelDocument pd;
        pd.id = "s" + std::to_string(d);
        for (int s = 0; s < 8; ++s) {
            pd.source.push_back({6});
            pd.target.push_back({7});
        }
        synthetic.push_back(pd);
    }
    CorpusBundle bundle = combine_balanced(authentic, synthetic);
    CHECK(bundle.authentic_repeat == 4);
    CHECK(bundle.authentic_sentences() >= 1000);
    CHECK(bundle.authentic_sentences() < 1000 + 10); // less than one doc over
    CHECK(bundle.synthetic_sentences() == 1000);

    CHECK_THROWS_AS(combine_balanced({}, synthetic), Error);
}

} // TEST_SUITE
