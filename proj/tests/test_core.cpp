#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "docfuse/bpe.hpp"
#include "docfuse/corpus_io.hpp"
#include "docfuse/logdist.hpp"
#include "docfuse/rng.hpp"
#include "docfuse/vocab.hpp"

using namespace docfuse;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
} // namespace

TEST_SUITE("core") {

TEST_CASE("build_vocab orders by frequency then lexicographic") {
    Vocabulary v = build_vocab({{"a", "b", "a"}}, 10);
    CHECK(v.size() == 6);
    CHECK(v.lookup("a") == 4); // freq 2 beats freq 1
    CHECK(v.lookup("b") == 5);
    CHECK(v.decode(Vocabulary::kBos) == std::string("<s>"));
    CHECK(v.decode(Vocabulary::kUnk) == std::string("<unk>"));
}

TEST_CASE("build_vocab tie-break and cutoff") {
    Vocabulary v = build_vocab({{"x", "y"}, {"y", "x"}}, 5);
    CHECK(v.size() == 5);
    CHECK(v.contains("x"));
    CHECK_FALSE(v.contains("y"));
}

TEST_CASE("build_vocab rejects empty corpus") {
    CHECK_THROWS_WITH_AS(build_vocab({}, 10), "empty corpus", Error);
    CHECK_THROWS_AS(build_vocab({{}, {}}, 10), Error);
}

TEST_CASE("encode maps OOV to UNK and round-trips known tokens") {
    Vocabulary v = build_vocab({{"a", "b", "a"}}, 10);
    Sentence s = v.encode({"a", "z"});
    CHECK(s == Sentence{v.lookup("a"), Vocabulary::kUnk});
    for (std::size_t id = 0; id < v.size(); ++id)
        CHECK(v.lookup(v.decode(static_cast<SubwordId>(id))) == static_cast<SubwordId>(id));
}

TEST_CASE("vocabulary file round-trip") {
    Vocabulary v = build_vocab({{"a", "b", "c"}}, 10);
    std::string path = temp_path("docfuse_vocab_test.txt");
    v.save(path);
    Vocabulary w = Vocabulary::load(path);
    CHECK(w.size() == v.size());
    for (std::size_t id = 0; id < v.size(); ++id)
        CHECK(w.decode(static_cast<SubwordId>(id)) == v.decode(static_cast<SubwordId>(id)));
    std::remove(path.c_str());
}

TEST_CASE("context_window truncates at the document start") {
    Document doc;
    doc.id = "d";
    for (int i = 0; i < 6; ++i) doc.sentences.push_back({static_cast<SubwordId>(i)});

    CHECK(context_window(doc, 0, 2).empty());
    auto w1 = context_window(doc, 1, 2);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0] == doc.sentences[0]);
    auto w5 = context_window(doc, 5, 2);
    REQUIRE(w5.size() == 2);
    CHECK(w5[0] == doc.sentences[3]);
    CHECK(w5[1] == doc.sentences[4]);
    CHECK_THROWS_AS(context_window(doc, 6, 2), Error);
}

TEST_CASE("context_window never exceeds k") {
    Rng rng(7);
    Document doc;
    for (int i = 0; i < 20; ++i) doc.sentences.push_back({static_cast<SubwordId>(i)});
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t idx = static_cast<std::size_t>(rng.uniform_int(0, 19));
        std::size_t k = static_cast<std::size_t>(rng.uniform_int(0, 5));
        auto w = context_window(doc, idx, k);
        CHECK(w.size() == std::min(k, idx));
    }
}

TEST_CASE("corpus file round-trip with document boundaries") {
    std::vector<TextDocument> docs(2);
    docs[0].sentences = {{"a", "b"}, {"c"}};
    docs[1].sentences = {{"d", "e", "f"}};
    std::string path = temp_path("docfuse_corpus_test.txt");
    write_corpus(path, docs);
    auto loaded = read_corpus(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].sentences == docs[0].sentences);
    CHECK(loaded[1].sentences == docs[1].sentences);
    std::remove(path.c_str());
}

TEST_CASE("bpe_learn finds the most frequent pair first") {
    // counting by hand over "aaab aaab": (a,a) occurs 4 times, (a,b</w>) 2
    MergeTable t = bpe_learn({"aaab", "aaab"}, 1);
    REQUIRE(t.size() == 1);
    CHECK(t.merges[0] == std::pair<std::string, std::string>{"a", "a"});
}

TEST_CASE("bpe with zero merges keeps character symbols") {
    MergeTable t = bpe_learn({"abc"}, 0);
    CHECK(t.size() == 0);
    auto segs = bpe_apply("abc", t);
    CHECK(segs == std::vector<std::string>{"a", "b", "c</w>"});
}

TEST_CASE("bpe_apply golden segmentation") {
    MergeTable t;
    t.merges = {{"a", "a"}};
    CHECK(bpe_apply("aaab", t) == std::vector<std::string>{"aa", "a", "b</w>"});
}

TEST_CASE("bpe unknown characters pass through, empty word is empty") {
    MergeTable t = bpe_learn({"aaab", "aaab"}, 2);
    auto segs = bpe_apply("xyz", t);
    CHECK(segs == std::vector<std::string>{"x", "y", "z</w>"});
    CHECK(bpe_apply("", t).empty());
}

TEST_CASE("bpe apply-then-join restores every training word") {
    std::vector<std::string> corpus = {"lehrerin", "lehrer", "laufen",
                                       "lauft",    "hund",   "hunde",
                                       "haus",     "kleine", "kleiner"};
    for (std::size_t merges : {0u, 3u, 10u, 50u}) {
        MergeTable t = bpe_learn(corpus, merges);
        for (const auto& w : corpus) CHECK(bpe_join(bpe_apply(w, t)) == w);
    }
}

TEST_CASE("bpe merge table file round-trip") {
    MergeTable t = bpe_learn({"abab", "abab", "abc"}, 3);
    std::string path = temp_path("docfuse_bpe_test.txt");
    save_merges(path, t);
    MergeTable u = load_merges(path);
    CHECK(u.merges == t.merges);
    std::remove(path.c_str());
}

TEST_CASE("logsumexp and normalization checks") {
    LogDist d;
    d.logp = {std::log(0.25), std::log(0.25), std::log(0.5)};
    CHECK(std::abs(logsumexp(d.logp)) < 1e-12);
    check_normalized(d);
    CHECK(argmax(d) == 2);

    LogDist bad;
    bad.logp = {std::log(0.5), std::log(0.25)};
    CHECK_THROWS_AS(check_normalized(bad), Error);
    normalize(bad);
    check_normalized(bad);
}

} // TEST_SUITE
