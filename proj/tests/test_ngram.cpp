#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "docfuse/corpus_io.hpp"
#include "docfuse/ngram.hpp"
#include "docfuse/rng.hpp"

using namespace docfuse;

namespace {

std::shared_ptr<Vocabulary> make_vocab(const std::vector<std::string>& tokens) {
    auto v = std::make_shared<Vocabulary>();
    for (const auto& t : tokens) v->add(t);
    return v;
}

std::vector<Document> one_doc(const std::vector<Sentence>& sentences) {
    Document d;
    d.id = "d0";
    d.sentences = sentences;
    return {d};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

/// Uniform LM over the vocabulary, built directly from tables.
NGramLM uniform_lm(std::shared_ptr<const Vocabulary> vocab) {
    NGramLM lm;
    lm.order = 1;
    lm.vocab = vocab;
    lm.levels.resize(1);
    lm.unigram.assign(vocab->size(), 1.0 / static_cast<double>(vocab->size()));
    return lm;
}

} // namespace

TEST_SUITE("ngram") {

TEST_CASE("unigram absolute discounting matches the hand-expanded formula") {
    // |V| = 6 (reserved + a, b); counts a:2 b:1 with markers disabled
    auto vocab = make_vocab({"a", "b"});
    SubwordId a = vocab->lookup("a"), b = vocab->lookup("b");
    TrainOptions opts;
    opts.order = 1;
    opts.discount = 0.5;
    opts.sentence_markers = false;
    NGramLM lm = train_ngram_sequences({{a, a, b}}, vocab, opts);

    double expected_a = (2.0 - 0.5) / 3.0 + (0.5 * 2.0 / 3.0) * (1.0 / 6.0);
    CHECK(lm.prob({}, a) == doctest::Approx(expected_a).epsilon(1e-12));
    CHECK(std::round(expected_a * 1e4) / 1e4 == doctest::Approx(0.5556));
    double expected_b = (1.0 - 0.5) / 3.0 + (0.5 * 2.0 / 3.0) * (1.0 / 6.0);
    CHECK(lm.prob({}, b) == doctest::Approx(expected_b).epsilon(1e-12));
}

TEST_CASE("bigram count dominance") {
    auto vocab = make_vocab({"a", "b", "x", "y"});
    SubwordId a = vocab->lookup("a"), b = vocab->lookup("b");
    TrainOptions opts;
    opts.order = 2;
    std::vector<Sentence> seqs = {{a, b}, {a, b, a, b}, {vocab->lookup("x"), a, b}};
    NGramLM lm = train_ngram_sequences(seqs, vocab, opts);
    for (std::size_t w = 0; w < vocab->size(); ++w) {
        if (static_cast<SubwordId>(w) == b) continue;
        CHECK(lm.prob({a}, b) > lm.prob({a}, static_cast<SubwordId>(w)));
    }
}

TEST_CASE("document context model prefers the consistent continuation") {
    auto vocab = make_vocab({"der", "hund", ".", "er", "sie", "laeuft"});
    auto enc = [&](const std::vector<std::string>& toks) { return vocab->encode(toks); };
    std::vector<Document> docs;
    for (int i = 0; i < 5; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.sentences = {enc({"der", "hund", "."}), enc({"er", "laeuft", "."})};
        docs.push_back(d);
    }
    TrainOptions opts;
    opts.order = 3;
    opts.context_k = 2;
    NGramLM lm = train_ngram(docs, vocab, opts);

    Sentence hist = lm_history({enc({"der", "hund", "."})});
    CHECK(lm.prob(hist, vocab->lookup("er")) > lm.prob(hist, vocab->lookup("sie")));
}

TEST_CASE("unseen and empty histories back off to the unigram distribution") {
    auto vocab = make_vocab({"a", "b", "c"});
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm = train_ngram_sequences(
        {{vocab->lookup("a"), vocab->lookup("b")}, {vocab->lookup("b"), vocab->lookup("c")}},
        vocab, opts);

    LogDist uni = lm.cond_logdist({});
    LogDist unseen = lm.cond_logdist({Vocabulary::kUnk}); // UNK never a context
    REQUIRE(uni.size() == unseen.size());
    for (std::size_t i = 0; i < uni.size(); ++i)
        CHECK(unseen.logp[i] == doctest::Approx(uni.logp[i]).epsilon(1e-12));
}

TEST_CASE("conditional distributions sum to one over random histories") {
    Rng rng(11);
    auto vocab = make_vocab({"a", "b", "c", "d", "e"});
    std::vector<Sentence> seqs;
    for (int s = 0; s < 40; ++s) {
        Sentence seq;
        int len = static_cast<int>(rng.uniform_int(1, 8));
        for (int i = 0; i < len; ++i)
            seq.push_back(static_cast<SubwordId>(rng.uniform_int(4, 8)));
        seqs.push_back(seq);
    }
    TrainOptions opts;
    opts.order = 3;
    NGramLM lm = train_ngram_sequences(seqs, vocab, opts);

    for (int trial = 0; trial < 100; ++trial) {
        Sentence hist;
        int len = static_cast<int>(rng.uniform_int(0, 5));
        for (int i = 0; i < len; ++i)
            hist.push_back(static_cast<SubwordId>(rng.uniform_int(0, 8)));
        LogDist d = lm.cond_logdist(hist);
        CHECK(std::abs(logsumexp(d.logp)) <= 1e-9);
        double floor = 0.0;
        for (double lp : d.logp) {
            CHECK(std::isfinite(lp)); // strictly positive probabilities
            floor = std::min(floor, lp);
        }
    }
}

TEST_CASE("score_sequence is additive and ignores empty sentences") {
    auto vocab = make_vocab({"a", "b", "c"});
    SubwordId a = vocab->lookup("a"), b = vocab->lookup("b"), c = vocab->lookup("c");
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm = train_ngram_sequences({{a, b, c}, {a, b}}, vocab, opts);

    CHECK(lm.score_sequence({}, {}) == 0.0);

    // definition: sum of conditionals with BOS history
    double manual = std::log(lm.prob({Vocabulary::kBos}, a)) +
                    std::log(lm.prob({Vocabulary::kBos, a}, b));
    CHECK(lm.score_sequence({a, b}, {}) == doctest::Approx(manual).epsilon(1e-12));

    // appending one token adds exactly its conditional log-probability
    double with_c = lm.score_sequence({a, b, c}, {});
    double cond_c = std::log(lm.prob({Vocabulary::kBos, a, b}, c));
    CHECK(with_c == doctest::Approx(lm.score_sequence({a, b}, {}) + cond_c).epsilon(1e-12));
}

TEST_CASE("uniform model has perplexity |V|") {
    auto vocab = make_vocab({"a", "b"});
    // pad the vocabulary to 100 entries
    for (int i = 0; i < 94; ++i) vocab->add("tok" + std::to_string(i));
    REQUIRE(vocab->size() == 100);
    NGramLM lm = uniform_lm(vocab);
    double ppl = perplexity(lm, one_doc({{vocab->lookup("a"), vocab->lookup("b")}}));
    CHECK(ppl == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("memorizing model approaches perplexity 1") {
    auto vocab = make_vocab({"a", "b", "c"});
    Sentence sent = {vocab->lookup("a"), vocab->lookup("b"), vocab->lookup("c")};
    TrainOptions opts;
    opts.order = 5; // n >= sentence length + 1
    opts.discount = 1e-6;
    NGramLM lm = train_ngram_sequences({sent}, vocab, opts);
    double ppl = perplexity(lm, one_doc({sent}));
    CHECK(ppl == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("training is deterministic") {
    Rng rng(3);
    std::vector<Sentence> seqs;
    for (int s = 0; s < 20; ++s) {
        Sentence seq;
        for (int i = 0; i < 6; ++i)
            seq.push_back(static_cast<SubwordId>(rng.uniform_int(4, 9)));
        seqs.push_back(seq);
    }
    auto vocab = make_vocab({"a", "b", "c", "d", "e", "f"});
    TrainOptions opts;
    opts.order = 3;
    NGramLM lm1 = train_ngram_sequences(seqs, vocab, opts);
    NGramLM lm2 = train_ngram_sequences(seqs, vocab, opts);

    std::string p1 = temp_path("docfuse_det1.arpa"), p2 = temp_path("docfuse_det2.arpa");
    save_arpa(lm1, p1);
    save_arpa(lm2, p2);
    std::ifstream f1(p1), f2(p2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("ARPA round-trip preserves conditionals to 1e-6 relative") {
    Rng rng(5);
    auto vocab = make_vocab({"a", "b", "c", "d"});
    std::vector<Sentence> seqs;
    for (int s = 0; s < 30; ++s) {
        Sentence seq;
        int len = static_cast<int>(rng.uniform_int(1, 7));
        for (int i = 0; i < len; ++i)
            seq.push_back(static_cast<SubwordId>(rng.uniform_int(4, 7)));
        seqs.push_back(seq);
    }
    TrainOptions opts;
    opts.order = 3;
    NGramLM lm = train_ngram_sequences(seqs, vocab, opts);

    std::string path = temp_path("docfuse_roundtrip.arpa");
    save_arpa(lm, path);
    NGramLM loaded = load_arpa(path);
    CHECK(loaded.order == lm.order);
    CHECK(loaded.context_k == lm.context_k);
    CHECK(loaded.vocab_size() == lm.vocab_size());

    for (int trial = 0; trial < 200; ++trial) {
        Sentence hist;
        int len = static_cast<int>(rng.uniform_int(0, 3));
        for (int i = 0; i < len; ++i)
            hist.push_back(static_cast<SubwordId>(rng.uniform_int(0, 7)));
        SubwordId tok = static_cast<SubwordId>(rng.uniform_int(0, 7));
        double orig = lm.prob(hist, tok);
        double rt = loaded.prob(hist, tok);
        CHECK(std::abs(rt - orig) / orig <= 1e-6);
    }
    std::remove(path.c_str());
}

TEST_CASE("ARPA count headers match emitted lines") {
    auto vocab = make_vocab({"a", "b"});
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm = train_ngram_sequences({{vocab->lookup("a"), vocab->lookup("b")}}, vocab, opts);
    std::string path = temp_path("docfuse_counts.arpa");
    save_arpa(lm, path);

    std::ifstream f(path);
    std::string line;
    std::size_t declared1 = 0, declared2 = 0, seen1 = 0, seen2 = 0;
    int section = 0;
    while (std::getline(f, line)) {
        if (line.rfind("ngram 1=", 0) == 0) declared1 = std::stoul(line.substr(8));
        if (line.rfind("ngram 2=", 0) == 0) declared2 = std::stoul(line.substr(8));
        if (line == "\\1-grams:") { section = 1; continue; }
        if (line == "\\2-grams:") { section = 2; continue; }
        if (line == "\\end\\") section = 0;
        if (line.empty()) continue;
        if (section == 1 && line[0] != '\\') ++seen1;
        if (section == 2 && line[0] != '\\') ++seen2;
    }
    CHECK(seen1 == declared1);
    CHECK(seen2 == declared2);
    CHECK(declared1 == vocab->size());
    std::remove(path.c_str());
}

TEST_CASE("ARPA loader rejects corrupted files with located errors") {
    auto vocab = make_vocab({"a", "b"});
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm = train_ngram_sequences({{vocab->lookup("a"), vocab->lookup("b")}}, vocab, opts);
    std::string path = temp_path("docfuse_corrupt.arpa");
    save_arpa(lm, path);

    std::ifstream in(path);
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    SUBCASE("missing end marker") {
        std::string broken = contents.substr(0, contents.find("\\end\\"));
        std::ofstream out(path);
        out << broken;
        out.close();
        CHECK_THROWS_WITH_AS(load_arpa(path),
                             doctest::Contains("missing \\end\\ marker"), ParseError);
    }
    SUBCASE("count mismatch") {
        std::string broken = contents;
        std::size_t pos = broken.find("ngram 2=");
        broken.replace(pos, 9, "ngram 2=9");
        std::ofstream out(path);
        out << broken;
        out.close();
        CHECK_THROWS_AS(load_arpa(path), ParseError);
    }
    SUBCASE("bad numeric field") {
        std::string broken = contents;
        std::size_t pos = broken.find("\\1-grams:");
        pos = broken.find('\n', pos) + 1;
        std::size_t tab = broken.find('\t', pos);
        broken.replace(pos, tab - pos, "bogus");
        std::ofstream out(path);
        out << broken;
        out.close();
        try {
            load_arpa(path);
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":") != std::string::npos);
            CHECK(e.line() > 0);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("in-domain LM beats out-of-domain LM on matching test data") {
    // two synthetic domains with disjoint content tokens
    auto vocab = make_vocab({"a", "b", "c", "x", "y", "z"});
    auto enc = [&](std::initializer_list<const char*> toks) {
        Sentence s;
        for (const char* t : toks) s.push_back(vocab->lookup(t));
        return s;
    };
    Rng rng(17);
    std::vector<Sentence> domain_a, domain_b;
    const char* aw[] = {"a", "b", "c"};
    const char* bw[] = {"x", "y", "z"};
    for (int i = 0; i < 50; ++i) {
        Sentence sa, sb;
        int len = static_cast<int>(rng.uniform_int(2, 6));
        for (int j = 0; j < len; ++j) {
            sa.push_back(vocab->lookup(aw[rng.uniform_int(0, 2)]));
            sb.push_back(vocab->lookup(bw[rng.uniform_int(0, 2)]));
        }
        domain_a.push_back(sa);
        domain_b.push_back(sb);
    }
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm_a = train_ngram_sequences(domain_a, vocab, opts);
    NGramLM lm_b = train_ngram_sequences(domain_b, vocab, opts);

    std::vector<Document> test_a = one_doc({enc({"a", "b", "a"}), enc({"c", "b"})});
    CHECK(perplexity(lm_a, test_a) < perplexity(lm_b, test_a));
}

} // TEST_SUITE
