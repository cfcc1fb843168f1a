#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "docfuse/decoder.hpp"
#include "docfuse/rng.hpp"

using namespace docfuse;

namespace {

std::shared_ptr<Vocabulary> make_vocab(const std::vector<std::string>& tokens) {
    auto v = std::make_shared<Vocabulary>();
    for (const auto& t : tokens) v->add(t);
    return v;
}

/// Small random translation model for oracle tests.
TranslationModel random_tm(Rng& rng, std::shared_ptr<const Vocabulary> vocab,
                           int n_src_tokens, int order = 2) {
    std::vector<SentencePair> pairs;
    int vsize = static_cast<int>(vocab->size());
    for (int i = 0; i < 25; ++i) {
        SentencePair p;
        int slen = static_cast<int>(rng.uniform_int(1, 3));
        int tlen = static_cast<int>(rng.uniform_int(1, 4));
        for (int j = 0; j < slen; ++j)
            p.source.push_back(static_cast<SubwordId>(rng.uniform_int(4, 3 + n_src_tokens)));
        for (int j = 0; j < tlen; ++j)
            p.target.push_back(static_cast<SubwordId>(rng.uniform_int(4 + n_src_tokens, vsize - 1)));
        pairs.push_back(p);
    }
    TranslationModel tm;
    tm.vocab = vocab;
    tm.mix = 0.5;
    tm.lexicon = train_ibm1(pairs, {3}).lexicon;
    TrainOptions opts;
    opts.order = order;
    std::vector<Sentence> tgt;
    for (const auto& p : pairs) tgt.push_back(p.target);
    tm.target_ngram = train_ngram_sequences(tgt, vocab, opts);
    return tm;
}

/// Exhaustive search over all token sequences up to max_len (including the
/// closing EOS), mirroring the decoder's scoring and tie-breaking.
DecodeResult exhaustive_decode(const FusionModels& models, const DecodeConfig& config,
                               const Sentence& source, const std::vector<Sentence>& context,
                               std::size_t max_len) {
    const std::size_t vsize = models.tm->vocab->size();
    DecodeResult best;
    bool have_best = false;

    struct Item {
        Sentence prefix;
        double score;
    };
    std::vector<Item> frontier{{{}, 0.0}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Item> next;
        for (const Item& item : frontier) {
            LogDist d = fused_step_dist(models, config, source, context, item.prefix);
            // finishing with EOS at this step
            double eos_score = item.score + d.logp[Vocabulary::kEos];
            double norm = eos_score / std::pow(static_cast<double>(item.prefix.size() + 1),
                                               config.length_norm_alpha);
            Sentence full = item.prefix;
            full.push_back(Vocabulary::kEos);
            if (!have_best || norm > best.normalized_score ||
                (norm == best.normalized_score && full < [&] {
                     Sentence t = best.tokens;
                     t.push_back(Vocabulary::kEos);
                     return t;
                 }())) {
                have_best = true;
                best.tokens = item.prefix;
                best.score = eos_score;
                best.normalized_score = norm;
            }
            if (len == max_len) continue;
            for (std::size_t w = 0; w < vsize; ++w) {
                if (static_cast<SubwordId>(w) == Vocabulary::kEos) continue;
                if (std::isinf(d.logp[w]) && d.logp[w] < 0) continue;
                Item it;
                it.prefix = item.prefix;
                it.prefix.push_back(static_cast<SubwordId>(w));
                it.score = item.score + d.logp[w];
                next.push_back(std::move(it));
            }
        }
        frontier = std::move(next);
    }
    return best;
}

} // namespace

TEST_SUITE("decoder") {

TEST_CASE("beam 1 equals the greedy argmax chain") {
    // compare on instances whose greedy chain terminates with EOS
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 50 && checked < 5; ++seed) {
        Rng rng(seed);
        auto vocab = make_vocab({"f1", "f2", "e1", "e2", "e3"});
        TranslationModel tm = random_tm(rng, vocab, 2);
        FusionModels models;
        models.tm = &tm;
        DecodeConfig config;
        config.beam_size = 1;

        Sentence source{vocab->lookup("f1"), vocab->lookup("f2")};
        Sentence greedy;
        bool terminated = false;
        std::size_t max_len = 3 * source.size() + 5;
        for (std::size_t step = 0; step < max_len; ++step) {
            LogDist d = fused_step_dist(models, config, source, {}, greedy);
            SubwordId top = argmax(d);
            if (top == Vocabulary::kEos) {
                terminated = true;
                break;
            }
            greedy.push_back(top);
        }
        if (!terminated) continue;
        ++checked;
        DecodeResult beam = beam_decode(models, config, source, {});
        CHECK(beam.tokens == greedy);
    }
    CHECK(checked == 5);
}

TEST_CASE("static fusion at (1,0,0) equals no fusion") {
    Rng rng(102);
    auto vocab = make_vocab({"f1", "f2", "e1", "e2", "e3"});
    TranslationModel tm = random_tm(rng, vocab, 2);
    NGramLM lm = tm.target_ngram; // stand-in document LM
    NGramLM ilm = tm.target_ngram;

    FusionModels plain{&tm, nullptr, nullptr};
    FusionModels fused{&tm, &lm, &ilm};
    DecodeConfig c_plain;
    DecodeConfig c_fused;
    c_fused.fusion = FusionMode::Static;
    c_fused.scales = {1.0, 0.0, 0.0};

    for (int trial = 0; trial < 10; ++trial) {
        Sentence source;
        int len = static_cast<int>(rng.uniform_int(1, 3));
        for (int i = 0; i < len; ++i)
            source.push_back(static_cast<SubwordId>(rng.uniform_int(4, 5)));
        DecodeResult a = beam_decode(plain, c_plain, source, {});
        DecodeResult b = beam_decode(fused, c_fused, source, {});
        CHECK(a.tokens == b.tokens);
    }
}

TEST_CASE("garden path: beam 2 beats beam 1") {
    // hand-built two-step model: greedy takes the locally best first token
    // and ends up with a worse normalized score
    auto vocab = make_vocab({"f", "a", "b"});
    SubwordId f = vocab->lookup("f"), a = vocab->lookup("a"), b = vocab->lookup("b");

    TranslationModel tm;
    tm.vocab = vocab;
    tm.mix = 0.0;
    const double vsize = static_cast<double>(vocab->size()); // 4 reserved + 3
    NGramLM& ng = tm.target_ngram;
    ng.order = 2;
    ng.vocab = vocab;
    ng.levels.resize(2);
    ng.unigram.assign(vocab->size(), 1.0 / vsize);

    auto set_ctx = [&](SubwordId ctx, std::vector<std::pair<SubwordId, double>> probs) {
        NGramLM::ContextEntry e;
        double stored = 0.0;
        std::size_t n_stored = probs.size();
        for (auto& [id, p] : probs) {
            (void)id;
            stored += p;
        }
        // leftover mass spread over the unstored unigram entries
        e.bow = (1.0 - stored) / ((vsize - static_cast<double>(n_stored)) / vsize);
        e.probs = std::move(probs);
        std::sort(e.probs.begin(), e.probs.end());
        std::string key(reinterpret_cast<const char*>(&ctx), sizeof(SubwordId));
        ng.levels[1][key] = e;
    };
    // BOS: a = 0.6, b = 0.39; a -> EOS 0.41; b -> EOS 0.95
    set_ctx(Vocabulary::kBos, {{a, 0.6}, {b, 0.39}});
    set_ctx(a, {{Vocabulary::kEos, 0.41}});
    set_ctx(b, {{Vocabulary::kEos, 0.95}});

    FusionModels models{&tm, nullptr, nullptr};
    DecodeConfig c1, c2;
    c1.beam_size = 1;
    c2.beam_size = 2;
    DecodeResult r1 = beam_decode(models, c1, {f}, {});
    DecodeResult r2 = beam_decode(models, c2, {f}, {});
    // greedy: a then EOS with score log(0.6*0.41); beam 2 finds b, EOS
    CHECK(r1.tokens == Sentence{a});
    CHECK(r2.tokens == Sentence{b});
    CHECK(r2.normalized_score > r1.normalized_score);
}

TEST_CASE("saturating beam equals exhaustive search") {
    Rng rng(103);
    int failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto vocab = make_vocab({"f1", "f2"}); // |V| = 6 with reserved? no: 4+2
        // keep |V| small: reserved 4 + f1 f2 = 6 total, targets reuse ids
        TranslationModel tm = random_tm(rng, vocab, 1, 2);
        FusionModels models{&tm, nullptr, nullptr};
        DecodeConfig config;
        config.beam_size = 100000;
        config.max_len_factor = 0;
        config.max_len_bias = 4; // sequences up to 4 tokens incl. EOS

        Sentence source{vocab->lookup("f1")};
        DecodeResult beam = beam_decode(models, config, source, {});
        DecodeResult oracle = exhaustive_decode(models, config, source, {}, 4);
        if (beam.tokens != oracle.tokens) ++failures;
        CHECK(beam.tokens == oracle.tokens);
        CHECK(beam.normalized_score == doctest::Approx(oracle.normalized_score).epsilon(1e-12));
    }
    CHECK(failures == 0);
}

TEST_CASE("best normalized score is monotone in beam size") {
    Rng rng(104);
    for (int trial = 0; trial < 10; ++trial) {
        auto vocab = make_vocab({"f1", "f2", "e1", "e2"});
        TranslationModel tm = random_tm(rng, vocab, 2);
        FusionModels models{&tm, nullptr, nullptr};
        Sentence source{vocab->lookup("f1"), vocab->lookup("f2")};
        double prev = -1e18;
        for (int beam = 1; beam <= 4; ++beam) {
            DecodeConfig config;
            config.beam_size = beam;
            DecodeResult r = beam_decode(models, config, source, {});
            CHECK(r.normalized_score >= prev - 1e-12);
            prev = r.normalized_score;
        }
    }
}

TEST_CASE("decoding is deterministic") {
    Rng rng(105);
    auto vocab = make_vocab({"f1", "f2", "e1", "e2", "e3"});
    TranslationModel tm = random_tm(rng, vocab, 2);
    FusionModels models{&tm, nullptr, nullptr};
    DecodeConfig config;
    Sentence source{vocab->lookup("f1")};
    DecodeResult a = beam_decode(models, config, source, {});
    DecodeResult b = beam_decode(models, config, source, {});
    CHECK(a.tokens == b.tokens);
    CHECK(a.score == b.score);
}

TEST_CASE("document decoding with k=0 equals independent sentences") {
    Rng rng(106);
    auto vocab = make_vocab({"f1", "f2", "e1", "e2"});
    TranslationModel tm = random_tm(rng, vocab, 2);
    FusionModels models{&tm, nullptr, nullptr};
    DecodeConfig config;
    config.context_k = 0;

    Document doc;
    doc.id = "d";
    doc.sentences = {{vocab->lookup("f1")}, {vocab->lookup("f2")},
                     {vocab->lookup("f1"), vocab->lookup("f2")}};
    Document out = decode_document(models, config, doc);
    REQUIRE(out.sentences.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(out.sentences[i] == beam_decode(models, config, doc.sentences[i], {}).tokens);

    Document single;
    single.id = "s";
    single.sentences = {{vocab->lookup("f1")}};
    CHECK(decode_document(models, config, single).sentences.size() == 1);
}

TEST_CASE("pronoun re-ranking picks the context-consistent pronoun") {
    auto vocab = make_vocab({"der", "hund", "er", "sie", "es", "laeuft"});
    auto enc = [&](const std::vector<std::string>& t) { return vocab->encode(t); };
    std::vector<Document> docs;
    for (int i = 0; i < 6; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.sentences = {enc({"der", "hund"}), enc({"er", "laeuft"})};
        docs.push_back(d);
    }
    TrainOptions opts;
    opts.order = 3;
    opts.context_k = 2;
    NGramLM doc_lm = train_ngram(docs, vocab, opts);

    std::vector<SubwordId> pronouns = {vocab->lookup("er"), vocab->lookup("sie"),
                                       vocab->lookup("es")};
    Sentence hyp = enc({"es", "laeuft"});
    Sentence fixed = rerank_pronouns(hyp, doc_lm, {enc({"der", "hund"})}, pronouns);
    CHECK(fixed == enc({"er", "laeuft"}));

    // direct-oracle cross-check: score all three candidates
    double best = -1e18;
    Sentence best_cand;
    for (SubwordId p : pronouns) {
        Sentence cand = hyp;
        cand[0] = p;
        double s = doc_lm.score_sequence(cand, {enc({"der", "hund"})});
        if (s > best) {
            best = s;
            best_cand = cand;
        }
    }
    CHECK(fixed == best_cand);
}

TEST_CASE("re-ranking leaves non-pronoun tokens and pronoun-free input alone") {
    auto vocab = make_vocab({"der", "hund", "er", "sie", "es", "laeuft"});
    auto enc = [&](const std::vector<std::string>& t) { return vocab->encode(t); };
    TrainOptions opts;
    opts.order = 2;
    NGramLM lm = train_ngram_sequences({enc({"der", "hund"})}, vocab, opts);
    std::vector<SubwordId> pronouns = {vocab->lookup("er"), vocab->lookup("sie"),
                                       vocab->lookup("es")};

    Sentence hyp = enc({"der", "hund", "laeuft"});
    CHECK(rerank_pronouns(hyp, lm, {}, pronouns) == hyp);

    // two pronoun positions -> 9 candidates; tokens elsewhere untouched
    Sentence two = enc({"er", "laeuft", "sie"});
    Sentence out = rerank_pronouns(two, lm, {}, pronouns);
    CHECK(out[1] == vocab->lookup("laeuft"));
}

TEST_CASE("re-ranking cap falls back to per-position choice") {
    auto vocab = make_vocab({"er", "sie", "es", "x"});
    std::vector<SubwordId> pronouns = {vocab->lookup("er"), vocab->lookup("sie"),
                                       vocab->lookup("es")};
    TrainOptions opts;
    opts.order = 1;
    NGramLM lm = train_ngram_sequences({{vocab->lookup("er")}, {vocab->lookup("er")}},
                                       vocab, opts);
    // five pronoun positions => 243 combos > cap 81: still deterministic
    Sentence hyp(5, vocab->lookup("es"));
    Sentence out = rerank_pronouns(hyp, lm, {}, pronouns, 81);
    for (SubwordId t : out) CHECK(t == vocab->lookup("er"));
}

} // TEST_SUITE
