#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "docfuse/backtranslation.hpp"
#include "docfuse/corpus_io.hpp"
#include "docfuse/decoder.hpp"
#include "docfuse/eval.hpp"
#include "docfuse/ngram.hpp"
#include "docfuse/scale_tuning.hpp"
#include "docfuse/syncorpus.hpp"
#include "docfuse/translation_model.hpp"
#include "docfuse/vocab.hpp"

namespace fs = std::filesystem;
using namespace docfuse;

namespace {

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        std::string item =
            s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (!item.empty()) out.push_back(item);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// shared option bundles
// ---------------------------------------------------------------------------

struct ModelArgs {
    std::string vocab_path;
    std::string lexicon_path;
    std::string tm_ngram_path;
    std::string lm_path;
    std::string ilm_path;
    double mu = 0.5;
};

struct DecodeArgs {
    int beam = 12;
    int k = 2;
    double alpha = 1.0;
    std::string fusion = "none";
    std::string scales_path;
    std::string table_path;
    double grid_step = 0.1;
    bool unrestricted = false;
};

void add_model_options(CLI::App* cmd, ModelArgs& args, bool need_lm) {
    cmd->add_option("--vocab", args.vocab_path, "vocabulary file")->required();
    cmd->add_option("--lexicon", args.lexicon_path, "TM lexicon file")->required();
    cmd->add_option("--tm-ngram", args.tm_ngram_path, "TM n-gram component (ARPA)")->required();
    auto* lm = cmd->add_option("--lm", args.lm_path, "document-level LM (ARPA)");
    auto* ilm = cmd->add_option("--ilm", args.ilm_path, "internal LM estimate (ARPA)");
    if (need_lm) {
        lm->required();
        ilm->required();
    }
    cmd->add_option("--mu", args.mu, "TM lexical mixture weight")->capture_default_str();
}

void add_decode_options(CLI::App* cmd, DecodeArgs& args) {
    cmd->add_option("--beam", args.beam, "beam size")->capture_default_str();
    cmd->add_option("--k", args.k, "target-side context sentences")->capture_default_str();
    cmd->add_option("--alpha", args.alpha, "length normalization exponent")
        ->capture_default_str();
    cmd->add_option("--fusion", args.fusion,
                    "fusion mode: none|static|context_delta|on_the_fly|learned")
        ->capture_default_str();
    cmd->add_option("--scales", args.scales_path, "static scales file");
    cmd->add_option("--scale-table", args.table_path, "learned scale table file");
    cmd->add_option("--grid-step", args.grid_step, "on-the-fly grid step")
        ->capture_default_str();
    cmd->add_flag("--unrestricted", args.unrestricted,
                  "search the full scale grid instead of l0=1, l1=l2");
}

std::shared_ptr<Vocabulary> load_vocab(const std::string& path) {
    return std::make_shared<Vocabulary>(Vocabulary::load(path));
}

void check_same_vocab(const Vocabulary& a, const Vocabulary& b, const std::string& what) {
    if (a.size() != b.size()) throw Error(what + ": vocabulary size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.decode(static_cast<SubwordId>(i)) != b.decode(static_cast<SubwordId>(i)))
            throw Error(what + ": vocabulary token mismatch at id " + std::to_string(i));
}

struct LoadedModels {
    std::shared_ptr<Vocabulary> vocab;
    TranslationModel tm;
    NGramLM lm;
    NGramLM ilm;
    bool has_lm = false;
    bool has_ilm = false;
};

LoadedModels load_models(const ModelArgs& args) {
    LoadedModels m;
    m.vocab = load_vocab(args.vocab_path);
    m.tm.vocab = m.vocab;
    m.tm.mix = args.mu;
    m.tm.lexicon = Lexicon::load(args.lexicon_path, *m.vocab);
    m.tm.target_ngram = load_arpa(args.tm_ngram_path);
    check_same_vocab(*m.vocab, *m.tm.target_ngram.vocab, args.tm_ngram_path);
    m.tm.target_ngram.vocab = m.vocab;
    if (!args.lm_path.empty()) {
        m.lm = load_arpa(args.lm_path);
        check_same_vocab(*m.vocab, *m.lm.vocab, args.lm_path);
        m.lm.vocab = m.vocab;
        m.has_lm = true;
    }
    if (!args.ilm_path.empty()) {
        m.ilm = load_arpa(args.ilm_path);
        check_same_vocab(*m.vocab, *m.ilm.vocab, args.ilm_path);
        m.ilm.vocab = m.vocab;
        m.has_ilm = true;
    }
    return m;
}

DecodeConfig make_decode_config(const DecodeArgs& args, const Vocabulary& vocab) {
    DecodeConfig config;
    config.beam_size = args.beam;
    config.context_k = args.k;
    config.length_norm_alpha = args.alpha;
    config.fusion = fusion_mode_from_string(args.fusion);
    if (config.fusion == FusionMode::Static || config.fusion == FusionMode::ContextDelta) {
        if (args.scales_path.empty())
            throw Error("fusion mode '" + args.fusion + "' needs --scales");
        config.scales = load_scales(args.scales_path);
    }
    if (config.fusion == FusionMode::OnTheFly)
        config.grid =
            args.unrestricted ? full_grid(args.grid_step) : restricted_grid(args.grid_step);
    if (config.fusion == FusionMode::Learned) {
        if (args.table_path.empty()) throw Error("fusion mode 'learned' needs --scale-table");
        config.table = SubwordScaleTable::load(args.table_path, vocab);
    }
    return config;
}

std::vector<Document> read_encoded(const std::string& path, const Vocabulary& vocab) {
    return encode_corpus(read_corpus(path), vocab);
}

std::vector<Sentence> flatten(const std::vector<Document>& docs) {
    std::vector<Sentence> out;
    for (const auto& d : docs) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
    return out;
}

std::vector<std::vector<std::string>> flatten_text(const std::vector<TextDocument>& docs) {
    std::vector<std::vector<std::string>> out;
    for (const auto& d : docs) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
    return out;
}

/// The single position where reference and variants disagree; challenge
/// variants swap exactly one token.
std::size_t variant_position(const TextContrastiveExample& ex) {
    for (std::size_t i = 0; i < ex.reference.size(); ++i)
        for (const auto& alt : ex.contrastive)
            if (i < alt.size() && alt[i] != ex.reference[i]) return i;
    throw Error("challenge example has no contrasting token");
}

/// Generation accuracy on a challenge set: the hypothesis must contain the
/// reference's contrastive token and none of the variants' tokens.
double challenge_generation_accuracy(const std::vector<TextContrastiveExample>& examples,
                                     const std::vector<std::vector<std::string>>& hyps) {
    if (hyps.size() != examples.size())
        throw Error("hypothesis count does not match challenge set");
    std::vector<KeywordExample> kex;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::size_t pos = variant_position(examples[i]);
        KeywordExample k;
        k.id = std::to_string(i);
        k.correct_terms = {examples[i].reference[pos]};
        for (const auto& alt : examples[i].contrastive)
            if (pos < alt.size() && alt[pos] != examples[i].reference[pos])
                k.incorrect_terms.push_back(alt[pos]);
        kex.push_back(std::move(k));
    }
    return keyword_accuracy(hyps, kex);
}

void update_report(const std::string& path, const std::string& system,
                   const std::string& metric, double value) {
    ReportTable table;
    if (fs::exists(path)) table = ReportTable::load(path);
    table.set(system, metric, value);
    table.save(path);
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

struct GenCorpusArgs {
    std::string out_dir;
    std::size_t train_docs = 800, valid_docs = 40, test_docs = 60;
    std::size_t mono_docs = 1600, challenge = 300;
    std::uint64_t seed = 1;
    std::string domain = "default";
};

void run_gen_corpus(const GenCorpusArgs& args) {
    GrammarSpec spec =
        args.domain == "alt" ? GrammarSpec::alt_domain() : GrammarSpec::defaults();
    if (args.domain != "default" && args.domain != "alt")
        throw Error("unknown domain: " + args.domain);
    spec.seed = args.seed;
    std::size_t n_parallel = args.train_docs + args.valid_docs + args.test_docs;
    GeneratedCorpus corpus = generate(spec, n_parallel, args.mono_docs, args.challenge);

    fs::create_directories(args.out_dir);
    auto path = [&](const char* name) { return (fs::path(args.out_dir) / name).string(); };
    auto slice = [](const std::vector<TextDocument>& docs, std::size_t lo, std::size_t n) {
        return std::vector<TextDocument>(docs.begin() + static_cast<std::ptrdiff_t>(lo),
                                         docs.begin() + static_cast<std::ptrdiff_t>(lo + n));
    };
    write_corpus(path("train.src"), slice(corpus.parallel_src, 0, args.train_docs));
    write_corpus(path("train.tgt"), slice(corpus.parallel_tgt, 0, args.train_docs));
    write_corpus(path("valid.src"),
                 slice(corpus.parallel_src, args.train_docs, args.valid_docs));
    write_corpus(path("valid.tgt"),
                 slice(corpus.parallel_tgt, args.train_docs, args.valid_docs));
    write_corpus(path("test.src"),
                 slice(corpus.parallel_src, args.train_docs + args.valid_docs, args.test_docs));
    write_corpus(path("test.tgt"),
                 slice(corpus.parallel_tgt, args.train_docs + args.valid_docs, args.test_docs));
    write_corpus(path("mono.tgt"), corpus.mono_tgt);
    write_challenge_set(path("pronouns.challenge"), corpus.pronoun_challenge);
    write_challenge_set(path("professions.challenge"), corpus.keyword_challenge);
    write_keyword_file(path("professions.keywords"), corpus.keywords);
    {
        std::ofstream f(path("lexicon_oracle.tsv"));
        for (const auto& [tgt, src] : corpus.lexicon_oracle) f << tgt << '\t' << src << '\n';
    }
    write_manifest(path("manifest.txt"), corpus.manifest);
    std::cout << "wrote corpus to " << args.out_dir << "\n";
}

struct TrainTmArgs {
    std::string train_src, train_tgt;
    std::string vocab_in, vocab_out;
    std::string lexicon_out, ngram_out;
    int iterations = 5;
    int order = 4;
    double discount = 0.75;
    int doc_context = 0;
};

void run_train_tm(const TrainTmArgs& args) {
    auto src_docs_text = read_corpus(args.train_src);
    auto tgt_docs_text = read_corpus(args.train_tgt);

    std::shared_ptr<Vocabulary> vocab;
    if (!args.vocab_in.empty()) {
        vocab = load_vocab(args.vocab_in);
    } else {
        vocab = std::make_shared<Vocabulary>(
            build_vocab({token_stream(src_docs_text), token_stream(tgt_docs_text)}, 65536));
    }
    if (!args.vocab_out.empty()) vocab->save(args.vocab_out);

    auto src_docs = encode_corpus(src_docs_text, *vocab);
    auto tgt_docs = encode_corpus(tgt_docs_text, *vocab);
    auto pairs = flatten_pairs(zip_parallel(src_docs, tgt_docs));

    Ibm1Result em = train_ibm1(pairs, {args.iterations});
    em.lexicon.save(args.lexicon_out, *vocab);

    TrainOptions opts;
    opts.order = args.order;
    opts.discount = args.discount;
    opts.context_k = args.doc_context;
    NGramLM ngram = train_ngram(tgt_docs, vocab, opts);
    save_arpa(ngram, args.ngram_out);

    std::cout << "trained IBM-1 lexicon (" << em.lexicon.table.size() << " source rows, "
              << args.iterations << " EM iterations) and order-" << args.order
              << " target n-gram (context-k " << opts.context_k << ")\n";
}

struct TrainLmArgs {
    std::string corpus, vocab_in, out;
    int order = 4;
    double discount = 0.75;
    int doc_context = 0;
};

void run_train_lm(const TrainLmArgs& args) {
    auto vocab = load_vocab(args.vocab_in);
    auto docs = read_encoded(args.corpus, *vocab);
    TrainOptions opts;
    opts.order = args.order;
    opts.discount = args.discount;
    opts.context_k = args.doc_context;
    NGramLM lm = train_ngram(docs, vocab, opts);
    save_arpa(lm, args.out);
    std::cout << "trained order-" << args.order << " LM (context-k " << opts.context_k
              << ") on " << docs.size() << " documents\n";
}

struct TuneGridArgs {
    ModelArgs models;
    DecodeArgs decode;
    std::string valid_src, valid_tgt;
    std::string objective = "bleu";
    std::string scales_out, report_out;
};

void run_tune_grid(const TuneGridArgs& args) {
    LoadedModels m = load_models(args.models);
    auto pdocs = zip_parallel(read_encoded(args.valid_src, *m.vocab),
                              read_encoded(args.valid_tgt, *m.vocab));
    auto examples = tune_examples_from_docs(pdocs, args.decode.k);

    TuneObjective objective;
    if (args.objective == "bleu")
        objective = TuneObjective::Bleu;
    else if (args.objective == "ce")
        objective = TuneObjective::CrossEntropy;
    else
        throw Error("unknown objective: " + args.objective);

    ScaleGrid grid = args.decode.unrestricted ? full_grid(args.decode.grid_step)
                                              : restricted_grid(args.decode.grid_step);
    DecodeConfig config;
    config.beam_size = args.decode.beam;
    config.context_k = args.decode.k;
    config.length_norm_alpha = args.decode.alpha;

    FusionModels models{&m.tm, &m.lm, &m.ilm};
    GridSearchResult result = grid_search_scales(examples, grid, objective, models, config);
    save_scales(args.scales_out, result.best);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.report_out.empty()) {
        file.open(args.report_out);
        if (!file) throw Error("cannot write report: " + args.report_out);
        out = &file;
    }
    char buf[128];
    for (const auto& point : result.report) {
        std::snprintf(buf, sizeof(buf), "%.1f %.1f %.1f\t%.6f", point.scales.l0,
                      point.scales.l1, point.scales.l2, point.score);
        *out << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "best\t%.6f %.6f %.6f", result.best.l0, result.best.l1,
                  result.best.l2);
    *out << buf << '\n';
}

struct LearnScalesArgs {
    ModelArgs models;
    std::string tuning_src, tuning_tgt;
    std::string table_out, scales_out;
    double lr = 0.1, init_std = 0.01;
    int epochs = 20;
    std::uint64_t seed = 1;
    int k = 2;
    bool tied = false;
    bool unrestricted = false;
};

void run_learn_scales(const LearnScalesArgs& args) {
    LoadedModels m = load_models(args.models);
    auto pdocs = zip_parallel(read_encoded(args.tuning_src, *m.vocab),
                              read_encoded(args.tuning_tgt, *m.vocab));
    auto examples = tune_examples_from_docs(pdocs, args.k);

    LearnOptions opts;
    opts.lr = args.lr;
    opts.init_std = args.init_std;
    opts.epochs = args.epochs;
    opts.seed = args.seed;
    opts.tied = args.tied;
    opts.restricted = !args.unrestricted;
    opts.context_k = args.k;

    FusionModels models{&m.tm, &m.lm, &m.ilm};
    LearnResult result = learn_subword_scales(examples, models, opts);

    if (!args.table_out.empty()) result.table.save(args.table_out, *m.vocab);
    if (!args.scales_out.empty()) {
        if (!args.tied) throw Error("--scales-out requires --tied");
        const auto& s = result.table.scales[0];
        save_scales(args.scales_out, {s[0], s[1], s[2]});
    }
    std::cout << "loss trace (mean CE per token):";
    for (double l : result.loss_trace) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.4f", l);
        std::cout << buf;
    }
    std::cout << "\n";
}

struct TranslateArgs {
    ModelArgs models;
    DecodeArgs decode;
    std::string src, out;
    std::string challenge;
};

void run_translate(const TranslateArgs& args) {
    LoadedModels m = load_models(args.models);
    if (args.decode.fusion != "none" && args.decode.fusion != "context_delta" &&
        (!m.has_lm || !m.has_ilm))
        throw Error("fusion mode '" + args.decode.fusion + "' needs --lm and --ilm");
    if (args.decode.fusion == "context_delta" && !m.has_lm)
        throw Error("fusion mode 'context_delta' needs --lm");
    DecodeConfig config = make_decode_config(args.decode, *m.vocab);
    FusionModels models{&m.tm, m.has_lm ? &m.lm : nullptr, m.has_ilm ? &m.ilm : nullptr};
    if (config.fusion == FusionMode::ContextDelta) models.ilm = models.lm;

    if (!args.challenge.empty()) {
        auto examples = read_challenge_set(args.challenge);
        TextDocument hyps;
        hyps.id = "challenge";
        for (const auto& ex : examples) {
            Sentence src_sent = m.vocab->encode(ex.source);
            std::vector<Sentence> ctx;
            for (const auto& c : ex.context) ctx.push_back(m.vocab->encode(c));
            DecodeResult r = beam_decode(models, config, src_sent, ctx);
            hyps.sentences.push_back(m.vocab->decode(r.tokens));
        }
        write_corpus(args.out, {hyps});
        std::cout << "decoded " << examples.size() << " challenge examples\n";
        return;
    }

    if (args.src.empty()) throw Error("translate needs --src or --challenge");
    auto src_docs = read_encoded(args.src, *m.vocab);
    std::vector<Document> out_docs = decode_corpus(models, config, src_docs);
    write_corpus(args.out, decode_corpus(out_docs, *m.vocab));
    std::size_t n = 0;
    for (const auto& d : out_docs) n += d.sentences.size();
    std::cout << "translated " << n << " sentences in " << out_docs.size() << " documents\n";
}

struct RerankArgs {
    std::string hyp, out, challenge;
    std::string vocab_path, lm_path;
    std::string pronouns = "er,sie,es";
    std::size_t cap = 81;
    int k = 2;
};

void run_rerank(const RerankArgs& args) {
    auto vocab = load_vocab(args.vocab_path);
    NGramLM lm = load_arpa(args.lm_path);
    check_same_vocab(*vocab, *lm.vocab, args.lm_path);
    lm.vocab = vocab;

    std::vector<SubwordId> pronouns;
    for (const auto& tok : split_list(args.pronouns, ',')) {
        if (!vocab->contains(tok)) throw Error("pronoun not in vocabulary: " + tok);
        pronouns.push_back(vocab->lookup(tok));
    }

    auto hyp_docs = read_encoded(args.hyp, *vocab);
    std::vector<Document> out_docs;

    if (!args.challenge.empty()) {
        auto examples = read_challenge_set(args.challenge);
        auto hyps = flatten(hyp_docs);
        if (hyps.size() != examples.size())
            throw Error("hypothesis count does not match challenge set");
        Document out;
        out.id = "challenge";
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            std::vector<Sentence> ctx;
            for (const auto& c : examples[i].context) ctx.push_back(vocab->encode(c));
            out.sentences.push_back(rerank_pronouns(hyps[i], lm, ctx, pronouns, args.cap));
        }
        out_docs.push_back(std::move(out));
    } else {
        for (const auto& doc : hyp_docs) {
            Document out;
            out.id = doc.id;
            std::vector<Sentence> ctx;
            for (const auto& sent : doc.sentences) {
                Sentence fixed = rerank_pronouns(sent, lm, ctx, pronouns, args.cap);
                out.sentences.push_back(fixed);
                ctx.push_back(fixed);
                if (args.k >= 0 && ctx.size() > static_cast<std::size_t>(args.k))
                    ctx.erase(ctx.begin());
            }
            out_docs.push_back(std::move(out));
        }
    }
    write_corpus(args.out, decode_corpus(out_docs, *vocab));
    std::cout << "re-ranked pronouns in " << out_docs.size() << " documents\n";
}

struct BacktranslateArgs {
    ModelArgs models; // reverse direction: target -> source
    std::string mono, out_src;
    int beam = 4;
};

void run_backtranslate(const BacktranslateArgs& args) {
    LoadedModels m = load_models(args.models);
    auto mono_docs = read_encoded(args.mono, *m.vocab);
    auto synthetic = back_translate_docs(m.tm, mono_docs, args.beam);
    std::vector<Document> src_docs;
    for (const auto& pd : synthetic) {
        Document d;
        d.id = pd.id;
        d.sentences = pd.source;
        src_docs.push_back(std::move(d));
    }
    write_corpus(args.out_src, decode_corpus(src_docs, *m.vocab));
    std::cout << "back-translated " << mono_docs.size() << " documents\n";
}

struct PseudoDocsArgs {
    std::string src, tgt, out_src, out_tgt, vocab_path;
    std::size_t lo = 2, hi = 10;
    std::uint64_t seed = 1;
};

void run_pseudo_docs(const PseudoDocsArgs& args) {
    auto vocab = load_vocab(args.vocab_path);
    auto pairs = flatten_pairs(
        zip_parallel(read_encoded(args.src, *vocab), read_encoded(args.tgt, *vocab)));
    auto docs = make_pseudo_documents(pairs, args.lo, args.hi, args.seed);
    std::vector<Document> src_docs, tgt_docs;
    for (const auto& pd : docs) {
        src_docs.push_back({pd.id, pd.source});
        tgt_docs.push_back({pd.id, pd.target});
    }
    write_corpus(args.out_src, decode_corpus(src_docs, *vocab));
    write_corpus(args.out_tgt, decode_corpus(tgt_docs, *vocab));
    std::cout << "built " << docs.size() << " pseudo-documents from " << pairs.size()
              << " pairs\n";
}

struct CombineArgs {
    std::string authentic_src, authentic_tgt, synthetic_src, synthetic_tgt;
    std::string out_src, out_tgt, manifest, vocab_path;
};

void run_combine(const CombineArgs& args) {
    auto vocab = load_vocab(args.vocab_path);
    auto authentic = zip_parallel(read_encoded(args.authentic_src, *vocab),
                                  read_encoded(args.authentic_tgt, *vocab));
    auto synthetic = zip_parallel(read_encoded(args.synthetic_src, *vocab),
                                  read_encoded(args.synthetic_tgt, *vocab));
    CorpusBundle bundle = combine_balanced(authentic, synthetic);

    std::vector<Document> src_docs, tgt_docs;
    for (const auto& pd : bundle.combined()) {
        src_docs.push_back({pd.id, pd.source});
        tgt_docs.push_back({pd.id, pd.target});
    }
    write_corpus(args.out_src, decode_corpus(src_docs, *vocab));
    write_corpus(args.out_tgt, decode_corpus(tgt_docs, *vocab));
    if (!args.manifest.empty()) bundle.save_manifest(args.manifest, args.out_src, args.out_tgt);
    std::cout << "combined " << bundle.authentic_sentences() << " authentic + "
              << bundle.synthetic_sentences() << " synthetic sentences (repeats "
              << bundle.authentic_repeat << "/" << bundle.synthetic_repeat << ")\n";
}

struct EvaluateArgs {
    std::string hyp, ref;
    std::string categories = "er;sie;es";
    std::string keyword_hyp, keywords;
    std::string pron_hyp, pron_challenge;
    std::string report, system;
};

void run_evaluate(const EvaluateArgs& args) {
    char buf[64];
    auto print = [&](const char* key, double value) {
        std::snprintf(buf, sizeof(buf), "%-12s %.4f", key, value);
        std::cout << buf << "\n";
    };

    if (!args.hyp.empty()) {
        if (args.ref.empty()) throw Error("evaluate --hyp needs --ref");
        auto hyps = flatten_text(read_corpus(args.hyp));
        auto refs = flatten_text(read_corpus(args.ref));
        if (hyps.size() != refs.size())
            throw Error("hypothesis and reference line counts differ");

        std::vector<std::string> stream;
        for (const auto& s : hyps) stream.insert(stream.end(), s.begin(), s.end());
        for (const auto& s : refs) stream.insert(stream.end(), s.begin(), s.end());
        Vocabulary v = build_vocab({stream}, 1 << 20);
        std::vector<Sentence> ehyps, erefs;
        for (const auto& s : hyps) ehyps.push_back(v.encode(s));
        for (const auto& s : refs) erefs.push_back(v.encode(s));
        double bleu = corpus_bleu(ehyps, erefs);
        print("BLEU", bleu);

        std::vector<std::vector<std::string>> cats;
        for (const auto& set : split_list(args.categories, ';'))
            cats.push_back(split_list(set, ','));
        F1Report f1 = targeted_f1(hyps, refs, cats);
        print("pronF1", f1.f1);
        if (!args.report.empty() && !args.system.empty()) {
            update_report(args.report, args.system, "BLEU", bleu);
            update_report(args.report, args.system, "pronF1", f1.f1);
        }
    }
    if (!args.keyword_hyp.empty()) {
        auto hyps = flatten_text(read_corpus(args.keyword_hyp));
        auto examples = read_keyword_file(args.keywords);
        double acc = keyword_accuracy(hyps, examples);
        print("kwAcc", acc);
        if (!args.report.empty() && !args.system.empty())
            update_report(args.report, args.system, "kwAcc", acc);
    }
    if (!args.pron_hyp.empty()) {
        auto hyps = flatten_text(read_corpus(args.pron_hyp));
        auto examples = read_challenge_set(args.pron_challenge);
        double acc = challenge_generation_accuracy(examples, hyps);
        print("pronAcc", acc);
    }
}

struct ScoreContrastiveArgs {
    ModelArgs models;
    DecodeArgs decode;
    std::string challenge;
    std::string scorer = "fused";
    std::string report, system;
};

void run_score_contrastive(const ScoreContrastiveArgs& args) {
    LoadedModels m = load_models(args.models);
    auto examples = encode_challenge_set(read_challenge_set(args.challenge), *m.vocab);

    SequenceScorer scorer;
    if (args.scorer == "lm") {
        if (!m.has_lm) throw Error("--scorer lm needs --lm");
        const NGramLM& lm = m.lm;
        scorer = [&lm](const Sentence& s, const std::vector<Sentence>& ctx, const Sentence&) {
            return lm.score_sequence(s, ctx);
        };
    } else if (args.scorer == "tm") {
        const TranslationModel& tm = m.tm;
        scorer = [&tm](const Sentence& s, const std::vector<Sentence>& ctx,
                       const Sentence& src) {
            Sentence hist = tm.context_k() > 0 ? lm_history(ctx) : lm_history({});
            double total = 0.0;
            for (SubwordId tok : s) {
                LogDist d = tm.step_dist(hist, src);
                total += d.logp[static_cast<std::size_t>(tok)];
                hist.push_back(tok);
            }
            return total;
        };
    } else if (args.scorer == "fused") {
        if (!m.has_lm || !m.has_ilm) throw Error("--scorer fused needs --lm and --ilm");
        DecodeConfig config = make_decode_config(args.decode, *m.vocab);
        if (config.fusion == FusionMode::None)
            throw Error("--scorer fused needs a fusion mode");
        FusionModels models{&m.tm, &m.lm, &m.ilm};
        scorer = [models, config](const Sentence& s, const std::vector<Sentence>& ctx,
                                  const Sentence& src) {
            double total = 0.0;
            Sentence prefix;
            for (SubwordId tok : s) {
                LogDist d = fused_step_dist(models, config, src, ctx, prefix);
                total += d.logp[static_cast<std::size_t>(tok)];
                prefix.push_back(tok);
            }
            return total;
        };
    } else {
        throw Error("unknown scorer: " + args.scorer);
    }

    double acc = contrastive_accuracy(scorer, examples);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "contrAcc     %.4f", acc);
    std::cout << buf << "\n";
    if (!args.report.empty() && !args.system.empty())
        update_report(args.report, args.system, "contrAcc", acc);
}

struct PerplexityArgs {
    std::string lm_path, corpus;
};

void run_perplexity(const PerplexityArgs& args) {
    NGramLM lm = load_arpa(args.lm_path);
    auto docs = read_encoded(args.corpus, *lm.vocab);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "perplexity   %.6f", perplexity(lm, docs));
    std::cout << buf << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"document-level language model fusion toolkit"};
    app.require_subcommand(1);

    GenCorpusArgs gen;
    auto* cmd_gen = app.add_subcommand("gen-corpus", "generate the synthetic bilingual corpus");
    cmd_gen->add_option("--out", gen.out_dir, "output directory")->required();
    cmd_gen->add_option("--train-docs", gen.train_docs)->capture_default_str();
    cmd_gen->add_option("--valid-docs", gen.valid_docs)->capture_default_str();
    cmd_gen->add_option("--test-docs", gen.test_docs)->capture_default_str();
    cmd_gen->add_option("--mono-docs", gen.mono_docs)->capture_default_str();
    cmd_gen->add_option("--challenge", gen.challenge)->capture_default_str();
    cmd_gen->add_option("--seed", gen.seed)->capture_default_str();
    cmd_gen->add_option("--domain", gen.domain, "default|alt")->capture_default_str();

    TrainTmArgs ttm;
    auto* cmd_ttm = app.add_subcommand("train-tm", "train the translation model");
    cmd_ttm->add_option("--train-src", ttm.train_src)->required();
    cmd_ttm->add_option("--train-tgt", ttm.train_tgt)->required();
    cmd_ttm->add_option("--vocab", ttm.vocab_in, "reuse an existing vocabulary");
    cmd_ttm->add_option("--vocab-out", ttm.vocab_out, "write the shared vocabulary");
    cmd_ttm->add_option("--lexicon-out", ttm.lexicon_out)->required();
    cmd_ttm->add_option("--ngram-out", ttm.ngram_out)->required();
    cmd_ttm->add_option("--iterations", ttm.iterations)->capture_default_str();
    cmd_ttm->add_option("--order", ttm.order)->capture_default_str();
    cmd_ttm->add_option("--discount", ttm.discount)->capture_default_str();
    cmd_ttm->add_option("--doc-context", ttm.doc_context,
                        "context sentences for the target n-gram (0 = sentence-level)")
        ->capture_default_str();

    TrainLmArgs tlm;
    auto* cmd_tlm = app.add_subcommand("train-lm", "train an n-gram language model");
    cmd_tlm->add_option("--corpus", tlm.corpus)->required();
    cmd_tlm->add_option("--vocab", tlm.vocab_in)->required();
    cmd_tlm->add_option("--out", tlm.out)->required();
    cmd_tlm->add_option("--order", tlm.order)->capture_default_str();
    cmd_tlm->add_option("--discount", tlm.discount)->capture_default_str();
    cmd_tlm->add_option("--doc-context", tlm.doc_context)->capture_default_str();

    TuneGridArgs tune;
    auto* cmd_tune = app.add_subcommand("tune-grid", "grid-search static fusion scales");
    add_model_options(cmd_tune, tune.models, true);
    add_decode_options(cmd_tune, tune.decode);
    cmd_tune->add_option("--valid-src", tune.valid_src)->required();
    cmd_tune->add_option("--valid-tgt", tune.valid_tgt)->required();
    cmd_tune->add_option("--objective", tune.objective, "bleu|ce")->capture_default_str();
    cmd_tune->add_option("--scales-out", tune.scales_out)->required();
    cmd_tune->add_option("--report-out", tune.report_out, "per-grid-point scores");

    LearnScalesArgs learn;
    auto* cmd_learn = app.add_subcommand("learn-scales", "learn subword fusion scales");
    add_model_options(cmd_learn, learn.models, true);
    cmd_learn->add_option("--tuning-src", learn.tuning_src)->required();
    cmd_learn->add_option("--tuning-tgt", learn.tuning_tgt)->required();
    cmd_learn->add_option("--table-out", learn.table_out);
    cmd_learn->add_option("--scales-out", learn.scales_out, "single triple (with --tied)");
    cmd_learn->add_option("--lr", learn.lr)->capture_default_str();
    cmd_learn->add_option("--init-std", learn.init_std)->capture_default_str();
    cmd_learn->add_option("--epochs", learn.epochs)->capture_default_str();
    cmd_learn->add_option("--seed", learn.seed)->capture_default_str();
    cmd_learn->add_option("--k", learn.k)->capture_default_str();
    cmd_learn->add_flag("--tied", learn.tied, "subword-agnostic (one shared triple)");
    cmd_learn->add_flag("--unrestricted", learn.unrestricted,
                        "learn all three scales instead of l0=1, l1=l2");

    TranslateArgs tr;
    auto* cmd_tr = app.add_subcommand("translate", "decode a corpus or challenge set");
    add_model_options(cmd_tr, tr.models, false);
    add_decode_options(cmd_tr, tr.decode);
    cmd_tr->add_option("--src", tr.src, "source corpus");
    cmd_tr->add_option("--challenge", tr.challenge, "challenge set to decode instead");
    cmd_tr->add_option("--out", tr.out)->required();

    RerankArgs rr;
    auto* cmd_rr = app.add_subcommand("rerank", "document-LM pronoun re-ranking");
    cmd_rr->add_option("--hyp", rr.hyp)->required();
    cmd_rr->add_option("--vocab", rr.vocab_path)->required();
    cmd_rr->add_option("--lm", rr.lm_path)->required();
    cmd_rr->add_option("--pronouns", rr.pronouns)->capture_default_str();
    cmd_rr->add_option("--cap", rr.cap)->capture_default_str();
    cmd_rr->add_option("--k", rr.k)->capture_default_str();
    cmd_rr->add_option("--challenge", rr.challenge, "contexts from a challenge set");
    cmd_rr->add_option("--out", rr.out)->required();

    BacktranslateArgs bt;
    auto* cmd_bt = app.add_subcommand("backtranslate", "back-translate monolingual documents");
    add_model_options(cmd_bt, bt.models, false);
    cmd_bt->add_option("--mono", bt.mono)->required();
    cmd_bt->add_option("--out-src", bt.out_src)->required();
    cmd_bt->add_option("--beam", bt.beam)->capture_default_str();

    PseudoDocsArgs pd;
    auto* cmd_pd = app.add_subcommand("make-pseudo-docs", "group pairs into pseudo-documents");
    cmd_pd->add_option("--src", pd.src)->required();
    cmd_pd->add_option("--tgt", pd.tgt)->required();
    cmd_pd->add_option("--vocab", pd.vocab_path)->required();
    cmd_pd->add_option("--out-src", pd.out_src)->required();
    cmd_pd->add_option("--out-tgt", pd.out_tgt)->required();
    cmd_pd->add_option("--min", pd.lo)->capture_default_str();
    cmd_pd->add_option("--max", pd.hi)->capture_default_str();
    cmd_pd->add_option("--seed", pd.seed)->capture_default_str();

    CombineArgs cb;
    auto* cmd_cb = app.add_subcommand("combine", "balance authentic and synthetic corpora");
    cmd_cb->add_option("--authentic-src", cb.authentic_src)->required();
    cmd_cb->add_option("--authentic-tgt", cb.authentic_tgt)->required();
    cmd_cb->add_option("--synthetic-src", cb.synthetic_src)->required();
    cmd_cb->add_option("--synthetic-tgt", cb.synthetic_tgt)->required();
    cmd_cb->add_option("--vocab", cb.vocab_path)->required();
    cmd_cb->add_option("--out-src", cb.out_src)->required();
    cmd_cb->add_option("--out-tgt", cb.out_tgt)->required();
    cmd_cb->add_option("--manifest", cb.manifest);

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "BLEU, targeted F1 and challenge accuracies");
    cmd_ev->add_option("--hyp", ev.hyp);
    cmd_ev->add_option("--ref", ev.ref);
    cmd_ev->add_option("--categories", ev.categories,
                       "semicolon-separated category sets, comma-separated members")
        ->capture_default_str();
    cmd_ev->add_option("--keyword-hyp", ev.keyword_hyp);
    cmd_ev->add_option("--keywords", ev.keywords);
    cmd_ev->add_option("--pron-hyp", ev.pron_hyp);
    cmd_ev->add_option("--pron-challenge", ev.pron_challenge);
    cmd_ev->add_option("--report", ev.report, "comparison report file to update");
    cmd_ev->add_option("--system", ev.system, "system name for the report row");

    ScoreContrastiveArgs sc;
    auto* cmd_sc = app.add_subcommand("score-contrastive", "contrastive scoring accuracy");
    add_model_options(cmd_sc, sc.models, false);
    add_decode_options(cmd_sc, sc.decode);
    cmd_sc->add_option("--challenge", sc.challenge)->required();
    cmd_sc->add_option("--scorer", sc.scorer, "lm|tm|fused")->capture_default_str();
    cmd_sc->add_option("--report", sc.report);
    cmd_sc->add_option("--system", sc.system);

    PerplexityArgs px;
    auto* cmd_px = app.add_subcommand("perplexity", "LM perplexity on a corpus");
    cmd_px->add_option("--lm", px.lm_path)->required();
    cmd_px->add_option("--corpus", px.corpus)->required();

    for (auto* cmd : app.get_subcommands(nullptr))
        cmd->set_config("--config", "", "flat key=value configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage error
    }

    try {
        if (*cmd_gen) run_gen_corpus(gen);
        if (*cmd_ttm) run_train_tm(ttm);
        if (*cmd_tlm) run_train_lm(tlm);
        if (*cmd_tune) run_tune_grid(tune);
        if (*cmd_learn) run_learn_scales(learn);
        if (*cmd_tr) run_translate(tr);
        if (*cmd_rr) run_rerank(rr);
        if (*cmd_bt) run_backtranslate(bt);
        if (*cmd_pd) run_pseudo_docs(pd);
        if (*cmd_cb) run_combine(cb);
        if (*cmd_ev) run_evaluate(ev);
        if (*cmd_sc) run_score_contrastive(sc);
        if (*cmd_px) run_perplexity(px);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2; // data error
    }
    return 0;
}
