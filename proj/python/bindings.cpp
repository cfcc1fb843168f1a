#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "docfuse/backtranslation.hpp"
#include "docfuse/bpe.hpp"
#include "docfuse/corpus_io.hpp"
#include "docfuse/decoder.hpp"
#include "docfuse/eval.hpp"
#include "docfuse/ngram.hpp"
#include "docfuse/scale_tuning.hpp"
#include "docfuse/syncorpus.hpp"
#include "docfuse/translation_model.hpp"
#include "docfuse/vocab.hpp"

namespace py = pybind11;
using namespace docfuse;

namespace {

FusionModels make_models(const TranslationModel& tm, const NGramLM* lm, const NGramLM* ilm) {
    return FusionModels{&tm, lm, ilm};
}

} // namespace

PYBIND11_MODULE(_docfuse, m) {
    m.doc() = "document-level language model fusion toolkit";

    py::register_exception<Error>(m, "DocfuseError");

    py::class_<Vocabulary, std::shared_ptr<Vocabulary>>(m, "Vocabulary")
        .def(py::init<>())
        .def("add", &Vocabulary::add)
        .def("lookup", &Vocabulary::lookup)
        .def("contains", &Vocabulary::contains)
        .def("size", &Vocabulary::size)
        .def("decode_id", [](const Vocabulary& v, SubwordId id) { return v.decode(id); })
        .def("encode", &Vocabulary::encode)
        .def("decode",
             [](const Vocabulary& v, const Sentence& s) { return v.decode(s); })
        .def("save", &Vocabulary::save)
        .def_static("load", &Vocabulary::load)
        .def_property_readonly_static("BOS", [](py::object) { return Vocabulary::kBos; })
        .def_property_readonly_static("EOS", [](py::object) { return Vocabulary::kEos; })
        .def_property_readonly_static("SEP", [](py::object) { return Vocabulary::kSep; })
        .def_property_readonly_static("UNK", [](py::object) { return Vocabulary::kUnk; });

    m.def("build_vocab", &build_vocab, py::arg("corpora"), py::arg("max_size"));

    py::class_<Document>(m, "Document")
        .def(py::init<>())
        .def_readwrite("id", &Document::id)
        .def_readwrite("sentences", &Document::sentences);

    py::class_<LogDist>(m, "LogDist")
        .def_readonly("logp", &LogDist::logp)
        .def("__len__", &LogDist::size);

    m.def("logsumexp", &logsumexp);

    // BPE
    py::class_<MergeTable>(m, "MergeTable")
        .def(py::init<>())
        .def_readwrite("merges", &MergeTable::merges)
        .def("__len__", &MergeTable::size);
    m.def("bpe_learn", &bpe_learn, py::arg("corpus"), py::arg("num_merges"));
    m.def("bpe_apply", &bpe_apply, py::arg("word"), py::arg("merges"));
    m.def("bpe_join", &bpe_join);

    // n-gram LM
    py::class_<TrainOptions>(m, "TrainOptions")
        .def(py::init<>())
        .def_readwrite("order", &TrainOptions::order)
        .def_readwrite("discount", &TrainOptions::discount)
        .def_readwrite("context_k", &TrainOptions::context_k)
        .def_readwrite("sentence_markers", &TrainOptions::sentence_markers);

    py::class_<NGramLM>(m, "NGramLM")
        .def_readonly("order", &NGramLM::order)
        .def_readonly("context_k", &NGramLM::context_k)
        .def("vocab_size", &NGramLM::vocab_size)
        .def("prob", &NGramLM::prob)
        .def("cond_logdist", &NGramLM::cond_logdist)
        .def("score_sequence", &NGramLM::score_sequence);

    m.def("train_ngram", &train_ngram, py::arg("corpus"), py::arg("vocab"), py::arg("options"));
    m.def("train_ngram_sequences", &train_ngram_sequences, py::arg("sequences"),
          py::arg("vocab"), py::arg("options"));
    m.def("perplexity", &perplexity);
    m.def("save_arpa", &save_arpa);
    m.def("load_arpa", &load_arpa);
    m.def("lm_history", &lm_history);

    // translation model
    py::class_<Lexicon>(m, "Lexicon")
        .def(py::init<>())
        .def("prob", &Lexicon::prob)
        .def("save", &Lexicon::save, py::arg("path"), py::arg("vocab"),
             py::arg("floor") = 1e-9)
        .def_static("load", &Lexicon::load);

    py::class_<Ibm1Result>(m, "Ibm1Result")
        .def_readonly("lexicon", &Ibm1Result::lexicon)
        .def_readonly("log_likelihood", &Ibm1Result::log_likelihood);

    m.def(
        "train_ibm1",
        [](const std::vector<std::pair<Sentence, Sentence>>& pairs, int iterations) {
            std::vector<SentencePair> sp;
            for (const auto& [f, e] : pairs) sp.push_back({f, e});
            return train_ibm1(sp, {iterations});
        },
        py::arg("pairs"), py::arg("iterations") = 5);

    py::class_<TranslationModel>(m, "TranslationModel")
        .def(py::init<>())
        .def_readwrite("lexicon", &TranslationModel::lexicon)
        .def_readwrite("target_ngram", &TranslationModel::target_ngram)
        .def_readwrite("mix", &TranslationModel::mix)
        .def_readwrite("vocab", &TranslationModel::vocab)
        .def("step_dist", &TranslationModel::step_dist)
        .def("exact_internal_lm", &TranslationModel::exact_internal_lm,
             py::return_value_policy::reference_internal);

    m.def("estimate_ilm_separate", &estimate_ilm_separate, py::arg("target_side"),
          py::arg("vocab"), py::arg("order"), py::arg("discount") = 0.75);

    // fusion
    py::class_<FusionScales>(m, "FusionScales")
        .def(py::init<>())
        .def(py::init([](double l0, double l1, double l2) {
                 return FusionScales{l0, l1, l2};
             }),
             py::arg("l0"), py::arg("l1"), py::arg("l2"))
        .def_readwrite("l0", &FusionScales::l0)
        .def_readwrite("l1", &FusionScales::l1)
        .def_readwrite("l2", &FusionScales::l2);

    py::class_<ScaleGrid>(m, "ScaleGrid")
        .def_readwrite("values", &ScaleGrid::values)
        .def_readwrite("restricted", &ScaleGrid::restricted)
        .def("triples", &ScaleGrid::triples);
    m.def("restricted_grid", &restricted_grid, py::arg("step") = 0.1);
    m.def("full_grid", &full_grid, py::arg("step") = 0.1);

    m.def("fuse_step", &fuse_step);
    m.def("fuse_step_context_delta", &fuse_step_context_delta);
    py::class_<OnTheFlyResult>(m, "OnTheFlyResult")
        .def_readonly("score", &OnTheFlyResult::score)
        .def_readonly("chosen", &OnTheFlyResult::chosen);
    m.def("on_the_fly_step", &on_the_fly_step);

    // decoding
    py::enum_<FusionMode>(m, "FusionMode")
        .value("NONE", FusionMode::None)
        .value("STATIC", FusionMode::Static)
        .value("CONTEXT_DELTA", FusionMode::ContextDelta)
        .value("ON_THE_FLY", FusionMode::OnTheFly)
        .value("LEARNED", FusionMode::Learned);

    py::class_<DecodeConfig>(m, "DecodeConfig")
        .def(py::init<>())
        .def_readwrite("beam_size", &DecodeConfig::beam_size)
        .def_readwrite("length_norm_alpha", &DecodeConfig::length_norm_alpha)
        .def_readwrite("fusion", &DecodeConfig::fusion)
        .def_readwrite("scales", &DecodeConfig::scales)
        .def_readwrite("grid", &DecodeConfig::grid)
        .def_readwrite("table", &DecodeConfig::table)
        .def_readwrite("context_k", &DecodeConfig::context_k);

    py::class_<DecodeResult>(m, "DecodeResult")
        .def_readonly("tokens", &DecodeResult::tokens)
        .def_readonly("score", &DecodeResult::score)
        .def_readonly("normalized_score", &DecodeResult::normalized_score)
        .def_readonly("reached_max_len", &DecodeResult::reached_max_len);

    m.def(
        "beam_decode",
        [](const TranslationModel& tm, const NGramLM* lm, const NGramLM* ilm,
           const DecodeConfig& config, const Sentence& source,
           const std::vector<Sentence>& context) {
            return beam_decode(make_models(tm, lm, ilm), config, source, context);
        },
        py::arg("tm"), py::arg("lm") = nullptr, py::arg("ilm") = nullptr, py::arg("config"),
        py::arg("source"), py::arg("context") = std::vector<Sentence>{});

    m.def(
        "decode_document",
        [](const TranslationModel& tm, const NGramLM* lm, const NGramLM* ilm,
           const DecodeConfig& config, const Document& doc) {
            return decode_document(make_models(tm, lm, ilm), config, doc);
        },
        py::arg("tm"), py::arg("lm") = nullptr, py::arg("ilm") = nullptr, py::arg("config"),
        py::arg("doc"));

    m.def("rerank_pronouns", &rerank_pronouns, py::arg("hyp"), py::arg("doc_lm"),
          py::arg("context"), py::arg("pronoun_set"), py::arg("cap") = 81);

    // metrics
    m.def("corpus_bleu", &corpus_bleu, py::arg("hyps"), py::arg("refs"),
          py::arg("smooth_eps") = 0.0);
    py::class_<F1Report>(m, "F1Report")
        .def_readonly("precision", &F1Report::precision)
        .def_readonly("recall", &F1Report::recall)
        .def_readonly("f1", &F1Report::f1)
        .def_readonly("no_targets", &F1Report::no_targets);
    m.def("targeted_f1", &targeted_f1);
    m.def("keyword_accuracy",
          [](const std::vector<std::vector<std::string>>& hyps,
             const std::vector<std::tuple<std::string, std::vector<std::string>,
                                          std::vector<std::string>>>& examples) {
              std::vector<KeywordExample> kex;
              for (const auto& [id, correct, incorrect] : examples)
                  kex.push_back({id, correct, incorrect});
              return keyword_accuracy(hyps, kex);
          });

    // synthetic corpus
    py::enum_<Gender>(m, "Gender")
        .value("MASC", Gender::Masc)
        .value("FEM", Gender::Fem)
        .value("NEUT", Gender::Neut);

    py::class_<GrammarSpec>(m, "GrammarSpec")
        .def_static("defaults", &GrammarSpec::defaults)
        .def_static("alt_domain", &GrammarSpec::alt_domain)
        .def_readwrite("seed", &GrammarSpec::seed)
        .def_readwrite("pronoun_rate", &GrammarSpec::pronoun_rate)
        .def("majority_gender_rate", &GrammarSpec::majority_gender_rate);

    py::class_<GeneratedCorpus>(m, "GeneratedCorpus")
        .def_readonly("parallel_src", &GeneratedCorpus::parallel_src)
        .def_readonly("parallel_tgt", &GeneratedCorpus::parallel_tgt)
        .def_readonly("mono_tgt", &GeneratedCorpus::mono_tgt)
        .def_readonly("manifest", &GeneratedCorpus::manifest);

    py::class_<TextDocument>(m, "TextDocument")
        .def_readonly("id", &TextDocument::id)
        .def_readonly("sentences", &TextDocument::sentences);

    m.def("generate", &generate, py::arg("spec"), py::arg("n_parallel_docs"),
          py::arg("n_mono_docs"), py::arg("n_challenge"));
}
