#include "docfuse/backtranslation.hpp"

#include <fstream>
#include <numeric>

#include "docfuse/rng.hpp"

namespace docfuse {

std::vector<ParallelDocument> back_translate_docs(const TranslationModel& reverse_tm,
                                                  const std::vector<Document>& mono_docs,
                                                  int beam_size) {
    FusionModels models;
    models.tm = &reverse_tm;
    DecodeConfig config;
    config.beam_size = beam_size;
    config.fusion = FusionMode::None;
    config.context_k = 0; // sentence-level reverse system

    std::vector<ParallelDocument> out;
    out.reserve(mono_docs.size());
    for (const auto& doc : mono_docs) {
        ParallelDocument pd;
        pd.id = doc.id;
        pd.target = doc.sentences;
        pd.source.reserve(doc.sentences.size());
        for (const auto& target_sent : doc.sentences)
            pd.source.push_back(beam_decode(models, config, target_sent, {}).tokens);
        out.push_back(std::move(pd));
    }
    return out;
}

std::vector<ParallelDocument> make_pseudo_documents(const std::vector<SentencePair>& pairs,
                                                    std::size_t lo, std::size_t hi,
                                                    std::uint64_t seed) {
    if (lo < 1 || lo > hi) throw Error("invalid pseudo-document length range");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<ParallelDocument> docs;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t len = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
        len = std::min(len, order.size() - i);
        ParallelDocument d;
        d.id = "pseudo" + std::to_string(docs.size());
        for (std::size_t j = 0; j < len; ++j) {
            const SentencePair& p = pairs[order[i + j]];
            d.source.push_back(p.source);
            d.target.push_back(p.target);
        }
        docs.push_back(std::move(d));
        i += len;
    }
    return docs;
}

namespace {

std::size_t sentence_count(const std::vector<ParallelDocument>& docs) {
    std::size_t n = 0;
    for (const auto& d : docs) n += d.target.size();
    return n;
}

/// Repeats docs ceil(target/count) times, then drops trailing documents
/// while the count stays >= target.
std::vector<ParallelDocument> oversample(const std::vector<ParallelDocument>& docs,
                                         std::size_t target, std::size_t& repeat_out) {
    std::size_t count = sentence_count(docs);
    std::size_t repeat = (target + count - 1) / count;
    repeat_out = repeat;
    std::vector<ParallelDocument> out;
    out.reserve(docs.size() * repeat);
    for (std::size_t r = 0; r < repeat; ++r)
        for (const auto& d : docs) {
            ParallelDocument copy = d;
            if (r > 0) copy.id = d.id + "+rep" + std::to_string(r);
            out.push_back(std::move(copy));
        }
    std::size_t total = count * repeat;
    while (!out.empty() && total - out.back().target.size() >= target) {
        total -= out.back().target.size();
        out.pop_back();
    }
    return out;
}

} // namespace

std::vector<ParallelDocument> CorpusBundle::combined() const {
    std::vector<ParallelDocument> out = authentic;
    out.insert(out.end(), synthetic.begin(), synthetic.end());
    return out;
}

std::size_t CorpusBundle::authentic_sentences() const { return sentence_count(authentic); }
std::size_t CorpusBundle::synthetic_sentences() const { return sentence_count(synthetic); }

void CorpusBundle::save_manifest(const std::string& path, const std::string& authentic_path,
                                 const std::string& synthetic_path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write bundle manifest: " + path);
    f << "docfuse-bundle 1\n";
    f << "authentic\t" << authentic_path << '\t' << authentic_repeat << '\n';
    f << "synthetic\t" << synthetic_path << '\t' << synthetic_repeat << '\n';
}

CorpusBundle combine_balanced(const std::vector<ParallelDocument>& authentic,
                              const std::vector<ParallelDocument>& synthetic) {
    if (authentic.empty() || synthetic.empty())
        throw Error("combine_balanced: both parts must be nonempty");
    std::size_t na = sentence_count(authentic);
    std::size_t ns = sentence_count(synthetic);
    CorpusBundle bundle;
    if (na < ns) {
        bundle.authentic = oversample(authentic, ns, bundle.authentic_repeat);
        bundle.synthetic = synthetic;
    } else if (ns < na) {
        bundle.synthetic = oversample(synthetic, na, bundle.synthetic_repeat);
        bundle.authentic = authentic;
    } else {
        bundle.authentic = authentic;
        bundle.synthetic = synthetic;
    }
    return bundle;
}

} // namespace docfuse
