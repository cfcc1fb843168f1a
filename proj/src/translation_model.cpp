#include "docfuse/translation_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace docfuse {

double Lexicon::prob(SubwordId source, SubwordId target) const {
    auto row = table.find(source);
    if (row == table.end()) return 0.0;
    auto it = row->second.find(target);
    return it == row->second.end() ? 0.0 : it->second;
}

bool Lexicon::has_source(SubwordId source) const { return table.count(source) > 0; }

void Lexicon::save(const std::string& path, const Vocabulary& vocab, double floor) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write lexicon file: " + path);
    f << "docfuse-lexicon 1\n";

    std::vector<SubwordId> sources;
    sources.reserve(table.size());
    for (const auto& [src, row] : table) {
        (void)row;
        sources.push_back(src);
    }
    std::sort(sources.begin(), sources.end(), [&](SubwordId a, SubwordId b) {
        return vocab.decode(a) < vocab.decode(b);
    });

    char buf[64];
    for (SubwordId src : sources) {
        const auto& row = table.at(src);
        double kept_mass = 0.0;
        std::vector<std::pair<SubwordId, double>> kept;
        kept.reserve(row.size());
        for (const auto& [tgt, p] : row) {
            if (p < floor) continue;
            kept.push_back({tgt, p});
            kept_mass += p;
        }
        if (kept.empty() || kept_mass <= 0.0) continue;
        for (auto& [tgt, p] : kept) {
            (void)tgt;
            p /= kept_mass;
        }
        std::sort(kept.begin(), kept.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return vocab.decode(a.first) < vocab.decode(b.first);
        });
        for (const auto& [tgt, p] : kept) {
            std::snprintf(buf, sizeof(buf), "%.9f", p);
            f << vocab.decode(src) << '\t' << vocab.decode(tgt) << '\t' << buf << '\n';
        }
    }
}

Lexicon Lexicon::load(const std::string& path, const Vocabulary& vocab) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read lexicon file: " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line) || line != "docfuse-lexicon 1")
        throw ParseError(path, 1, "expected header 'docfuse-lexicon 1'");
    lineno = 1;

    Lexicon lex;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(path, lineno, "expected 'source<TAB>target<TAB>prob'");
        std::string src = line.substr(0, t1);
        std::string tgt = line.substr(t1 + 1, t2 - t1 - 1);
        double p = 0.0;
        try {
            std::size_t used = 0;
            p = std::stod(line.substr(t2 + 1), &used);
            if (used != line.size() - t2 - 1) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw ParseError(path, lineno, "bad probability value");
        }
        if (p < 0.0 || p > 1.0 || std::isnan(p))
            throw ParseError(path, lineno, "probability out of range");
        if (!vocab.contains(src))
            throw ParseError(path, lineno, "source token not in vocabulary: " + src);
        if (!vocab.contains(tgt))
            throw ParseError(path, lineno, "target token not in vocabulary: " + tgt);
        lex.table[vocab.lookup(src)][vocab.lookup(tgt)] = p;
    }
    // restore exact row normalization lost to the 9-decimal rounding
    for (auto& [src, row] : lex.table) {
        (void)src;
        double mass = 0.0;
        for (const auto& [tgt, p] : row) {
            (void)tgt;
            mass += p;
        }
        if (mass <= 0.0) throw Error("lexicon row with zero mass in " + path);
        for (auto& [tgt, p] : row) {
            (void)tgt;
            p /= mass;
        }
    }
    return lex;
}

Ibm1Result train_ibm1(const std::vector<SentencePair>& pairs, const Ibm1Options& opts) {
    if (pairs.empty()) throw Error("empty parallel data");
    if (opts.iterations < 1) throw Error("iterations must be >= 1");

    // uniform initialization over co-occurring targets
    Lexicon lex;
    {
        std::unordered_map<SubwordId, std::unordered_map<SubwordId, bool>> cooc;
        for (const auto& pair : pairs)
            for (SubwordId fw : pair.source)
                for (SubwordId ew : pair.target) cooc[fw][ew] = true;
        for (const auto& [fw, row] : cooc) {
            double u = 1.0 / static_cast<double>(row.size());
            auto& out = lex.table[fw];
            for (const auto& [ew, flag] : row) {
                (void)flag;
                out[ew] = u;
            }
        }
    }

    Ibm1Result result;
    for (int it = 0; it < opts.iterations; ++it) {
        // training-set log-likelihood under the current table (the constant
        // alignment-count factor is omitted; monotonicity is unaffected)
        double ll = 0.0;
        std::unordered_map<SubwordId, std::unordered_map<SubwordId, double>> expected;
        for (const auto& pair : pairs) {
            for (SubwordId ew : pair.target) {
                double denom = 0.0;
                for (SubwordId fw : pair.source) denom += lex.prob(fw, ew);
                if (denom <= 0.0) continue; // empty source side
                ll += std::log(denom / static_cast<double>(pair.source.size()));
                for (SubwordId fw : pair.source) {
                    double w = lex.prob(fw, ew) / denom;
                    if (w > 0.0) expected[fw][ew] += w;
                }
            }
        }
        result.log_likelihood.push_back(ll);

        for (auto& [fw, row] : expected) {
            double total = 0.0;
            for (const auto& [ew, c] : row) {
                (void)ew;
                total += c;
            }
            auto& out = lex.table[fw];
            out.clear();
            for (const auto& [ew, c] : row) out[ew] = c / total;
        }
    }
    result.lexicon = std::move(lex);
    return result;
}

LogDist TranslationModel::step_dist(const Sentence& history, const Sentence& source) const {
    const std::size_t vsize = vocab->size();
    LogDist ng = target_ngram.cond_logdist(history);
    if (mix <= 0.0) return ng; // pure internal LM, bit-exact

    std::vector<double> p(vsize, 0.0);
    if (mix > 0.0) {
        if (source.empty()) {
            // degenerate pure-ngram step; the mix mass falls to uniform
            for (double& x : p) x = mix / static_cast<double>(vsize);
        } else {
            double inv = mix / static_cast<double>(source.size());
            double unif = 1.0 / static_cast<double>(vsize);
            for (SubwordId fw : source) {
                auto row = lexicon.table.find(fw);
                if (row == lexicon.table.end()) {
                    // unseen source token contributes a uniform share
                    for (double& x : p) x += inv * unif;
                } else {
                    for (const auto& [ew, tp] : row->second)
                        p[static_cast<std::size_t>(ew)] += inv * tp;
                }
            }
        }
    }
    double ng_w = 1.0 - mix;
    for (std::size_t i = 0; i < vsize; ++i) p[i] += ng_w * std::exp(ng.logp[i]);

    LogDist d;
    d.logp.resize(vsize);
    for (std::size_t i = 0; i < vsize; ++i)
        d.logp[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
    normalize(d);
    return d;
}

LogDist tm_step_dist(const TranslationModel& tm, const Sentence& history,
                     const Sentence& source) {
    if (tm.vocab->size() != tm.target_ngram.vocab_size())
        throw Error("translation model and n-gram component disagree on vocabulary size");
    return tm.step_dist(history, source);
}

NGramLM estimate_ilm_separate(const std::vector<Sentence>& target_side,
                              std::shared_ptr<const Vocabulary> vocab, int order,
                              double discount) {
    TrainOptions opts;
    opts.order = order;
    opts.discount = discount;
    opts.context_k = 0;
    return train_ngram_sequences(target_side, std::move(vocab), opts);
}

} // namespace docfuse
