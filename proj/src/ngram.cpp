#include "docfuse/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "docfuse/corpus_io.hpp"

namespace docfuse {

namespace {

std::string pack_key(const SubwordId* ids, std::size_t n) {
    std::string key(n * sizeof(SubwordId), '\0');
    if (n) std::memcpy(key.data(), ids, n * sizeof(SubwordId));
    return key;
}

std::vector<SubwordId> unpack_key(const std::string& key) {
    std::vector<SubwordId> ids(key.size() / sizeof(SubwordId));
    if (!ids.empty()) std::memcpy(ids.data(), key.data(), key.size());
    return ids;
}

struct CountEntry {
    std::size_t total = 0;
    std::map<SubwordId, std::size_t> counts; // ordered for deterministic builds
};

} // namespace

const double* NGramLM::ContextEntry::find(SubwordId id) const {
    auto it = std::lower_bound(probs.begin(), probs.end(), id,
                               [](const auto& a, SubwordId b) { return a.first < b; });
    if (it != probs.end() && it->first == id) return &it->second;
    return nullptr;
}

double NGramLM::prob(const Sentence& history, SubwordId token) const {
    std::size_t ctx_len =
        std::min<std::size_t>(history.size(), static_cast<std::size_t>(order - 1));
    const SubwordId* h = history.data() + history.size() - ctx_len;
    double bow_product = 1.0;
    for (std::size_t l = ctx_len; l >= 1; --l) {
        auto it = levels[l].find(pack_key(h + ctx_len - l, l));
        if (it == levels[l].end()) continue;
        if (const double* p = it->second.find(token)) return bow_product * *p;
        bow_product *= it->second.bow;
    }
    return bow_product * unigram[static_cast<std::size_t>(token)];
}

LogDist NGramLM::cond_logdist(const Sentence& history) const {
    std::size_t ctx_len =
        std::min<std::size_t>(history.size(), static_cast<std::size_t>(order - 1));
    const SubwordId* h = history.data() + history.size() - ctx_len;

    // stack levels from the shortest context up; a stored probability
    // overrides the backed-off value, matching prob() exactly
    std::vector<double> p = unigram;
    for (std::size_t l = 1; l <= ctx_len; ++l) {
        auto it = levels[l].find(pack_key(h + ctx_len - l, l));
        if (it == levels[l].end()) continue;
        const ContextEntry& e = it->second;
        for (double& x : p) x *= e.bow;
        for (const auto& [id, sp] : e.probs) p[static_cast<std::size_t>(id)] = sp;
    }

    LogDist d;
    d.logp.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) d.logp[i] = std::log(p[i]);
    return d;
}

double NGramLM::score_sequence(const Sentence& sentence,
                               const std::vector<Sentence>& context) const {
    Sentence hist = lm_history(context);
    double total = 0.0;
    for (SubwordId tok : sentence) {
        total += std::log(prob(hist, tok));
        hist.push_back(tok);
    }
    return total;
}

double NGramLM::score_sequence_with_eos(const Sentence& sentence,
                                        const std::vector<Sentence>& context) const {
    Sentence hist = lm_history(context);
    double total = 0.0;
    for (SubwordId tok : sentence) {
        total += std::log(prob(hist, tok));
        hist.push_back(tok);
    }
    total += std::log(prob(hist, Vocabulary::kEos));
    return total;
}

Sentence lm_history(const std::vector<Sentence>& context) {
    Sentence hist;
    hist.push_back(Vocabulary::kBos);
    for (const auto& c : context) {
        hist.insert(hist.end(), c.begin(), c.end());
        hist.push_back(Vocabulary::kSep);
    }
    return hist;
}

namespace {

NGramLM build_from_counts(std::vector<std::unordered_map<std::string, CountEntry>>& counts,
                          std::shared_ptr<const Vocabulary> vocab, const TrainOptions& opts) {
    const std::size_t vsize = vocab->size();
    const double D = opts.discount;

    NGramLM lm;
    lm.order = opts.order;
    lm.discount = D;
    lm.context_k = std::max(0, opts.context_k);
    lm.vocab = vocab;
    lm.levels.resize(static_cast<std::size_t>(opts.order));

    const CountEntry& uni = counts[0][std::string()];
    if (uni.total == 0) throw Error("empty corpus");
    double n_total = static_cast<double>(uni.total);
    double distinct = static_cast<double>(uni.counts.size());
    double bow1 = D * distinct / n_total;
    lm.unigram.assign(vsize, bow1 / static_cast<double>(vsize));
    for (const auto& [id, c] : uni.counts)
        lm.unigram[static_cast<std::size_t>(id)] += (static_cast<double>(c) - D) / n_total;

    for (std::size_t l = 1; l < static_cast<std::size_t>(opts.order); ++l) {
        for (const auto& [key, ce] : counts[l]) {
            NGramLM::ContextEntry entry;
            double total = static_cast<double>(ce.total);
            entry.bow = D * static_cast<double>(ce.counts.size()) / total;
            entry.probs.reserve(ce.counts.size());
            std::vector<SubwordId> ctx = unpack_key(key);
            Sentence lower(ctx.begin() + 1, ctx.end());
            for (const auto& [id, c] : ce.counts) {
                double p = (static_cast<double>(c) - D) / total + entry.bow * lm.prob(lower, id);
                entry.probs.push_back({id, p});
            }
            lm.levels[l].emplace(key, std::move(entry));
        }
    }
    return lm;
}

} // namespace

NGramLM train_ngram_sequences(const std::vector<Sentence>& sequences,
                              std::shared_ptr<const Vocabulary> vocab,
                              const TrainOptions& opts) {
    if (opts.order < 1) throw Error("order must be >= 1");
    if (opts.discount <= 0.0 || opts.discount >= 1.0)
        throw Error("discount must be in (0, 1)");

    std::vector<std::unordered_map<std::string, CountEntry>> counts(
        static_cast<std::size_t>(opts.order));
    bool any = false;
    for (const auto& seq : sequences) {
        Sentence t;
        if (opts.sentence_markers) {
            t.reserve(seq.size() + 2);
            t.push_back(Vocabulary::kBos);
            t.insert(t.end(), seq.begin(), seq.end());
            t.push_back(Vocabulary::kEos);
        } else {
            t = seq;
        }
        std::size_t start = opts.sentence_markers ? 1 : 0;
        for (std::size_t p = start; p < t.size(); ++p) {
            any = true;
            std::size_t max_l =
                std::min<std::size_t>(p, static_cast<std::size_t>(opts.order - 1));
            for (std::size_t l = 0; l <= max_l; ++l) {
                CountEntry& ce = counts[l][pack_key(t.data() + p - l, l)];
                ce.total += 1;
                ce.counts[t[p]] += 1;
            }
        }
    }
    if (!any) throw Error("empty corpus");
    return build_from_counts(counts, std::move(vocab), opts);
}

NGramLM train_ngram(const std::vector<Document>& corpus,
                    std::shared_ptr<const Vocabulary> vocab, const TrainOptions& opts) {
    std::vector<Sentence> sequences;
    for (const auto& doc : corpus) {
        for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
            if (opts.context_k > 0) {
                std::size_t k = static_cast<std::size_t>(opts.context_k);
                std::size_t lo = i > k ? i - k : 0;
                Sentence seq;
                for (std::size_t j = lo; j < i; ++j) {
                    seq.insert(seq.end(), doc.sentences[j].begin(), doc.sentences[j].end());
                    seq.push_back(Vocabulary::kSep);
                }
                seq.insert(seq.end(), doc.sentences[i].begin(), doc.sentences[i].end());
                sequences.push_back(std::move(seq));
            } else {
                sequences.push_back(doc.sentences[i]);
            }
        }
    }
    return train_ngram_sequences(sequences, std::move(vocab), opts);
}

double perplexity(const NGramLM& lm, const std::vector<Document>& corpus) {
    double total = 0.0;
    std::size_t n_tokens = 0;
    bool any = false;
    for (const auto& doc : corpus) {
        for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
            any = true;
            std::vector<Sentence> ctx;
            if (lm.context_k > 0) {
                std::size_t k = static_cast<std::size_t>(lm.context_k);
                std::size_t lo = i > k ? i - k : 0;
                ctx.assign(doc.sentences.begin() + static_cast<std::ptrdiff_t>(lo),
                           doc.sentences.begin() + static_cast<std::ptrdiff_t>(i));
            }
            total += lm.score_sequence_with_eos(doc.sentences[i], ctx);
            n_tokens += doc.sentences[i].size() + 1;
        }
    }
    if (!any) throw Error("empty corpus");
    return std::exp(-total / static_cast<double>(n_tokens));
}

// ---------------------------------------------------------------------------
// ARPA persistence
// ---------------------------------------------------------------------------

void save_arpa(const NGramLM& lm, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write ARPA file: " + path);
    f.precision(8);
    f << std::fixed;

    const double log10e = 1.0 / std::log(10.0);
    auto log10p = [&](double p) { return std::log(p) * log10e; };

    std::size_t n = static_cast<std::size_t>(lm.order);
    std::vector<std::vector<std::pair<std::vector<SubwordId>, double>>> grams(n + 1);
    for (std::size_t w = 0; w < lm.vocab_size(); ++w)
        grams[1].push_back({{static_cast<SubwordId>(w)}, lm.unigram[w]});
    for (std::size_t l = 1; l < n; ++l) {
        for (const auto& [key, entry] : lm.levels[l]) {
            std::vector<SubwordId> ctx = unpack_key(key);
            for (const auto& [id, p] : entry.probs) {
                std::vector<SubwordId> gram = ctx;
                gram.push_back(id);
                grams[l + 1].push_back({std::move(gram), p});
            }
        }
        std::sort(grams[l + 1].begin(), grams[l + 1].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    f << "docfuse-arpa 1\n";
    f << "context-k\t" << lm.context_k << "\n\n";
    f << "\\data\\\n";
    for (std::size_t o = 1; o <= n; ++o)
        f << "ngram " << o << "=" << grams[o].size() << "\n";

    for (std::size_t o = 1; o <= n; ++o) {
        f << "\n\\" << o << "-grams:\n";
        for (const auto& [gram, p] : grams[o]) {
            f << log10p(p) << '\t';
            for (std::size_t i = 0; i < gram.size(); ++i) {
                if (i) f << ' ';
                f << lm.vocab->decode(gram[i]);
            }
            if (o < n) {
                auto it = lm.levels[o].find(pack_key(gram.data(), gram.size()));
                if (it != lm.levels[o].end()) f << '\t' << log10p(it->second.bow);
            }
            f << '\n';
        }
    }
    f << "\n\\end\\\n";
}

NGramLM load_arpa(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read ARPA file: " + path);
    std::string line;
    std::size_t lineno = 0;
    // skips blank lines; returns false (line cleared) at end of file
    auto next_line = [&]() -> bool {
        while (std::getline(f, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        line.clear();
        return false;
    };
    auto require_line = [&](const char* what) {
        if (!next_line()) throw ParseError(path, lineno, std::string("unexpected end of file, expected ") + what);
    };

    require_line("header");
    if (line != "docfuse-arpa 1")
        throw ParseError(path, lineno, "expected header 'docfuse-arpa 1'");
    require_line("context-k line");
    if (line.rfind("context-k\t", 0) != 0)
        throw ParseError(path, lineno, "expected 'context-k' line");
    int context_k = 0;
    try {
        context_k = std::stoi(line.substr(std::strlen("context-k\t")));
    } catch (const std::exception&) {
        throw ParseError(path, lineno, "bad context-k value");
    }

    require_line("\\data\\ section");
    if (line != "\\data\\") throw ParseError(path, lineno, "expected \\data\\ section");
    std::vector<std::size_t> declared;
    while (true) {
        require_line("ngram counts or section marker");
        if (line.rfind("ngram ", 0) != 0) break;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "bad ngram count line");
        std::size_t o = 0, cnt = 0;
        try {
            o = static_cast<std::size_t>(std::stoul(line.substr(6, eq - 6)));
            cnt = static_cast<std::size_t>(std::stoul(line.substr(eq + 1)));
        } catch (const std::exception&) {
            throw ParseError(path, lineno, "bad ngram count line");
        }
        if (o != declared.size() + 1)
            throw ParseError(path, lineno, "ngram orders must be consecutive from 1");
        declared.push_back(cnt);
    }
    if (declared.empty()) throw ParseError(path, lineno, "no ngram counts declared");

    NGramLM lm;
    lm.order = static_cast<int>(declared.size());
    lm.context_k = context_k;
    lm.levels.resize(declared.size());
    auto vocab = std::make_shared<Vocabulary>();

    std::size_t n = declared.size();
    std::vector<double> uni_probs;
    for (std::size_t o = 1; o <= n; ++o) {
        std::string marker = "\\" + std::to_string(o) + "-grams:";
        if (line != marker) throw ParseError(path, lineno, "expected section " + marker);
        std::size_t seen = 0;
        while (next_line() && line[0] != '\\') {
            ++seen;
            std::vector<std::string> fields;
            std::size_t start = 0;
            while (true) {
                std::size_t tab = line.find('\t', start);
                fields.push_back(line.substr(start, tab == std::string::npos
                                                        ? std::string::npos
                                                        : tab - start));
                if (tab == std::string::npos) break;
                start = tab + 1;
            }
            if (fields.size() < 2 || fields.size() > 3)
                throw ParseError(path, lineno, "expected 2 or 3 tab-separated fields");
            double logp = 0.0, logbow = 0.0;
            bool has_bow = fields.size() == 3;
            try {
                logp = std::stod(fields[0]);
                if (has_bow) logbow = std::stod(fields[2]);
            } catch (const std::exception&) {
                throw ParseError(path, lineno, "bad numeric field");
            }
            std::vector<std::string> toks = split_tokens(fields[1]);
            if (toks.size() != o)
                throw ParseError(path, lineno, "expected " + std::to_string(o) + " tokens");
            std::vector<SubwordId> ids;
            ids.reserve(o);
            if (o == 1) {
                SubwordId id;
                if (seen <= 4) {
                    id = static_cast<SubwordId>(seen - 1);
                    if (toks[0] != vocab->decode(id))
                        throw ParseError(path, lineno, "reserved symbol mismatch: " + toks[0]);
                } else {
                    if (vocab->contains(toks[0]))
                        throw ParseError(path, lineno, "duplicate unigram: " + toks[0]);
                    id = vocab->add(toks[0]);
                }
                ids.push_back(id);
                uni_probs.push_back(std::pow(10.0, logp));
            } else {
                for (const auto& t : toks) {
                    if (!vocab->contains(t))
                        throw ParseError(path, lineno, "token not in unigram section: " + t);
                    ids.push_back(vocab->lookup(t));
                }
                std::string ctx_key = pack_key(ids.data(), o - 1);
                lm.levels[o - 1][ctx_key].probs.push_back({ids.back(), std::pow(10.0, logp)});
            }
            if (has_bow) {
                if (o >= n) throw ParseError(path, lineno, "backoff weight at highest order");
                std::string self_key = pack_key(ids.data(), o);
                lm.levels[o][self_key].bow = std::pow(10.0, logbow);
            }
        }
        if (seen != declared[o - 1])
            throw ParseError(path, lineno,
                             "section " + marker + " has " + std::to_string(seen) +
                                 " entries, header declares " + std::to_string(declared[o - 1]));
    }
    if (line != "\\end\\") throw ParseError(path, lineno, "missing \\end\\ marker");

    lm.vocab = vocab;
    lm.unigram = std::move(uni_probs);
    if (lm.unigram.size() != vocab->size())
        throw ParseError(path, lineno, "unigram section incomplete");
    for (auto& level : lm.levels)
        for (auto& [key, entry] : level) {
            (void)key;
            std::sort(entry.probs.begin(), entry.probs.end());
        }
    return lm;
}

} // namespace docfuse
