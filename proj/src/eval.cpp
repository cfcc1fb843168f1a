#include "docfuse/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "docfuse/corpus_io.hpp"

namespace docfuse {

namespace {

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string gram_key(const Sentence& s, std::size_t start, std::size_t n) {
    std::string key;
    key.reserve(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
        key += std::to_string(s[start + i]);
        key += ' ';
    }
    return key;
}

} // namespace

double corpus_bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                   double smooth_eps) {
    if (hyps.size() != refs.size())
        throw Error("corpus_bleu: hypothesis and reference counts differ");
    if (hyps.empty()) throw Error("corpus_bleu: empty input");

    double matches[4] = {0, 0, 0, 0};
    double totals[4] = {0, 0, 0, 0};
    std::size_t hyp_len = 0, ref_len = 0;

    for (std::size_t line = 0; line < hyps.size(); ++line) {
        const Sentence& hyp = hyps[line];
        const Sentence& ref = refs[line];
        hyp_len += hyp.size();
        ref_len += ref.size();
        for (std::size_t n = 1; n <= 4; ++n) {
            if (hyp.size() < n) continue;
            std::map<std::string, std::size_t> ref_grams;
            if (ref.size() >= n)
                for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_grams[gram_key(ref, i, n)];
            std::map<std::string, std::size_t> hyp_grams;
            for (std::size_t i = 0; i + n <= hyp.size(); ++i) ++hyp_grams[gram_key(hyp, i, n)];
            for (const auto& [g, c] : hyp_grams) {
                totals[n - 1] += static_cast<double>(c);
                auto it = ref_grams.find(g);
                if (it != ref_grams.end())
                    matches[n - 1] += static_cast<double>(std::min(c, it->second));
            }
        }
    }

    double log_prec = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
        double m = matches[n] + smooth_eps;
        double t = totals[n] + smooth_eps;
        if (m <= 0.0 || t <= 0.0) return 0.0;
        log_prec += std::log(m / t);
    }
    double bp = hyp_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return bp * std::exp(log_prec / 4.0);
}

F1Report targeted_f1(const std::vector<std::vector<std::string>>& hyps,
                     const std::vector<std::vector<std::string>>& refs,
                     const std::vector<std::vector<std::string>>& categories) {
    if (hyps.size() != refs.size())
        throw Error("targeted_f1: hypothesis and reference counts differ");

    F1Report report;
    report.per_category.resize(categories.size());
    auto count_in = [](const std::vector<std::string>& line,
                       const std::vector<std::string>& cat) {
        std::size_t n = 0;
        for (const auto& tok : line)
            if (std::find(cat.begin(), cat.end(), tok) != cat.end()) ++n;
        return n;
    };

    std::size_t tp = 0, hyp_total = 0, ref_total = 0;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        auto& pc = report.per_category[c];
        for (std::size_t line = 0; line < hyps.size(); ++line) {
            std::size_t h = count_in(hyps[line], categories[c]);
            std::size_t r = count_in(refs[line], categories[c]);
            pc.hyp_count += h;
            pc.ref_count += r;
            pc.matched += std::min(h, r);
        }
        pc.precision = pc.hyp_count ? static_cast<double>(pc.matched) / static_cast<double>(pc.hyp_count) : 0.0;
        pc.recall = pc.ref_count ? static_cast<double>(pc.matched) / static_cast<double>(pc.ref_count) : 0.0;
        pc.f1 = (pc.precision + pc.recall) > 0.0
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        tp += pc.matched;
        hyp_total += pc.hyp_count;
        ref_total += pc.ref_count;
    }
    report.no_targets = (hyp_total == 0 && ref_total == 0);
    report.precision = hyp_total ? static_cast<double>(tp) / static_cast<double>(hyp_total) : 0.0;
    report.recall = ref_total ? static_cast<double>(tp) / static_cast<double>(ref_total) : 0.0;
    report.f1 = (report.precision + report.recall) > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    return report;
}

double contrastive_accuracy(const SequenceScorer& scorer,
                            const std::vector<ContrastiveExample>& examples) {
    if (examples.empty()) throw Error("contrastive_accuracy: empty example set");
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        double ref_score = scorer(ex.reference, ex.context, ex.source);
        bool ok = true;
        for (const auto& alt : ex.contrastive) {
            if (scorer(alt, ex.context, ex.source) >= ref_score) {
                ok = false;
                break;
            }
        }
        if (ok) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

double keyword_accuracy(const std::vector<std::vector<std::string>>& hyps,
                        const std::vector<KeywordExample>& examples) {
    if (hyps.size() != examples.size())
        throw Error("keyword_accuracy: one hypothesis per example required");
    if (examples.empty()) throw Error("keyword_accuracy: empty example set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::vector<std::string> toks;
        toks.reserve(hyps[i].size());
        for (const auto& t : hyps[i]) toks.push_back(lowercase(t));
        auto contains_any = [&](const std::vector<std::string>& terms) {
            for (const auto& term : terms) {
                std::string lt = lowercase(term);
                if (std::find(toks.begin(), toks.end(), lt) != toks.end()) return true;
            }
            return false;
        };
        if (contains_any(examples[i].correct_terms) && !contains_any(examples[i].incorrect_terms))
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

// ---------------------------------------------------------------------------
// file formats
// ---------------------------------------------------------------------------

std::vector<TextContrastiveExample> read_challenge_set(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read challenge set: " + path);
    std::vector<TextContrastiveExample> out;
    TextContrastiveExample cur;
    bool has_src = false, has_ref = false;
    std::string line;
    std::size_t lineno = 0;
    auto flush = [&]() {
        if (!has_src && !has_ref && cur.context.empty() && cur.contrastive.empty()) return;
        if (!has_src) throw ParseError(path, lineno, "block without SRC line");
        if (!has_ref) throw ParseError(path, lineno, "block without REF line");
        if (cur.contrastive.empty()) throw ParseError(path, lineno, "block without ALT line");
        out.push_back(std::move(cur));
        cur = TextContrastiveExample{};
        has_src = has_ref = false;
    };
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        auto tagged = [&](const char* tag) -> bool { return line.rfind(tag, 0) == 0; };
        if (tagged("SRC:")) {
            if (has_src) throw ParseError(path, lineno, "duplicate SRC in block");
            cur.source = split_tokens(line.substr(4));
            has_src = true;
        } else if (tagged("CTX:")) {
            cur.context.push_back(split_tokens(line.substr(4)));
        } else if (tagged("REF:")) {
            if (has_ref) throw ParseError(path, lineno, "duplicate REF in block");
            cur.reference = split_tokens(line.substr(4));
            has_ref = true;
        } else if (tagged("ALT:")) {
            cur.contrastive.push_back(split_tokens(line.substr(4)));
        } else {
            throw ParseError(path, lineno, "expected SRC:/CTX:/REF:/ALT: line");
        }
    }
    flush();
    return out;
}

void write_challenge_set(const std::string& path,
                         const std::vector<TextContrastiveExample>& examples) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write challenge set: " + path);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (i) f << '\n';
        const auto& ex = examples[i];
        f << "SRC: " << join_tokens(ex.source) << '\n';
        for (const auto& c : ex.context) f << "CTX: " << join_tokens(c) << '\n';
        f << "REF: " << join_tokens(ex.reference) << '\n';
        for (const auto& a : ex.contrastive) f << "ALT: " << join_tokens(a) << '\n';
    }
}

std::vector<ContrastiveExample> encode_challenge_set(
    const std::vector<TextContrastiveExample>& examples, const Vocabulary& vocab) {
    std::vector<ContrastiveExample> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        ContrastiveExample e;
        e.source = vocab.encode(ex.source);
        for (const auto& c : ex.context) e.context.push_back(vocab.encode(c));
        e.reference = vocab.encode(ex.reference);
        for (const auto& a : ex.contrastive) e.contrastive.push_back(vocab.encode(a));
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

std::vector<KeywordExample> read_keyword_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read keyword file: " + path);
    std::vector<KeywordExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw ParseError(path, lineno, "expected 'id<TAB>correct<TAB>incorrect'");
        KeywordExample ex;
        ex.id = line.substr(0, t1);
        ex.correct_terms = split_commas(line.substr(t1 + 1, t2 - t1 - 1));
        ex.incorrect_terms = split_commas(line.substr(t2 + 1));
        if (ex.correct_terms.empty())
            throw ParseError(path, lineno, "empty correct-term list");
        for (const auto& c : ex.correct_terms)
            for (const auto& w : ex.incorrect_terms)
                if (lowercase(c) == lowercase(w))
                    throw ParseError(path, lineno, "correct and incorrect terms overlap: " + c);
        out.push_back(std::move(ex));
    }
    return out;
}

void write_keyword_file(const std::string& path, const std::vector<KeywordExample>& examples) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write keyword file: " + path);
    for (const auto& ex : examples) {
        f << ex.id << '\t';
        for (std::size_t i = 0; i < ex.correct_terms.size(); ++i) {
            if (i) f << ',';
            f << ex.correct_terms[i];
        }
        f << '\t';
        for (std::size_t i = 0; i < ex.incorrect_terms.size(); ++i) {
            if (i) f << ',';
            f << ex.incorrect_terms[i];
        }
        f << '\n';
    }
}

// ---------------------------------------------------------------------------
// report table
// ---------------------------------------------------------------------------

namespace {
const char* kMetrics[4] = {"BLEU", "pronF1", "contrAcc", "kwAcc"};
}

ReportTable::Row& ReportTable::row(const std::string& system) {
    for (auto& r : rows_)
        if (r.system == system) return r;
    rows_.push_back(Row{system, {0, 0, 0, 0}, {false, false, false, false}});
    return rows_.back();
}

void ReportTable::set(const std::string& system, const std::string& metric, double value) {
    for (int m = 0; m < 4; ++m) {
        if (metric == kMetrics[m]) {
            Row& r = row(system);
            r.values[m] = value;
            r.present[m] = true;
            return;
        }
    }
    throw Error("unknown report metric: " + metric);
}

std::string ReportTable::to_text() const {
    std::ostringstream out;
    out << "system";
    for (const char* m : kMetrics) out << '\t' << m;
    out << '\n';
    char buf[32];
    for (const auto& r : rows_) {
        out << r.system;
        for (int m = 0; m < 4; ++m) {
            if (r.present[m]) {
                std::snprintf(buf, sizeof(buf), "%.4f", r.values[m]);
                out << '\t' << buf;
            } else {
                out << '\t' << "n.a.";
            }
        }
        out << '\n';
    }
    return out.str();
}

void ReportTable::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write report: " + path);
    f << to_text();
}

ReportTable ReportTable::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read report: " + path);
    ReportTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            fields.push_back(
                line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (lineno == 1) {
            if (fields.size() != 5 || fields[0] != "system")
                throw ParseError(path, lineno, "bad report header");
            continue;
        }
        if (fields.size() != 5) throw ParseError(path, lineno, "expected 5 columns");
        for (int m = 0; m < 4; ++m) {
            const std::string& cell = fields[static_cast<std::size_t>(m) + 1];
            if (cell == "n.a.") continue;
            try {
                table.set(fields[0], kMetrics[m], std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(path, lineno, "bad metric value: " + cell);
            }
        }
    }
    return table;
}

} // namespace docfuse
