#include "docfuse/corpus_io.hpp"

#include <fstream>
#include <sstream>

namespace docfuse {

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

static std::string doc_id(std::size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "doc%06zu", n);
    return buf;
}

std::vector<TextDocument> read_corpus(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read corpus file: " + path);
    std::vector<TextDocument> docs;
    TextDocument cur;
    std::string line;
    auto flush = [&]() {
        if (!cur.sentences.empty()) {
            cur.id = doc_id(docs.size());
            docs.push_back(std::move(cur));
            cur = TextDocument{};
        }
    };
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        cur.sentences.push_back(split_tokens(line));
    }
    flush();
    return docs;
}

void write_corpus(const std::string& path, const std::vector<TextDocument>& docs) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write corpus file: " + path);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (d) f << '\n';
        for (const auto& sent : docs[d].sentences) f << join_tokens(sent) << '\n';
    }
}

std::vector<Document> encode_corpus(const std::vector<TextDocument>& docs,
                                    const Vocabulary& vocab) {
    std::vector<Document> out;
    out.reserve(docs.size());
    for (const auto& td : docs) {
        Document d;
        d.id = td.id;
        d.sentences.reserve(td.sentences.size());
        for (const auto& s : td.sentences) d.sentences.push_back(vocab.encode(s));
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<TextDocument> decode_corpus(const std::vector<Document>& docs,
                                        const Vocabulary& vocab) {
    std::vector<TextDocument> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        TextDocument td;
        td.id = d.id;
        td.sentences.reserve(d.sentences.size());
        for (const auto& s : d.sentences) td.sentences.push_back(vocab.decode(s));
        out.push_back(std::move(td));
    }
    return out;
}

std::vector<std::string> token_stream(const std::vector<TextDocument>& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs)
        for (const auto& s : d.sentences)
            out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::vector<Sentence> context_window(const Document& doc, std::size_t index, std::size_t k) {
    if (index >= doc.sentences.size())
        throw Error("context_window: sentence index " + std::to_string(index) +
                    " out of range for document of " + std::to_string(doc.sentences.size()));
    std::size_t lo = index > k ? index - k : 0;
    return {doc.sentences.begin() + static_cast<std::ptrdiff_t>(lo),
            doc.sentences.begin() + static_cast<std::ptrdiff_t>(index)};
}

std::vector<ParallelDocument> zip_parallel(const std::vector<Document>& src,
                                           const std::vector<Document>& tgt) {
    if (src.size() != tgt.size())
        throw Error("parallel corpora have different document counts: " +
                    std::to_string(src.size()) + " vs " + std::to_string(tgt.size()));
    std::vector<ParallelDocument> out;
    out.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i].sentences.size() != tgt[i].sentences.size())
            throw Error("document " + src[i].id + " has mismatched sentence counts");
        ParallelDocument pd;
        pd.id = src[i].id;
        pd.source = src[i].sentences;
        pd.target = tgt[i].sentences;
        out.push_back(std::move(pd));
    }
    return out;
}

std::vector<SentencePair> flatten_pairs(const std::vector<ParallelDocument>& docs) {
    std::vector<SentencePair> out;
    for (const auto& d : docs)
        for (std::size_t i = 0; i < d.source.size(); ++i)
            out.push_back({d.source[i], d.target[i]});
    return out;
}

} // namespace docfuse
