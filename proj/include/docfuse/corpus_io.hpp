#pragma once

#include <string>
#include <vector>

#include "docfuse/types.hpp"
#include "docfuse/vocab.hpp"

namespace docfuse {

/// Document over surface tokens, before vocabulary encoding.
struct TextDocument {
    std::string id;
    std::vector<std::vector<std::string>> sentences;
};

std::vector<std::string> split_tokens(const std::string& line);
std::string join_tokens(const std::vector<std::string>& tokens);

/// Corpus file format: one sentence per line, documents separated by a
/// single blank line, UTF-8.
std::vector<TextDocument> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<TextDocument>& docs);

std::vector<Document> encode_corpus(const std::vector<TextDocument>& docs,
                                    const Vocabulary& vocab);
std::vector<TextDocument> decode_corpus(const std::vector<Document>& docs,
                                        const Vocabulary& vocab);

/// Flattens documents to one token stream (for vocabulary building).
std::vector<std::string> token_stream(const std::vector<TextDocument>& docs);

/// Sentences [max(0, index-k), index) of the document, in order.
/// Never crosses the document boundary; throws if index is out of range.
std::vector<Sentence> context_window(const Document& doc, std::size_t index, std::size_t k);

/// Pairs up source/target documents sentence by sentence.
std::vector<ParallelDocument> zip_parallel(const std::vector<Document>& src,
                                           const std::vector<Document>& tgt);
std::vector<SentencePair> flatten_pairs(const std::vector<ParallelDocument>& docs);

} // namespace docfuse
