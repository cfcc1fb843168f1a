#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "docfuse/types.hpp"

namespace docfuse {

/// Closed token inventory with dense ids. The four reserved symbols occupy
/// the lowest ids; everything unknown at encode time maps to UNK.
class Vocabulary {
  public:
    static constexpr SubwordId kBos = 0;
    static constexpr SubwordId kEos = 1;
    static constexpr SubwordId kSep = 2;
    static constexpr SubwordId kUnk = 3;

    static const char* bos_token() { return "<s>"; }
    static const char* eos_token() { return "</s>"; }
    static const char* sep_token() { return "<sep>"; }
    static const char* unk_token() { return "<unk>"; }

    Vocabulary();

    /// Adds a token if absent, returns its id either way.
    SubwordId add(const std::string& token);

    /// Id for token, or UNK if not present.
    SubwordId lookup(const std::string& token) const;
    bool contains(const std::string& token) const;

    const std::string& decode(SubwordId id) const;
    std::size_t size() const { return id_to_token_.size(); }

    Sentence encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const Sentence& sent) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

  private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, SubwordId> token_to_id_;
};

/// Builds the vocabulary from whitespace token streams: reserved symbols
/// first, then tokens by frequency (desc) with lexicographic tie-break,
/// cut off at max_size.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpora,
                       std::size_t max_size);

} // namespace docfuse
