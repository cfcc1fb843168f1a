#pragma once

#include <string>
#include <vector>

#include "docfuse/types.hpp"

namespace docfuse {

/// Ordered byte-pair merge list; rank == position in the list.
struct MergeTable {
    std::vector<std::pair<std::string, std::string>> merges;
    std::size_t size() const { return merges.size(); }
};

/// End-of-word marker appended to the final character symbol of each word.
constexpr const char* kBpeMarker = "</w>";

/// Greedy most-frequent-pair merge learning over a token stream. Ties are
/// broken by the order in which pairs were first seen during the scan.
MergeTable bpe_learn(const std::vector<std::string>& corpus, std::size_t num_merges);

/// Applies merges in rank order until fixpoint. Unknown characters pass
/// through as singleton symbols.
std::vector<std::string> bpe_apply(const std::string& word, const MergeTable& merges);

/// Inverse of bpe_apply: concatenates segments and strips the marker.
std::string bpe_join(const std::vector<std::string>& segments);

/// Splits a UTF-8 string into codepoint symbols, marker on the last one.
std::vector<std::string> bpe_init_symbols(const std::string& word);

void save_merges(const std::string& path, const MergeTable& merges);
MergeTable load_merges(const std::string& path);

} // namespace docfuse
