#pragma once

#include <array>
#include <string>
#include <vector>

#include "docfuse/types.hpp"
#include "docfuse/vocab.hpp"

namespace docfuse {

/// One learnable scale triple (l0, l1, l2) per vocabulary entry. Learned
/// values may go negative; no clamping is applied.
struct SubwordScaleTable {
    std::vector<std::array<double, 3>> scales;

    std::size_t size() const { return scales.size(); }
    bool empty() const { return scales.empty(); }

    static SubwordScaleTable constant(std::size_t vocab_size, double l0, double l1, double l2);

    /// File format: "token<TAB>l0<TAB>l1<TAB>l2" (6 d.p.), one line per
    /// vocabulary entry in vocabulary order, after a version header.
    void save(const std::string& path, const Vocabulary& vocab) const;
    static SubwordScaleTable load(const std::string& path, const Vocabulary& vocab);
};

} // namespace docfuse
