#include "docfuse/bpe.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace docfuse {

std::vector<std::string> bpe_init_symbols(const std::string& word) {
    std::vector<std::string> symbols;
    std::size_t i = 0;
    while (i < word.size()) {
        unsigned char c = static_cast<unsigned char>(word[i]);
        std::size_t len = 1;
        if ((c & 0x80u) == 0x00u) len = 1;
        else if ((c & 0xE0u) == 0xC0u) len = 2;
        else if ((c & 0xF0u) == 0xE0u) len = 3;
        else if ((c & 0xF8u) == 0xF0u) len = 4;
        if (i + len > word.size()) len = 1; // tolerate broken encoding
        symbols.push_back(word.substr(i, len));
        i += len;
    }
    if (!symbols.empty()) symbols.back() += kBpeMarker;
    return symbols;
}

namespace {

using SymPair = std::pair<std::string, std::string>;

struct PairStats {
    std::unordered_map<std::string, std::size_t> count; // key = left + '\x01' + right
    std::vector<SymPair> first_seen;                    // scan order for tie-break

    void add(const SymPair& p, std::size_t n) {
        std::string key = p.first + '\x01' + p.second;
        auto it = count.find(key);
        if (it == count.end()) {
            count.emplace(std::move(key), n);
            first_seen.push_back(p);
        } else {
            it->second += n;
        }
    }
};

} // namespace

MergeTable bpe_learn(const std::vector<std::string>& corpus, std::size_t num_merges) {
    // word type -> frequency, keeping first-seen order for determinism
    std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
    {
        std::unordered_map<std::string, std::size_t> index;
        for (const auto& w : corpus) {
            if (w.empty()) continue;
            auto it = index.find(w);
            if (it == index.end()) {
                index.emplace(w, words.size());
                words.push_back({bpe_init_symbols(w), 1});
            } else {
                ++words[it->second].second;
            }
        }
    }

    MergeTable table;
    for (std::size_t m = 0; m < num_merges; ++m) {
        PairStats stats;
        for (const auto& [syms, freq] : words)
            for (std::size_t i = 0; i + 1 < syms.size(); ++i)
                stats.add({syms[i], syms[i + 1]}, freq);
        if (stats.first_seen.empty()) break;

        SymPair best;
        std::size_t best_count = 0;
        for (const auto& p : stats.first_seen) {
            std::size_t c = stats.count[p.first + '\x01' + p.second];
            if (c > best_count) { // strict: earlier-seen pair wins ties
                best_count = c;
                best = p;
            }
        }
        table.merges.push_back(best);

        for (auto& [syms, freq] : words) {
            (void)freq;
            std::vector<std::string> merged;
            merged.reserve(syms.size());
            std::size_t i = 0;
            while (i < syms.size()) {
                if (i + 1 < syms.size() && syms[i] == best.first && syms[i + 1] == best.second) {
                    merged.push_back(syms[i] + syms[i + 1]);
                    i += 2;
                } else {
                    merged.push_back(syms[i]);
                    ++i;
                }
            }
            syms = std::move(merged);
        }
    }
    return table;
}

std::vector<std::string> bpe_apply(const std::string& word, const MergeTable& merges) {
    std::vector<std::string> syms = bpe_init_symbols(word);
    if (syms.empty()) return syms;
    for (const auto& [left, right] : merges.merges) {
        std::vector<std::string> merged;
        merged.reserve(syms.size());
        std::size_t i = 0;
        while (i < syms.size()) {
            if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
                merged.push_back(syms[i] + syms[i + 1]);
                i += 2;
            } else {
                merged.push_back(syms[i]);
                ++i;
            }
        }
        syms = std::move(merged);
    }
    return syms;
}

std::string bpe_join(const std::vector<std::string>& segments) {
    std::string out;
    for (const auto& s : segments) out += s;
    const std::string marker = kBpeMarker;
    if (out.size() >= marker.size() &&
        out.compare(out.size() - marker.size(), marker.size(), marker) == 0)
        out.erase(out.size() - marker.size());
    return out;
}

void save_merges(const std::string& path, const MergeTable& merges) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write merge table: " + path);
    f << "docfuse-bpe 1\n";
    for (const auto& [l, r] : merges.merges) f << l << '\t' << r << '\n';
}

MergeTable load_merges(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read merge table: " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line) || line != "docfuse-bpe 1")
        throw ParseError(path, 1, "expected header 'docfuse-bpe 1'");
    lineno = 1;
    MergeTable table;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw ParseError(path, lineno, "expected 'left<TAB>right'");
        table.merges.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return table;
}

} // namespace docfuse
