#include "docfuse/scale_table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace docfuse {

SubwordScaleTable SubwordScaleTable::constant(std::size_t vocab_size, double l0, double l1,
                                              double l2) {
    SubwordScaleTable t;
    t.scales.assign(vocab_size, {l0, l1, l2});
    return t;
}

void SubwordScaleTable::save(const std::string& path, const Vocabulary& vocab) const {
    if (scales.size() != vocab.size())
        throw Error("scale table size does not match vocabulary");
    std::ofstream f(path);
    if (!f) throw Error("cannot write scale table: " + path);
    f << "docfuse-scale-table 1\n";
    char buf[128];
    for (std::size_t i = 0; i < scales.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f\t%.6f\t%.6f", scales[i][0], scales[i][1],
                      scales[i][2]);
        f << vocab.decode(static_cast<SubwordId>(i)) << '\t' << buf << '\n';
    }
}

SubwordScaleTable SubwordScaleTable::load(const std::string& path, const Vocabulary& vocab) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read scale table: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "docfuse-scale-table 1")
        throw ParseError(path, 1, "expected header 'docfuse-scale-table 1'");
    std::size_t lineno = 1;

    SubwordScaleTable t;
    t.scales.reserve(vocab.size());
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t pos = 0;
        std::vector<std::string> fields;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            fields.push_back(
                line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (fields.size() != 4)
            throw ParseError(path, lineno, "expected 'token<TAB>l0<TAB>l1<TAB>l2'");
        std::size_t id = t.scales.size();
        if (id >= vocab.size()) throw ParseError(path, lineno, "more lines than vocabulary entries");
        if (fields[0] != vocab.decode(static_cast<SubwordId>(id)))
            throw ParseError(path, lineno, "token out of vocabulary order: " + fields[0]);
        std::array<double, 3> s{};
        for (int j = 0; j < 3; ++j) {
            try {
                s[static_cast<std::size_t>(j)] = std::stod(fields[static_cast<std::size_t>(j) + 1]);
            } catch (const std::exception&) {
                throw ParseError(path, lineno, "bad scale value");
            }
            if (std::isnan(s[static_cast<std::size_t>(j)]))
                throw ParseError(path, lineno, "scale value is NaN");
        }
        t.scales.push_back(s);
    }
    if (t.scales.size() != vocab.size())
        throw ParseError(path, lineno, "scale table has " + std::to_string(t.scales.size()) +
                                           " entries, vocabulary has " +
                                           std::to_string(vocab.size()));
    return t;
}

} // namespace docfuse
