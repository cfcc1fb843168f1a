#include "docfuse/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

namespace docfuse {

Vocabulary::Vocabulary() {
    add(bos_token());
    add(eos_token());
    add(sep_token());
    add(unk_token());
}

SubwordId Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    SubwordId id = static_cast<SubwordId>(id_to_token_.size());
    id_to_token_.push_back(token);
    token_to_id_.emplace(token, id);
    return id;
}

SubwordId Vocabulary::lookup(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) > 0;
}

const std::string& Vocabulary::decode(SubwordId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw Error("vocabulary id out of range: " + std::to_string(id));
    return id_to_token_[static_cast<std::size_t>(id)];
}

Sentence Vocabulary::encode(const std::vector<std::string>& tokens) const {
    Sentence out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lookup(t));
    return out;
}

std::vector<std::string> Vocabulary::decode(const Sentence& sent) const {
    std::vector<std::string> out;
    out.reserve(sent.size());
    for (SubwordId id : sent) out.push_back(decode(id));
    return out;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write vocabulary file: " + path);
    for (const auto& t : id_to_token_) f << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read vocabulary file: " + path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) throw ParseError(path, lineno, "empty vocabulary line");
        if (lineno <= 4) {
            // reserved symbols must come first, in fixed order
            if (line != v.decode(static_cast<SubwordId>(lineno - 1)))
                throw ParseError(path, lineno, "reserved symbol mismatch: " + line);
            continue;
        }
        if (v.contains(line)) throw ParseError(path, lineno, "duplicate token: " + line);
        v.add(line);
    }
    if (lineno < 4) throw ParseError(path, lineno, "vocabulary lacks reserved symbols");
    return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpora,
                       std::size_t max_size) {
    bool any = false;
    std::map<std::string, std::size_t> freq;
    for (const auto& stream : corpora)
        for (const auto& tok : stream) {
            any = true;
            ++freq[tok];
        }
    if (!any) throw Error("empty corpus");

    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (const auto& [tok, n] : items) {
        (void)n;
        if (v.size() >= max_size) break;
        if (!v.contains(tok)) v.add(tok);
    }
    return v;
}

} // namespace docfuse
