#pragma once

#include <cstdint>
#include <string>
#include <stdexcept>
#include <vector>

namespace docfuse {

using SubwordId = std::int32_t;

/// Target or source sentence as dense vocabulary ids. BOS/EOS are never
/// stored here; they are decoder/model internal.
using Sentence = std::vector<SubwordId>;

struct Document {
    std::string id;
    std::vector<Sentence> sentences;
};

/// Sentence-aligned document pair. source[i] translates to target[i].
struct ParallelDocument {
    std::string id;
    std::vector<Sentence> source;
    std::vector<Sentence> target;
};

struct SentencePair {
    Sentence source;
    Sentence target;
};

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Error for malformed model/corpus files; message carries file and line.
class ParseError : public Error {
  public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

} // namespace docfuse
