#pragma once

#include <map>
#include <string>
#include <vector>

#include "fpresheaf/errors.hpp"

namespace fpre::spec {

struct ParseError : Error {
    ParseError(const std::string& what, int line, int col)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + what),
          line(line),
          col(col) {}
    int line;
    int col;
};

struct SemanticError : Error {
    SemanticError(const std::string& what, int line)
        : Error("semantic error at line " + std::to_string(line) + ": " + what), line(line) {}
    int line;
};

struct Settings {
    unsigned p = 2;
    int window = 4;
    std::uint64_t cap = std::uint64_t{1} << 20;
};

enum class DefKind { Presheaf, Linear, PGroup };

struct Definition {
    DefKind kind;
    std::string name;
    std::string expr; // verbatim right-hand side
    int line;
};

struct AnalysisRequest {
    std::string target;
    std::string op; // growth | degree | rankfilt | kappa | hom | pfinite | frattini | augfilt
    std::map<std::string, std::string> args;
    int line;
};

struct SpecDocument {
    Settings settings;
    std::vector<Definition> definitions;
    std::vector<AnalysisRequest> analyses;
};

SpecDocument parse(const std::string& text);
SpecDocument parse_file(const std::string& path);

struct RunOptions {
    std::string format = "text"; // text | csv | jsonl
    bool strict = false;
    std::string cache_dir;
    int threads = 1;
    std::uint64_t seed = 0;
};

struct AnalysisResult {
    std::string name;     // target name
    std::string analysis; // operation
    std::vector<std::string> text_lines;
    std::string csv_block;
    std::string jsonl;    // one JSON object, no trailing newline
    bool limited = false; // cap/window verdict present
};

struct Report {
    Settings settings;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<AnalysisResult> results;
    bool any_limited() const;
};

Report run(const SpecDocument& doc, const RunOptions& opt);

// byte-stable emission; LF line endings, fixed key order
std::string emit(const Report& r, const std::string& format);

} // namespace fpre::spec
