#pragma once

#include <stdexcept>
#include <string>

namespace fpre {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration request larger than the configured cap.
struct CapExceeded : Error {
    explicit CapExceeded(const std::string& what) : Error("cap exceeded: " + what) {}
};

// A computation needs an evaluation dimension outside the truncation window.
struct WindowExceeded : Error {
    explicit WindowExceeded(const std::string& what) : Error("window exceeded: " + what) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error("usage error: " + what) {}
};

struct NotAPGroup : Error {
    explicit NotAPGroup(const std::string& what) : Error("not a p-group: " + what) {}
};

struct RequiresP2 : Error {
    explicit RequiresP2(const std::string& what) : Error("requires p = 2: " + what) {}
};

struct NaturalityViolation : Error {
    explicit NaturalityViolation(const std::string& what) : Error("naturality violation: " + what) {}
};

struct NotExact : Error {
    explicit NotExact(const std::string& what) : Error("sequence not exact: " + what) {}
};

struct Unsupported : Error {
    explicit Unsupported(const std::string& what) : Error("unsupported: " + what) {}
};

} // namespace fpre
