#pragma once

#include <stdexcept>
#include <string>

namespace backaudit {

/// Failure category; each maps to a distinct CLI exit code.
enum class ErrorCategory { configuration, data, diagnostic };

class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public AuditError {
public:
    explicit ConfigError(const std::string& what)
        : AuditError(ErrorCategory::configuration, what) {}
};

class DataError : public AuditError {
public:
    explicit DataError(const std::string& what)
        : AuditError(ErrorCategory::data, what) {}
};

class DiagnosticError : public AuditError {
public:
    explicit DiagnosticError(const std::string& what)
        : AuditError(ErrorCategory::diagnostic, what) {}
};

inline const char* category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::configuration: return "configuration";
        case ErrorCategory::data: return "data";
        case ErrorCategory::diagnostic: return "diagnostic";
    }
    return "unknown";
}

inline int exit_code(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::configuration: return 2;
        case ErrorCategory::data: return 3;
        case ErrorCategory::diagnostic: return 4;
    }
    return 1;
}

}  // namespace backaudit
