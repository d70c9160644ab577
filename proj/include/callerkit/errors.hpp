#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace callerkit {

// Base class for all domain errors. The CLI maps these to exit code 1;
// anything else escaping to main() is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Manifest or config field failed validation; message carries the field path.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& field_path, const std::string& detail = "")
        : Error("schema error at " + field_path + (detail.empty() ? "" : ": " + detail)),
          field_path_(field_path) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

// A repository appears in both the train and bench splits.
class SplitOverlapError : public Error {
public:
    explicit SplitOverlapError(std::vector<std::string> urls)
        : Error("repository-level split overlap: " + join(urls)), urls_(std::move(urls)) {}
    const std::vector<std::string>& urls() const { return urls_; }

private:
    static std::string join(const std::vector<std::string>& urls) {
        std::string s;
        for (const auto& u : urls) {
            if (!s.empty()) s += ", ";
            s += u;
        }
        return s;
    }
    std::vector<std::string> urls_;
};

class FetchError : public Error {
public:
    using Error::Error;
};

class RevisionNotFound : public Error {
public:
    using Error::Error;
};

class NoEligibleCaller : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class NoCallSite : public Error {
public:
    using Error::Error;
};

class NoLengthMatch : public Error {
public:
    explicit NoLengthMatch(double tolerance)
        : Error("no pool snippet within +/-" + std::to_string(tolerance * 100.0) + "% token tolerance"),
          tolerance_(tolerance) {}
    double tolerance() const { return tolerance_; }

private:
    double tolerance_;
};

class ParseFailure : public Error {
public:
    using Error::Error;
};

class RewriteVerificationFailure : public Error {
public:
    using Error::Error;
};

class MissingCaller : public Error {
public:
    using Error::Error;
};

class FragmentParseError : public Error {
public:
    explicit FragmentParseError(const std::string& what, std::vector<std::string> free_names = {})
        : Error(what), free_names_(std::move(free_names)) {}
    const std::vector<std::string>& free_names() const { return free_names_; }

private:
    std::vector<std::string> free_names_;
};

class NoTargetCall : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyReference : public Error {
public:
    using Error::Error;
};

class SandboxUnavailable : public Error {
public:
    using Error::Error;
};

} // namespace callerkit
