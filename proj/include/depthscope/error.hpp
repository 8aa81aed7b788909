#pragma once

#include <stdexcept>
#include <string>

namespace depthscope {

/// Malformed or invalid input data (parse and schema violations).
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A failure inside the analysis pipeline, tagged with the stage that raised it.
class AnalysisError : public std::runtime_error {
public:
    AnalysisError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace depthscope
