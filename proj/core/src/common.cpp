#include "kubediag/common.hpp"
#include "kubediag/errors.hpp"
#include "kubediag/query_io.hpp"

namespace kubediag {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidQuery: return "InvalidQuery";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::ClassificationError: return "ClassificationError";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::InvalidPath: return "InvalidPath";
        case ErrorCode::EmptyHistory: return "EmptyHistory";
        case ErrorCode::InvalidContext: return "InvalidContext";
        case ErrorCode::SynthesisError: return "SynthesisError";
        case ErrorCode::NoEvidence: return "NoEvidence";
        case ErrorCode::AlreadyRecorded: return "AlreadyRecorded";
        case ErrorCode::ScenarioParseError: return "ScenarioParseError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

const char* to_string(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Success: return "success";
        case Outcome::Failure: return "failure";
        case Outcome::Partial: return "partial";
    }
    return "failure";
}

Outcome outcome_from_string(std::string_view text) {
    if (text == "success") return Outcome::Success;
    if (text == "failure") return Outcome::Failure;
    if (text == "partial") return Outcome::Partial;
    throw Error(ErrorCode::InvalidArgument, "unknown outcome '" + std::string(text) + "'");
}

const char* to_string(Pathway pathway) noexcept {
    return pathway == Pathway::Intuitive ? "intuitive" : "analytical";
}

Pathway pathway_from_string(std::string_view text) {
    if (text == "intuitive") return Pathway::Intuitive;
    if (text == "analytical") return Pathway::Analytical;
    throw Error(ErrorCode::InvalidArgument, "unknown pathway '" + std::string(text) + "'");
}

}  // namespace kubediag

namespace kubediag {

nlohmann::json to_json(const Query& q) {
    return nlohmann::json{{"id", q.id}, {"symptoms", q.symptoms}, {"context", q.context}};
}

Query query_from_json(const nlohmann::json& j) {
    try {
        Query q;
        q.id = j.at("id").get<std::string>();
        q.symptoms = j.at("symptoms").get<std::vector<std::string>>();
        if (j.contains("context")) q.context = j.at("context").get<std::set<std::string>>();
        return q;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::SchemaViolation, std::string("query: ") + ex.what());
    }
}

}  // namespace kubediag
