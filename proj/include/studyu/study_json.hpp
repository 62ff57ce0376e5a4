#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "studyu/study_model.hpp"

namespace studyu {

using nlohmann::json;

/// Decodes the study-definition document. Checks shape only: closed schema,
/// member types, enum tokens, and local constraints such as positive
/// integers, colors and times of day. Throws Error with MalformedDocument,
/// UnknownField or TypeMismatch; details carry {"path": "$.a.b[0]"}.
Study decode_study(const json& doc);

/// decode_study plus validate_study(for_publish = false). A study with
/// validation errors is rejected with ValidationFailed.
Study parse_study(std::string_view bytes);

json encode_study(const Study& study);

/// Canonical bytes: sorted members, 2-space indent, UTF-8, trailing newline.
std::string serialize_study(const Study& study);

json encode_metadata(const StudyMetadata& metadata);
StudyMetadata decode_metadata(const json& node, const std::string& path);
json encode_details(const StudyDetails& details);
StudyDetails decode_details(const json& node, const std::string& path);

json encode_answer_value(const AnswerValue& value);
AnswerValue decode_answer_value(const json& node, const std::string& path);
json encode_answer(const Answer& answer);
Answer decode_answer(const json& node, const std::string& path);

json encode_expression(const Expression& expr);
Expression decode_expression(const json& node, const std::string& path);

json encode_data_reference(const DataReference& ref);

/// Integral doubles are written as JSON integers so fixtures stay readable.
json encode_number(double value);

std::string_view to_token(QuestionType t);
std::string_view to_token(TaskType t);
std::string_view to_token(SequenceKind s);
std::string_view to_token(ValueKind k);
std::string_view to_token(Aggregate a);
std::string_view to_token(ImprovementDirection d);
std::string_view to_token(Comparison c);

} // namespace studyu
