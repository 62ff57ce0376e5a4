#include "studyu/study_json.hpp"

#include <cmath>
#include <regex>
#include <unordered_set>

#include "studyu/error.hpp"
#include "studyu/study_validate.hpp"

namespace studyu {

namespace {

constexpr int kMaxExpressionDepth = 64;

[[noreturn]] void fail(ErrorCode code, const std::string& path, const std::string& what) {
    throw Error(code, path + ": " + what, json{{"path", path}});
}

std::string member_path(const std::string& path, std::string_view key) {
    return path + "." + std::string(key);
}

std::string index_path(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

/// Reads members of one JSON object and rejects whatever was not read.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) fail(ErrorCode::TypeMismatch, path_, "expected an object");
    }

    const json& required(std::string_view key) {
        const json* v = optional(key);
        if (v == nullptr) {
            fail(ErrorCode::MalformedDocument, member_path(path_, key), "missing required member");
        }
        return *v;
    }

    const json* optional(std::string_view key) {
        auto it = node_.find(key);
        if (it == node_.end()) return nullptr;
        seen_.insert(std::string(key));
        return &*it;
    }

    std::string path(std::string_view key) const { return member_path(path_, key); }

    std::string string(std::string_view key) { return as_string(required(key), path(key)); }

    std::string optional_string(std::string_view key) {
        const json* v = optional(key);
        return v ? as_string(*v, path(key)) : std::string{};
    }

    bool boolean(std::string_view key) {
        const json& v = required(key);
        if (!v.is_boolean()) fail(ErrorCode::TypeMismatch, path(key), "expected a boolean");
        return v.get<bool>();
    }

    double number(std::string_view key) { return as_number(required(key), path(key)); }

    std::int64_t integer(std::string_view key) {
        const json& v = required(key);
        if (!v.is_number_integer()) fail(ErrorCode::TypeMismatch, path(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    int positive_int(std::string_view key) {
        const std::int64_t v = integer(key);
        if (v < 1 || v > 1'000'000) {
            fail(ErrorCode::TypeMismatch, path(key), "expected a positive integer");
        }
        return static_cast<int>(v);
    }

    template <typename F>
    auto array(std::string_view key, F&& decode_item) {
        return decode_array(required(key), path(key), std::forward<F>(decode_item));
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!seen_.count(it.key())) {
                fail(ErrorCode::UnknownField, member_path(path_, it.key()), "unknown member");
            }
        }
    }

    static std::string as_string(const json& v, const std::string& path) {
        if (!v.is_string()) fail(ErrorCode::TypeMismatch, path, "expected a string");
        return v.get<std::string>();
    }

    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) fail(ErrorCode::TypeMismatch, path, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(ErrorCode::TypeMismatch, path, "expected a finite number");
        return d;
    }

    template <typename F>
    static auto decode_array(const json& v, const std::string& path, F&& decode_item) {
        if (!v.is_array()) fail(ErrorCode::TypeMismatch, path, "expected an array");
        using Item = std::invoke_result_t<F, const json&, const std::string&>;
        std::vector<Item> out;
        out.reserve(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(decode_item(v[i], index_path(path, i)));
        return out;
    }

private:
    const json& node_;
    std::string path_;
    std::unordered_set<std::string> seen_;
};

template <typename Enum, std::size_t N>
Enum token_lookup(const std::string& token, const std::array<Enum, N>& values,
                  const std::string& path) {
    for (Enum e : values) {
        if (to_token(e) == token) return e;
    }
    fail(ErrorCode::TypeMismatch, path, "unknown token \"" + token + "\"");
}

constexpr std::array kQuestionTypes = {QuestionType::Boolean, QuestionType::Choice,
                                       QuestionType::VisualAnalogue, QuestionType::AnnotatedScale};
constexpr std::array kTaskTypes = {TaskType::Checkmark, TaskType::Questionnaire};
constexpr std::array kSequenceKinds = {SequenceKind::Alternating, SequenceKind::Counterbalanced,
                                       SequenceKind::Randomized};
constexpr std::array kValueKinds = {ValueKind::Numeric, ValueKind::Boolean};
constexpr std::array kAggregates = {Aggregate::Day, Aggregate::Phase, Aggregate::Intervention};
constexpr std::array kDirections = {ImprovementDirection::HigherIsBetter,
                                    ImprovementDirection::LowerIsBetter};
constexpr std::array kComparisons = {Comparison::Less, Comparison::LessEqual, Comparison::Equal,
                                     Comparison::GreaterEqual, Comparison::Greater};

std::string decode_color(ObjectReader& r, std::string_view key) {
    static const std::regex kColor{"#[0-9A-Fa-f]{6}"};
    std::string c = r.string(key);
    if (!std::regex_match(c, kColor)) fail(ErrorCode::TypeMismatch, r.path(key), "expected #RRGGBB");
    return c;
}

TimeOfDay decode_time(ObjectReader& r, std::string_view key) {
    auto t = parse_time_of_day(r.string(key));
    if (!t) fail(ErrorCode::TypeMismatch, r.path(key), "expected HH:MM");
    return *t;
}

// ---------------------------------------------------------------------------
// Encoding helpers
// ---------------------------------------------------------------------------

json encode_condition(const Condition& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BooleanEquals>) {
                return {{"type", "boolean"}, {"value", v.value}};
            } else if constexpr (std::is_same_v<T, ChoiceSelected>) {
                return {{"type", "choice"}, {"choice", v.choice_id}};
            } else {
                return {{"type", "numeric"},
                        {"operator", std::string(to_token(v.op))},
                        {"value", encode_number(v.value)}};
            }
        },
        c);
}

Condition decode_condition(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    const std::string type = r.string("type");
    Condition out;
    if (type == "boolean") {
        const json& v = r.required("value");
        if (!v.is_boolean()) fail(ErrorCode::TypeMismatch, r.path("value"), "expected a boolean");
        out = BooleanEquals{v.get<bool>()};
    } else if (type == "choice") {
        out = ChoiceSelected{r.string("choice")};
    } else if (type == "numeric") {
        auto op = token_lookup(r.string("operator"), kComparisons, r.path("operator"));
        out = NumericCompare{op, r.number("value")};
    } else {
        fail(ErrorCode::TypeMismatch, r.path("type"), "unknown condition type \"" + type + "\"");
    }
    r.finish();
    return out;
}

Expression decode_expression_at(const json& node, const std::string& path, int depth) {
    if (depth > kMaxExpressionDepth) fail(ErrorCode::TypeMismatch, path, "expression nested too deeply");
    ObjectReader r(node, path);
    const std::string type = r.string("type");
    if (type == "value") {
        std::string target = r.string("target");
        Condition c = decode_condition(r.required("condition"), r.path("condition"));
        r.finish();
        return Expression::value(std::move(target), std::move(c));
    }
    if (type == "not") {
        Expression inner = decode_expression_at(r.required("expression"), r.path("expression"), depth + 1);
        r.finish();
        return Expression::negate(std::move(inner));
    }
    fail(ErrorCode::TypeMismatch, r.path("type"), "unknown expression type \"" + type + "\"");
}

json encode_question(const Question& q) {
    json j{{"id", q.question_id},
           {"type", std::string(to_token(q.type))},
           {"prompt", q.prompt},
           {"rationale", q.rationale}};
    if (q.choice) {
        json choices = json::array();
        for (const auto& c : q.choice->choices) choices.push_back({{"id", c.choice_id}, {"text", c.text}});
        j["multiple"] = q.choice->multiple;
        j["choices"] = std::move(choices);
    }
    if (q.slider) {
        const auto& s = *q.slider;
        j["minimum"] = encode_number(s.minimum);
        j["maximum"] = encode_number(s.maximum);
        j["initial"] = encode_number(s.initial);
        j["step"] = encode_number(s.step);
        json annotations = json::array();
        for (const auto& a : s.annotations) {
            annotations.push_back({{"value", encode_number(a.value)}, {"text", a.text}});
        }
        j["annotations"] = std::move(annotations);
        if (s.gradient) {
            j["gradient"] = {{"minColor", s.gradient->min_color}, {"maxColor", s.gradient->max_color}};
        }
    }
    if (q.conditional) j["conditional"] = encode_expression(*q.conditional);
    if (q.default_answer) j["defaultAnswer"] = encode_answer_value(*q.default_answer);
    return j;
}

Question decode_question(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    Question q;
    q.question_id = r.string("id");
    q.type = token_lookup(r.string("type"), kQuestionTypes, r.path("type"));
    q.prompt = r.string("prompt");
    q.rationale = r.optional_string("rationale");
    if (q.type == QuestionType::Choice) {
        ChoiceConfig c;
        c.multiple = r.boolean("multiple");
        c.choices = r.array("choices", [](const json& n, const std::string& p) {
            ObjectReader cr(n, p);
            Choice ch{cr.string("id"), cr.string("text")};
            cr.finish();
            return ch;
        });
        q.choice = std::move(c);
    } else if (q.is_slider()) {
        SliderConfig s;
        s.minimum = r.number("minimum");
        s.maximum = r.number("maximum");
        s.initial = r.number("initial");
        s.step = r.number("step");
        if (!(s.step > 0)) fail(ErrorCode::TypeMismatch, r.path("step"), "step must be positive");
        if (const json* a = r.optional("annotations")) {
            s.annotations = ObjectReader::decode_array(*a, r.path("annotations"),
                                                       [](const json& n, const std::string& p) {
                ObjectReader ar(n, p);
                Annotation an{ar.number("value"), ar.string("text")};
                ar.finish();
                return an;
            });
        }
        if (const json* g = r.optional("gradient")) {
            ObjectReader gr(*g, r.path("gradient"));
            Gradient grad{decode_color(gr, "minColor"), decode_color(gr, "maxColor")};
            gr.finish();
            s.gradient = std::move(grad);
        }
        q.slider = std::move(s);
    }
    if (const json* c = r.optional("conditional")) q.conditional = decode_expression(*c, r.path("conditional"));
    if (const json* d = r.optional("defaultAnswer")) q.default_answer = decode_answer_value(*d, r.path("defaultAnswer"));
    r.finish();
    return q;
}

json encode_task(const Task& t) {
    json windows = json::array();
    for (const auto& w : t.schedule) {
        windows.push_back({{"start", format_time_of_day(w.start)}, {"end", format_time_of_day(w.end)}});
    }
    json j{{"id", t.task_id}, {"title", t.title}, {"type", std::string(to_token(t.type))}, {"schedule", windows}};
    if (t.type == TaskType::Questionnaire) {
        json qs = json::array();
        for (const auto& q : t.questions) qs.push_back(encode_question(q));
        j["questions"] = std::move(qs);
    }
    return j;
}

Task decode_task(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    Task t;
    t.task_id = r.string("id");
    t.title = r.string("title");
    t.type = token_lookup(r.string("type"), kTaskTypes, r.path("type"));
    t.schedule = r.array("schedule", [](const json& n, const std::string& p) {
        ObjectReader wr(n, p);
        TimeWindow w{decode_time(wr, "start"), decode_time(wr, "end")};
        wr.finish();
        return w;
    });
    if (t.type == TaskType::Questionnaire) t.questions = r.array("questions", decode_question);
    r.finish();
    return t;
}

DataReference decode_data_reference(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    DataReference d;
    d.task_id = r.string("task");
    d.property_id = r.string("property");
    d.kind = token_lookup(r.string("kind"), kValueKinds, r.path("kind"));
    r.finish();
    return d;
}

json encode_section(const ReportSection& s) {
    json j{{"id", s.section_id}, {"title", s.title}, {"data", encode_data_reference(s.reference())}};
    if (const auto* avg = std::get_if<AverageSection>(&s.body)) {
        j["type"] = "average";
        j["aggregate"] = std::string(to_token(avg->aggregate));
    } else {
        const auto& lr = std::get<LinearRegressionSection>(s.body);
        j["type"] = "linearRegression";
        j["improvement"] = std::string(to_token(lr.improvement));
    }
    return j;
}

ReportSection decode_section(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    ReportSection s;
    s.section_id = r.string("id");
    s.title = r.string("title");
    const std::string type = r.string("type");
    DataReference ref = decode_data_reference(r.required("data"), r.path("data"));
    if (type == "average") {
        s.body = AverageSection{std::move(ref), token_lookup(r.string("aggregate"), kAggregates, r.path("aggregate"))};
    } else if (type == "linearRegression") {
        s.body = LinearRegressionSection{
            std::move(ref), token_lookup(r.string("improvement"), kDirections, r.path("improvement"))};
    } else {
        fail(ErrorCode::TypeMismatch, r.path("type"), "unknown report section type \"" + type + "\"");
    }
    r.finish();
    return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

std::string_view to_token(QuestionType t) {
    switch (t) {
        case QuestionType::Boolean: return "boolean";
        case QuestionType::Choice: return "choice";
        case QuestionType::VisualAnalogue: return "visualAnalogue";
        case QuestionType::AnnotatedScale: return "annotatedScale";
    }
    return "";
}

std::string_view to_token(TaskType t) {
    return t == TaskType::Checkmark ? "checkmark" : "questionnaire";
}

std::string_view to_token(SequenceKind s) {
    switch (s) {
        case SequenceKind::Alternating: return "alternating";
        case SequenceKind::Counterbalanced: return "counterbalanced";
        case SequenceKind::Randomized: return "randomized";
    }
    return "";
}

std::string_view to_token(ValueKind k) { return k == ValueKind::Numeric ? "numeric" : "boolean"; }

std::string_view to_token(Aggregate a) {
    switch (a) {
        case Aggregate::Day: return "day";
        case Aggregate::Phase: return "phase";
        case Aggregate::Intervention: return "intervention";
    }
    return "";
}

std::string_view to_token(ImprovementDirection d) {
    return d == ImprovementDirection::HigherIsBetter ? "higherIsBetter" : "lowerIsBetter";
}

std::string_view to_token(Comparison c) {
    switch (c) {
        case Comparison::Less: return "<";
        case Comparison::LessEqual: return "<=";
        case Comparison::Equal: return "=";
        case Comparison::GreaterEqual: return ">=";
        case Comparison::Greater: return ">";
    }
    return "";
}

// ---------------------------------------------------------------------------
// Public codec
// ---------------------------------------------------------------------------

json encode_number(double value) {
    if (std::nearbyint(value) == value && std::fabs(value) < 9.0e15) {
        return static_cast<std::int64_t>(value);
    }
    return value;
}

json encode_answer_value(const AnswerValue& value) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                return encode_number(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v;
            } else {
                return json(std::vector<std::string>(v.begin(), v.end()));
            }
        },
        value);
}

AnswerValue decode_answer_value(const json& node, const std::string& path) {
    if (node.is_boolean()) return node.get<bool>();
    if (node.is_number()) return ObjectReader::as_number(node, path);
    if (node.is_array()) {
        std::set<std::string> out;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (!out.insert(ObjectReader::as_string(node[i], index_path(path, i))).second) {
                fail(ErrorCode::TypeMismatch, index_path(path, i), "duplicate choice");
            }
        }
        return out;
    }
    fail(ErrorCode::TypeMismatch, path, "expected a boolean, a number or an array of choice ids");
}

json encode_answer(const Answer& a) {
    return {{"question", a.question_id},
            {"value", encode_answer_value(a.value)},
            {"answeredAt", format_timestamp(a.answered_at)}};
}

Answer decode_answer(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    Answer a;
    a.question_id = r.string("question");
    a.value = decode_answer_value(r.required("value"), r.path("value"));
    if (const json* at = r.optional("answeredAt")) {
        auto ts = parse_timestamp(ObjectReader::as_string(*at, r.path("answeredAt")));
        if (!ts) fail(ErrorCode::TypeMismatch, r.path("answeredAt"), "expected an ISO-8601 UTC timestamp");
        a.answered_at = *ts;
    }
    r.finish();
    return a;
}

json encode_expression(const Expression& expr) {
    if (expr.is_not()) return {{"type", "not"}, {"expression", encode_expression(expr.inner())}};
    const auto& v = expr.as_value();
    return {{"type", "value"}, {"target", v.question_id}, {"condition", encode_condition(v.condition)}};
}

Expression decode_expression(const json& node, const std::string& path) {
    return decode_expression_at(node, path, 1);
}

json encode_data_reference(const DataReference& ref) {
    return {{"task", ref.task_id}, {"property", ref.property_id}, {"kind", std::string(to_token(ref.kind))}};
}

json encode_metadata(const StudyMetadata& m) {
    return {{"id", m.study_id},
            {"title", m.title},
            {"description", m.description},
            {"icon", m.icon_name},
            {"contact",
             {{"organization", m.contact.organization},
              {"researcherName", m.contact.researcher_name},
              {"email", m.contact.email},
              {"website", m.contact.website}}},
            {"irb", {{"boardName", m.irb.board_name}, {"protocolNumber", m.irb.protocol_number}}},
            {"published", m.published},
            {"revision", m.revision}};
}

StudyMetadata decode_metadata(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    StudyMetadata m;
    m.study_id = r.string("id");
    m.title = r.string("title");
    m.description = r.optional_string("description");
    m.icon_name = r.optional_string("icon");
    {
        ObjectReader c(r.required("contact"), r.path("contact"));
        m.contact.organization = c.optional_string("organization");
        m.contact.researcher_name = c.optional_string("researcherName");
        m.contact.email = c.optional_string("email");
        m.contact.website = c.optional_string("website");
        c.finish();
    }
    {
        ObjectReader i(r.required("irb"), r.path("irb"));
        m.irb.board_name = i.optional_string("boardName");
        m.irb.protocol_number = i.optional_string("protocolNumber");
        i.finish();
    }
    if (r.optional("published")) m.published = r.boolean("published");
    if (r.optional("revision")) {
        m.revision = r.integer("revision");
        if (m.revision < 0) fail(ErrorCode::TypeMismatch, r.path("revision"), "revision must be >= 0");
    }
    r.finish();
    return m;
}

json encode_details(const StudyDetails& d) {
    json interventions = json::array();
    for (const auto& i : d.interventions.interventions) {
        json tasks = json::array();
        for (const auto& t : i.tasks) tasks.push_back(encode_task(t));
        interventions.push_back({{"id", i.intervention_id},
                                 {"name", i.name},
                                 {"description", i.description},
                                 {"icon", i.icon_name},
                                 {"tasks", std::move(tasks)}});
    }
    json observations = json::array();
    for (const auto& o : d.observations) {
        observations.push_back({{"id", o.observation_id}, {"title", o.title}, {"task", encode_task(o.task)}});
    }
    json questions = json::array();
    for (const auto& q : d.eligibility_questions) questions.push_back(encode_question(q));
    json criteria = json::array();
    for (const auto& c : d.eligibility_criteria) {
        criteria.push_back({{"id", c.criterion_id}, {"reason", c.reason}, {"expression", encode_expression(c.expression)}});
    }
    json consent = json::array();
    for (const auto& c : d.consent) {
        consent.push_back({{"id", c.item_id}, {"title", c.title}, {"text", c.text}, {"icon", c.icon_name}});
    }
    json secondary = json::array();
    for (const auto& s : d.report_specification.secondary) secondary.push_back(encode_section(s));
    json results = json::array();
    for (const auto& r : d.results) {
        results.push_back({{"id", r.export_id}, {"column", r.column_name}, {"data", encode_data_reference(r.reference)}});
    }
    return {{"interventionSet", {{"interventions", std::move(interventions)}}},
            {"observations", std::move(observations)},
            {"eligibilityQuestions", std::move(questions)},
            {"eligibilityCriteria", std::move(criteria)},
            {"schedule",
             {{"numberOfCycles", d.schedule.number_of_cycles},
              {"phaseDurationDays", d.schedule.phase_duration_days},
              {"includeBaseline", d.schedule.include_baseline},
              {"sequence", std::string(to_token(d.schedule.sequence))}}},
            {"consent", std::move(consent)},
            {"reportSpecification",
             {{"primary", encode_section(d.report_specification.primary)}, {"secondary", std::move(secondary)}}},
            {"results", std::move(results)},
            {"minimumStudyLengthDays", d.minimum_study_length_days}};
}

StudyDetails decode_details(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    StudyDetails d;
    {
        ObjectReader is(r.required("interventionSet"), r.path("interventionSet"));
        d.interventions.interventions = is.array("interventions", [](const json& n, const std::string& p) {
            ObjectReader ir(n, p);
            Intervention i;
            i.intervention_id = ir.string("id");
            i.name = ir.string("name");
            i.description = ir.optional_string("description");
            i.icon_name = ir.optional_string("icon");
            i.tasks = ir.array("tasks", decode_task);
            ir.finish();
            return i;
        });
        is.finish();
    }
    d.observations = r.array("observations", [](const json& n, const std::string& p) {
        ObjectReader orr(n, p);
        Observation o;
        o.observation_id = orr.string("id");
        o.title = orr.string("title");
        o.task = decode_task(orr.required("task"), orr.path("task"));
        orr.finish();
        return o;
    });
    d.eligibility_questions = r.array("eligibilityQuestions", decode_question);
    d.eligibility_criteria = r.array("eligibilityCriteria", [](const json& n, const std::string& p) {
        ObjectReader cr(n, p);
        EligibilityCriterion c;
        c.criterion_id = cr.string("id");
        c.reason = cr.string("reason");
        c.expression = decode_expression(cr.required("expression"), cr.path("expression"));
        cr.finish();
        return c;
    });
    {
        ObjectReader s(r.required("schedule"), r.path("schedule"));
        d.schedule.number_of_cycles = s.positive_int("numberOfCycles");
        d.schedule.phase_duration_days = s.positive_int("phaseDurationDays");
        d.schedule.include_baseline = s.boolean("includeBaseline");
        d.schedule.sequence = token_lookup(s.string("sequence"), kSequenceKinds, s.path("sequence"));
        s.finish();
    }
    d.consent = r.array("consent", [](const json& n, const std::string& p) {
        ObjectReader cr(n, p);
        ConsentItem c{cr.string("id"), cr.string("title"), cr.string("text"), cr.optional_string("icon")};
        cr.finish();
        return c;
    });
    {
        ObjectReader rs(r.required("reportSpecification"), r.path("reportSpecification"));
        d.report_specification.primary = decode_section(rs.required("primary"), rs.path("primary"));
        if (rs.optional("secondary")) d.report_specification.secondary = rs.array("secondary", decode_section);
        rs.finish();
    }
    d.results = r.array("results", [](const json& n, const std::string& p) {
        ObjectReader rr(n, p);
        StudyResult res;
        res.export_id = rr.string("id");
        res.column_name = rr.string("column");
        res.reference = decode_data_reference(rr.required("data"), rr.path("data"));
        rr.finish();
        return res;
    });
    d.minimum_study_length_days = r.positive_int("minimumStudyLengthDays");
    r.finish();
    return d;
}

Study decode_study(const json& doc) {
    if (!doc.is_object()) fail(ErrorCode::MalformedDocument, "$", "expected a JSON object");
    ObjectReader r(doc, "$");
    Study s;
    s.metadata = decode_metadata(r.required("metadata"), r.path("metadata"));
    s.details = decode_details(r.required("details"), r.path("details"));
    r.finish();
    return s;
}

Study parse_study(std::string_view bytes) {
    json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::MalformedDocument, "$", "not a JSON document");
    Study s = decode_study(doc);
    ValidationReport report = validate_study(s.details, s.metadata, false);
    if (report.error_count() > 0) {
        throw Error(ErrorCode::ValidationFailed, "study failed validation", encode_report(report));
    }
    return s;
}

json encode_study(const Study& study) {
    return {{"metadata", encode_metadata(study.metadata)}, {"details", encode_details(study.details)}};
}

std::string serialize_study(const Study& study) {
    return encode_study(study).dump(2) + "\n";
}

} // namespace studyu
