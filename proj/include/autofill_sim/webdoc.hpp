#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autofill_sim/domain.hpp"

namespace autofill_sim {

enum class FieldKind { Username, Password, Text, Other };

std::string to_string(FieldKind kind);

struct Field {
    std::string name;
    FieldKind kind = FieldKind::Text;
    std::string other_type;  // original type string when kind == Other
    bool visible = true;
    bool autocomplete_off = false;
    std::optional<std::string> value;

    bool operator==(const Field&) const = default;
};

enum class Method { Get, Post };

std::string to_string(Method m);

struct Form {
    Origin action_origin;
    std::string action_path;
    Method method = Method::Post;
    std::vector<Field> fields;

    bool operator==(const Form&) const = default;
};

enum class ScriptPhase { OnLoad, PreFill, PostFill };
enum class ScriptAction { RewriteAction, ScrapeFields, ExfiltrateTo, PostToBridge };
enum class ScriptOrigin { Page, HostApp };

std::string to_string(ScriptPhase p);
std::string to_string(ScriptAction a);
std::string to_string(ScriptOrigin o);

struct ScriptEvent {
    ScriptPhase phase = ScriptPhase::OnLoad;
    ScriptAction action = ScriptAction::ScrapeFields;
    ScriptOrigin injected_by = ScriptOrigin::Page;
    std::size_t form_index = 0;     // RewriteAction, ScrapeFields
    Origin to_origin;               // RewriteAction, ExfiltrateTo
    std::string to_path;            // RewriteAction
    std::string channel;            // PostToBridge

    bool operator==(const ScriptEvent&) const = default;
};

struct Frame;

struct Document {
    Origin origin;
    std::vector<Form> forms;
    std::vector<Frame> frames;
    std::vector<ScriptEvent> scripts;
};

struct Frame {
    Origin origin;
    std::string path;  // source path within the frame origin's domain
    Document doc;      // placeholder until the scene links it
};

bool operator==(const Document& a, const Document& b);
inline bool operator==(const Frame& a, const Frame& b) {
    return a.origin == b.origin && a.path == b.path && a.doc == b.doc;
}

// Path of frame indices from the top document; empty means the top itself.
using FramePath = std::vector<std::size_t>;

struct FormRef {
    FramePath frame_path;
    std::size_t form_index = 0;

    bool operator==(const FormRef&) const = default;
};

struct Detection {
    FormRef ref;
    std::string username_field;
    std::string password_field;

    bool operator==(const Detection&) const = default;
};

struct OutboundRequest {
    Origin destination;
    std::string path;
    Method method = Method::Post;
    std::map<std::string, std::string> body_params;
    std::map<std::string, std::string> url_params;

    bool operator==(const OutboundRequest&) const = default;
};

struct Exfiltration {
    enum class Sink { Network, Bridge };

    Sink sink = Sink::Network;
    Origin destination;            // Network sink
    std::string bridge_channel;    // Bridge sink
    std::map<std::string, std::string> values;
    ScriptOrigin injected_by = ScriptOrigin::Page;
};

// Values currently sitting in fields, keyed by (form index, field name)
// within one document. Overrides any static field value.
struct FillState {
    std::map<std::pair<std::size_t, std::string>, std::string> values;

    bool empty() const { return values.empty(); }
    void set(std::size_t form_index, const std::string& field, std::string value) {
        values[{form_index, field}] = std::move(value);
    }
    std::optional<std::string> get(std::size_t form_index, const std::string& field) const;
};

// Scratch state shared by script events across phases of one ceremony.
struct ScriptVm {
    std::map<std::string, std::string> scraped;
};

// Secret substitutions for fill-on-transmission, pinned to the action origin
// observed when the fill decision was made.
struct SubstitutionMap {
    Origin issued_for;
    std::map<std::string, Secret> tokens;  // placeholder -> secret
};

// --- URL handling (scheme http | https | https! for an invalid cert) ---
struct UrlParts {
    Origin origin;
    std::string path;
};

UrlParts parse_url(std::string_view url);
std::string render_url(const Origin& origin, const std::string& path);

// --- Placeholder tokens for fill-on-transmission ---
std::string make_placeholder(const std::string& credential_id, const std::string& nonce);
bool is_placeholder(std::string_view value);
bool contains_placeholder(std::string_view value);
// Credential id inside a placeholder token, or nullopt.
std::optional<std::string> placeholder_credential_id(std::string_view value);

// --- Operations ---
Document parse_document(std::string_view source, const Origin& origin);

std::vector<Detection> detect_login_form(const Document& doc);
std::vector<Detection> detect_all(const Document& doc);

const Document& document_at(const Document& top, const FramePath& path);
Document& document_at(Document& top, const FramePath& path);

// A form reference is cross-origin when the document holding it is not
// same-origin with the top document.
bool is_cross_origin(const Document& top, const FramePath& path);

// Deepest nesting level; a bare document has depth 1.
std::size_t frame_depth(const Document& doc);
void validate_frame_depth(const Document& doc, std::size_t max_depth = 8);

// Effective value of a field: fill state wins over the static value.
std::optional<std::string> effective_value(const Document& doc, const FillState& fill,
                                           std::size_t form_index, const Field& field);

std::vector<Exfiltration> run_script_phase(Document& doc, ScriptPhase phase,
                                           const FillState& fill, ScriptVm& vm,
                                           bool host_scripts_allowed);

OutboundRequest submit_form(const Document& doc, std::size_t form_index, const FillState& fill,
                            const std::optional<SubstitutionMap>& substitution);

}  // namespace autofill_sim
