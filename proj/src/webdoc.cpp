#include "autofill_sim/webdoc.hpp"

#include <algorithm>
#include <cctype>

#include "autofill_sim/errors.hpp"

namespace autofill_sim {

namespace {

constexpr std::string_view kPlaceholderOpen = "⟦PH:";   // ⟦PH:
constexpr std::string_view kPlaceholderClose = "⟧";     // ⟧

}  // namespace

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::Username: return "username";
        case FieldKind::Password: return "password";
        case FieldKind::Text: return "text";
        case FieldKind::Other: return "other";
    }
    return "other";
}

std::string to_string(Method m) { return m == Method::Get ? "get" : "post"; }

std::string to_string(ScriptPhase p) {
    switch (p) {
        case ScriptPhase::OnLoad: return "onload";
        case ScriptPhase::PreFill: return "prefill";
        case ScriptPhase::PostFill: return "postfill";
    }
    return "onload";
}

std::string to_string(ScriptAction a) {
    switch (a) {
        case ScriptAction::RewriteAction: return "rewrite-action";
        case ScriptAction::ScrapeFields: return "scrape-fields";
        case ScriptAction::ExfiltrateTo: return "exfiltrate-to";
        case ScriptAction::PostToBridge: return "post-to-bridge";
    }
    return "scrape-fields";
}

std::string to_string(ScriptOrigin o) { return o == ScriptOrigin::Page ? "page" : "host-app"; }

bool operator==(const Document& a, const Document& b) {
    return a.origin == b.origin && a.forms == b.forms && a.frames == b.frames &&
           a.scripts == b.scripts;
}

std::optional<std::string> FillState::get(std::size_t form_index, const std::string& field) const {
    auto it = values.find({form_index, field});
    if (it == values.end()) return std::nullopt;
    return it->second;
}

// --- URLs ---

UrlParts parse_url(std::string_view url) {
    ConnectionSecurity sec;
    std::string_view rest;
    if (url.substr(0, 9) == "https!://") {
        sec = ConnectionSecurity::bad_cert();
        rest = url.substr(9);
    } else if (url.substr(0, 8) == "https://") {
        sec = ConnectionSecurity::https();
        rest = url.substr(8);
    } else if (url.substr(0, 7) == "http://") {
        sec = ConnectionSecurity::http();
        rest = url.substr(7);
    } else {
        throw InvariantError("unsupported url scheme in \"" + std::string(url) + "\"");
    }
    std::string host;
    std::string path = "/";
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) {
        host = std::string(rest);
    } else {
        host = std::string(rest.substr(0, slash));
        path = std::string(rest.substr(slash));
    }
    if (host.empty()) throw InvariantError("url \"" + std::string(url) + "\" has no host");
    return UrlParts{Origin{DomainName::parse(host), sec}, path};
}

std::string render_url(const Origin& origin, const std::string& path) {
    return origin.str() + path;
}

// --- Placeholders ---

std::string make_placeholder(const std::string& credential_id, const std::string& nonce) {
    std::string out(kPlaceholderOpen);
    out += credential_id;
    out += ':';
    out += nonce;
    out += kPlaceholderClose;
    return out;
}

bool is_placeholder(std::string_view value) {
    return value.size() > kPlaceholderOpen.size() + kPlaceholderClose.size() &&
           value.substr(0, kPlaceholderOpen.size()) == kPlaceholderOpen &&
           value.substr(value.size() - kPlaceholderClose.size()) == kPlaceholderClose;
}

bool contains_placeholder(std::string_view value) {
    return value.find(kPlaceholderOpen) != std::string_view::npos;
}

std::optional<std::string> placeholder_credential_id(std::string_view value) {
    if (!is_placeholder(value)) return std::nullopt;
    auto inner = value.substr(kPlaceholderOpen.size(),
                              value.size() - kPlaceholderOpen.size() - kPlaceholderClose.size());
    auto colon = inner.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    return std::string(inner.substr(0, colon));
}

// --- Parser ---

namespace {

struct Parser {
    std::string_view src;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool done() const { return pos >= src.size(); }
    char peek() const { return src[pos]; }

    char take() {
        char c = src[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line, col); }
    [[noreturn]] void fail_at(const std::string& msg, int l, int c) const {
        throw ParseError(msg, l, c);
    }

    void skip_ws() {
        while (!done() && std::isspace(static_cast<unsigned char>(peek()))) take();
    }

    bool looking_at(std::string_view text) const { return src.substr(pos, text.size()) == text; }

    void expect(char c, const std::string& what) {
        if (done() || peek() != c) fail("expected '" + std::string(1, c) + "' " + what);
        take();
    }

    std::string take_name() {
        std::string name;
        while (!done()) {
            char c = peek();
            if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-') {
                name.push_back(take());
            } else {
                break;
            }
        }
        if (name.empty()) fail("expected a tag or attribute name");
        return name;
    }

    // attribute map in declaration order; bare attributes get value "".
    std::vector<std::pair<std::string, std::string>> take_attrs(bool& self_closed) {
        std::vector<std::pair<std::string, std::string>> attrs;
        self_closed = false;
        while (true) {
            skip_ws();
            if (done()) fail("unterminated tag");
            if (peek() == '>') {
                take();
                return attrs;
            }
            if (looking_at("/>")) {
                take();
                take();
                self_closed = true;
                return attrs;
            }
            std::string name = take_name();
            skip_ws();
            std::string value;
            if (!done() && peek() == '=') {
                take();
                skip_ws();
                expect('"', "to open an attribute value");
                while (!done() && peek() != '"') value.push_back(take());
                expect('"', "to close the attribute value");
            }
            attrs.emplace_back(std::move(name), std::move(value));
        }
    }
};

struct TagAttrs {
    std::vector<std::pair<std::string, std::string>> attrs;
    int line;
    int col;

    std::optional<std::string> find(std::string_view name) const {
        for (const auto& [k, v] : attrs) {
            if (k == name) return v;
        }
        return std::nullopt;
    }

    std::string require(Parser& p, std::string_view tag, std::string_view name) const {
        auto v = find(name);
        if (!v)
            p.fail_at("<" + std::string(tag) + "> is missing the \"" + std::string(name) +
                          "\" attribute",
                      line, col);
        return *v;
    }

    void allow_only(Parser& p, std::string_view tag,
                    std::initializer_list<std::string_view> allowed) const {
        for (const auto& [k, v] : attrs) {
            (void)v;
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                p.fail_at("attribute \"" + k + "\" is not allowed on <" + std::string(tag) + ">",
                          line, col);
        }
    }
};

UrlParts parse_url_attr(Parser& p, const TagAttrs& tag, const std::string& raw) {
    try {
        return parse_url(raw);
    } catch (const InvariantError& e) {
        p.fail_at(e.what(), tag.line, tag.col);
    }
}

Field parse_input(Parser& p, const TagAttrs& tag) {
    tag.allow_only(p, "input", {"type", "name", "autocomplete", "hidden"});
    Field f;
    f.name = tag.require(p, "input", "name");
    std::string type = tag.require(p, "input", "type");
    if (type == "password") {
        f.kind = FieldKind::Password;
    } else if (type == "text") {
        f.kind = FieldKind::Text;
    } else {
        f.kind = FieldKind::Other;
        f.other_type = type;
    }
    if (auto ac = tag.find("autocomplete")) {
        if (*ac == "off")
            f.autocomplete_off = true;
        else if (*ac != "on")
            p.fail_at("autocomplete must be \"on\" or \"off\"", tag.line, tag.col);
    }
    if (tag.find("hidden")) f.visible = false;
    return f;
}

ScriptEvent parse_script_event(Parser& p, const TagAttrs& tag) {
    tag.allow_only(p, "script-event", {"phase", "action", "to", "form", "channel", "by"});
    ScriptEvent ev;

    std::string phase = tag.require(p, "script-event", "phase");
    if (phase == "onload")
        ev.phase = ScriptPhase::OnLoad;
    else if (phase == "prefill")
        ev.phase = ScriptPhase::PreFill;
    else if (phase == "postfill")
        ev.phase = ScriptPhase::PostFill;
    else
        p.fail_at("unknown script phase \"" + phase + "\"", tag.line, tag.col);

    std::string action = tag.require(p, "script-event", "action");
    if (action == "rewrite-action") {
        ev.action = ScriptAction::RewriteAction;
        auto url = parse_url_attr(p, tag, tag.require(p, "script-event", "to"));
        ev.to_origin = url.origin;
        ev.to_path = url.path;
    } else if (action == "scrape-fields") {
        ev.action = ScriptAction::ScrapeFields;
    } else if (action == "exfiltrate-to") {
        ev.action = ScriptAction::ExfiltrateTo;
        auto url = parse_url_attr(p, tag, tag.require(p, "script-event", "to"));
        ev.to_origin = url.origin;
        ev.to_path = url.path;
    } else if (action == "post-to-bridge") {
        ev.action = ScriptAction::PostToBridge;
        ev.channel = tag.require(p, "script-event", "channel");
    } else {
        p.fail_at("unknown script action \"" + action + "\"", tag.line, tag.col);
    }

    if (ev.action == ScriptAction::RewriteAction || ev.action == ScriptAction::ScrapeFields) {
        std::string form = tag.require(p, "script-event", "form");
        try {
            ev.form_index = static_cast<std::size_t>(std::stoul(form));
        } catch (const std::exception&) {
            p.fail_at("form attribute must be a non-negative integer", tag.line, tag.col);
        }
    }

    if (auto by = tag.find("by")) {
        if (*by == "page")
            ev.injected_by = ScriptOrigin::Page;
        else if (*by == "host-app")
            ev.injected_by = ScriptOrigin::HostApp;
        else
            p.fail_at("by must be \"page\" or \"host-app\"", tag.line, tag.col);
    }
    return ev;
}

}  // namespace

Document parse_document(std::string_view source, const Origin& origin) {
    Parser p{source};
    Document doc;
    doc.origin = origin;
    Form* open_form = nullptr;

    while (true) {
        // Free text between tags is ignored.
        while (!p.done() && p.peek() != '<') p.take();
        if (p.done()) break;

        if (p.looking_at("<!--")) {
            int l = p.line, c = p.col;
            while (!p.done() && !p.looking_at("-->")) p.take();
            if (p.done()) p.fail_at("unterminated comment", l, c);
            p.take();
            p.take();
            p.take();
            continue;
        }

        int tag_line = p.line, tag_col = p.col;
        p.take();  // '<'
        if (!p.done() && p.peek() == '/') {
            p.take();
            std::string name = p.take_name();
            p.skip_ws();
            p.expect('>', "to close the end tag");
            if (name == "form") {
                if (!open_form) p.fail_at("</form> without an open <form>", tag_line, tag_col);
                if (open_form->fields.empty())
                    p.fail_at("a form needs at least one field", tag_line, tag_col);
                open_form = nullptr;
            } else if (name == "iframe") {
                // tolerated as the empty-body close of the preceding iframe
                if (doc.frames.empty())
                    p.fail_at("</iframe> without an open <iframe>", tag_line, tag_col);
            } else {
                p.fail_at("unexpected end tag </" + name + ">", tag_line, tag_col);
            }
            continue;
        }

        std::string name = p.take_name();
        bool self_closed = false;
        TagAttrs tag{p.take_attrs(self_closed), tag_line, tag_col};

        if (name == "form") {
            if (open_form) p.fail_at("<form> may not nest", tag_line, tag_col);
            if (self_closed) p.fail_at("<form> may not self-close", tag_line, tag_col);
            tag.allow_only(p, "form", {"action", "method"});
            Form form;
            auto url = parse_url_attr(p, tag, tag.require(p, "form", "action"));
            form.action_origin = url.origin;
            form.action_path = url.path;
            std::string method = tag.require(p, "form", "method");
            if (method == "get")
                form.method = Method::Get;
            else if (method == "post")
                form.method = Method::Post;
            else
                p.fail_at("method must be \"get\" or \"post\"", tag_line, tag_col);
            doc.forms.push_back(std::move(form));
            open_form = &doc.forms.back();
        } else if (name == "input") {
            if (!open_form) p.fail_at("<input> must appear inside <form>", tag_line, tag_col);
            open_form->fields.push_back(parse_input(p, tag));
        } else if (name == "iframe") {
            if (open_form) p.fail_at("<iframe> may not appear inside <form>", tag_line, tag_col);
            tag.allow_only(p, "iframe", {"src"});
            auto url = parse_url_attr(p, tag, tag.require(p, "iframe", "src"));
            Frame frame;
            frame.origin = url.origin;
            frame.path = url.path;
            frame.doc.origin = url.origin;  // linked to real content by the scene
            doc.frames.push_back(std::move(frame));
        } else if (name == "script-event") {
            if (open_form)
                p.fail_at("<script-event> may not appear inside <form>", tag_line, tag_col);
            doc.scripts.push_back(parse_script_event(p, tag));
        } else {
            throw UnsupportedTagError("unsupported tag <" + name + ">", tag_line, tag_col);
        }
    }
    if (open_form) p.fail("unterminated <form>");
    return doc;
}

// --- Detection ---

namespace {

void detect_in(const Document& doc, const FramePath& path, std::vector<Detection>& out,
               bool recurse) {
    for (std::size_t fi = 0; fi < doc.forms.size(); ++fi) {
        const Form& form = doc.forms[fi];
        std::vector<std::size_t> password_at;
        for (std::size_t i = 0; i < form.fields.size(); ++i) {
            if (form.fields[i].kind == FieldKind::Password) password_at.push_back(i);
        }
        if (password_at.size() != 1) continue;
        std::size_t pw = password_at.front();
        // Nearest non-password field before the password; if none precedes,
        // the nearest one after it.
        std::optional<std::size_t> user;
        for (std::size_t i = pw; i-- > 0;) {
            if (form.fields[i].kind != FieldKind::Password) {
                user = i;
                break;
            }
        }
        if (!user) {
            for (std::size_t i = pw + 1; i < form.fields.size(); ++i) {
                if (form.fields[i].kind != FieldKind::Password) {
                    user = i;
                    break;
                }
            }
        }
        if (!user) continue;  // password-only form
        out.push_back(Detection{FormRef{path, fi}, form.fields[*user].name,
                                form.fields[pw].name});
    }
    if (recurse) {
        for (std::size_t i = 0; i < doc.frames.size(); ++i) {
            FramePath sub = path;
            sub.push_back(i);
            detect_in(doc.frames[i].doc, sub, out, true);
        }
    }
}

}  // namespace

std::vector<Detection> detect_login_form(const Document& doc) {
    std::vector<Detection> out;
    detect_in(doc, {}, out, false);
    return out;
}

std::vector<Detection> detect_all(const Document& doc) {
    std::vector<Detection> out;
    detect_in(doc, {}, out, true);
    return out;
}

const Document& document_at(const Document& top, const FramePath& path) {
    const Document* doc = &top;
    for (std::size_t idx : path) {
        if (idx >= doc->frames.size()) throw ReferenceError("frame path leaves the document");
        doc = &doc->frames[idx].doc;
    }
    return *doc;
}

Document& document_at(Document& top, const FramePath& path) {
    return const_cast<Document&>(document_at(static_cast<const Document&>(top), path));
}

bool is_cross_origin(const Document& top, const FramePath& path) {
    const Document& holder = document_at(top, path);
    return !holder.origin.same_origin(top.origin);
}

std::size_t frame_depth(const Document& doc) {
    std::size_t deepest = 1;
    for (const auto& frame : doc.frames) deepest = std::max(deepest, 1 + frame_depth(frame.doc));
    return deepest;
}

void validate_frame_depth(const Document& doc, std::size_t max_depth) {
    if (frame_depth(doc) > max_depth)
        throw InvariantError("frame nesting exceeds depth " + std::to_string(max_depth));
}

std::optional<std::string> effective_value(const Document& doc, const FillState& fill,
                                           std::size_t form_index, const Field& field) {
    if (auto filled = fill.get(form_index, field.name)) return filled;
    if (field.value) return field.value;
    (void)doc;
    return std::nullopt;
}

// --- Script engine ---

std::vector<Exfiltration> run_script_phase(Document& doc, ScriptPhase phase, const FillState& fill,
                                           ScriptVm& vm, bool host_scripts_allowed) {
    std::vector<Exfiltration> out;
    for (const ScriptEvent& ev : doc.scripts) {
        if (ev.phase != phase) continue;
        if (ev.injected_by == ScriptOrigin::HostApp && !host_scripts_allowed)
            throw UnsupportedContextError(
                "host-app script events are only executable inside a webview");
        switch (ev.action) {
            case ScriptAction::RewriteAction: {
                if (ev.form_index >= doc.forms.size())
                    throw BadFormIndexError("script targets form " +
                                            std::to_string(ev.form_index) + " of " +
                                            std::to_string(doc.forms.size()));
                doc.forms[ev.form_index].action_origin = ev.to_origin;
                doc.forms[ev.form_index].action_path = ev.to_path;
                break;
            }
            case ScriptAction::ScrapeFields: {
                if (ev.form_index >= doc.forms.size())
                    throw BadFormIndexError("script targets form " +
                                            std::to_string(ev.form_index) + " of " +
                                            std::to_string(doc.forms.size()));
                const Form& form = doc.forms[ev.form_index];
                for (const Field& field : form.fields) {
                    if (auto v = effective_value(doc, fill, ev.form_index, field))
                        vm.scraped[field.name] = *v;
                }
                break;
            }
            case ScriptAction::ExfiltrateTo: {
                Exfiltration ex;
                ex.sink = Exfiltration::Sink::Network;
                ex.destination = ev.to_origin;
                ex.values = vm.scraped;
                ex.injected_by = ev.injected_by;
                out.push_back(std::move(ex));
                break;
            }
            case ScriptAction::PostToBridge: {
                Exfiltration ex;
                ex.sink = Exfiltration::Sink::Bridge;
                ex.bridge_channel = ev.channel;
                ex.values = vm.scraped;
                ex.injected_by = ev.injected_by;
                out.push_back(std::move(ex));
                break;
            }
        }
    }
    return out;
}

// --- Submission ---

OutboundRequest submit_form(const Document& doc, std::size_t form_index, const FillState& fill,
                            const std::optional<SubstitutionMap>& substitution) {
    if (form_index >= doc.forms.size())
        throw BadFormIndexError("submit targets form " + std::to_string(form_index) + " of " +
                                std::to_string(doc.forms.size()));
    const Form& form = doc.forms[form_index];

    std::map<std::string, std::string> params;
    for (const Field& field : form.fields) {
        auto v = effective_value(doc, fill, form_index, field);
        if (!v) continue;
        std::string value = *v;
        if (contains_placeholder(value)) {
            if (substitution) {
                // Substitutions are pinned to the action origin observed at
                // fill time; a rewritten action gets nothing.
                if (!(form.action_origin == substitution->issued_for))
                    throw MissingSubstitutionError(
                        "substitution map was issued for " + substitution->issued_for.str() +
                        " but the form now targets " + form.action_origin.str());
                auto it = substitution->tokens.find(value);
                if (it == substitution->tokens.end())
                    throw MissingSubstitutionError("no substitution for placeholder in field \"" +
                                                   field.name + "\"");
                value = it->second.reveal();
            }
            // Without a substitution map the placeholder goes out as-is: it
            // carries no secret.
        }
        params[field.name] = std::move(value);
    }

    OutboundRequest req;
    req.destination = form.action_origin;
    req.path = form.action_path;
    req.method = form.method;
    if (form.method == Method::Get)
        req.url_params = std::move(params);
    else
        req.body_params = std::move(params);
    return req;
}

}  // namespace autofill_sim
