#include "sop/response.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>
#include <vector>

namespace sop {

std::string_view to_string(ResponseField field) {
    switch (field) {
        case ResponseField::Strategy: return "MY_CURRENT_STRATEGY";
        case ResponseField::MaxSeen: return "MAX_SEEN_SO_FAR";
        case ResponseField::Next: return "NEXT";
    }
    return "?";
}

namespace {

struct Line {
    std::size_t begin;  // offset of the line in the source text
    std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back({pos, line});
        pos = end + 1;
    }
    return lines;
}

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool decoration(char c) { return c == '*' || c == '_' || c == '#' || c == '`' || c == ' '; }

struct LabelHit {
    ResponseField field;
    std::string rest;  // text after the colon
};

// Recognises "- **MY\_CURRENT\_STRATEGY**: ..." and similar.
std::optional<LabelHit> match_label(std::string_view raw) {
    std::string line;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 1 < raw.size() && raw[i + 1] == '_') continue;
        line += raw[i];
    }
    std::size_t p = 0;
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    if (p < line.size() && (line[p] == '-' || line[p] == '+' ||
                            (line[p] == '*' && p + 1 < line.size() && line[p + 1] == ' '))) {
        ++p;
    } else if (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p]))) {
        auto q = p;
        while (q < line.size() && std::isdigit(static_cast<unsigned char>(line[q]))) ++q;
        if (q < line.size() && (line[q] == '.' || line[q] == ')')) p = q + 1;
    }
    while (p < line.size() && decoration(line[p])) ++p;

    static constexpr std::pair<std::string_view, ResponseField> kLabels[] = {
        {"MY_CURRENT_STRATEGY", ResponseField::Strategy},
        {"MAX_SEEN_SO_FAR", ResponseField::MaxSeen},
        {"NEXT", ResponseField::Next},
    };
    for (const auto& [label, field] : kLabels) {
        if (line.size() - p < label.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < label.size() && same; ++i) {
            char c = line[p + i];
            // "Next:" is common in prose, so only the long labels are case-insensitive.
            if (field != ResponseField::Next) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (c == ' ') c = '_';
            same = c == label[i];
        }
        if (!same) continue;
        auto q = p + label.size();
        while (q < line.size() && decoration(line[q])) ++q;
        if (q >= line.size() || line[q] != ':') continue;
        ++q;
        while (q < line.size() && (line[q] == '*' || line[q] == '_')) ++q;
        return LabelHit{field, trim(std::string_view(line).substr(q))};
    }
    return std::nullopt;
}

std::vector<double> numbers_in(const std::string& text) {
    static const std::regex kNumber(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");
    std::vector<double> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kNumber);
         it != std::sregex_iterator(); ++it) {
        const std::string tok = it->str();
        double v = 0.0;
        const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
        std::from_chars(first, tok.data() + tok.size(), v);
        out.push_back(v);
    }
    return out;
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::variant<AgentResponse, ParseError> parse_response(std::string_view text) {
    const auto lines = split_lines(text);

    struct Section {
        ResponseField field;
        std::size_t line;
        std::string first;
    };
    std::vector<Section> sections;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (auto hit = match_label(lines[i].text)) sections.push_back({hit->field, i, hit->rest});

    const auto find = [&](ResponseField f) -> const Section* {
        for (const auto& s : sections)
            if (s.field == f) return &s;
        return nullptr;
    };
    const auto section_text = [&](const Section& s) {
        std::size_t end = lines.size();
        for (const auto& other : sections)
            if (other.line > s.line) {
                end = other.line;
                break;
            }
        std::string out = s.first;
        for (std::size_t i = s.line + 1; i < end; ++i) {
            out += '\n';
            out += lines[i].text;
        }
        return trim(out);
    };

    AgentResponse response;

    const Section* next = find(ResponseField::Next);
    if (!next) return ParseError{ResponseField::Next, "the NEXT label is missing"};
    {
        std::size_t open = std::string_view::npos;
        std::size_t code_begin = 0;
        // The fence may follow the colon on the label line itself.
        const auto inline_pos = lines[next->line].text.find("```");
        if (inline_pos != std::string_view::npos) {
            open = lines[next->line].begin + inline_pos;
        } else {
            for (std::size_t i = next->line + 1; i < lines.size(); ++i) {
                const auto t = trim(lines[i].text);
                if (t.rfind("```", 0) == 0) {
                    open = lines[i].begin + lines[i].text.find("```");
                    break;
                }
            }
        }
        if (open == std::string_view::npos)
            return ParseError{ResponseField::Next, "no fenced code block follows the NEXT label"};
        const auto eol = text.find('\n', open);
        if (eol == std::string_view::npos)
            return ParseError{ResponseField::Next, "the code block after NEXT is not terminated"};
        code_begin = eol + 1;
        std::size_t close = std::string_view::npos;
        for (std::size_t pos = code_begin; pos < text.size();) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            if (trim(text.substr(pos, end - pos)).rfind("```", 0) == 0) {
                close = pos;
                break;
            }
            pos = end + 1;
        }
        if (close == std::string_view::npos)
            return ParseError{ResponseField::Next, "the code block after NEXT is not terminated"};
        std::string code(text.substr(code_begin, close - code_begin));
        while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.pop_back();
        if (trim(code).empty())
            return ParseError{ResponseField::Next, "the code block after NEXT is empty"};
        response.code = std::move(code);
    }

    const Section* strategy = find(ResponseField::Strategy);
    if (!strategy) return ParseError{ResponseField::Strategy, "the MY_CURRENT_STRATEGY label is missing"};
    response.strategy = section_text(*strategy);
    if (response.strategy.empty())
        return ParseError{ResponseField::Strategy, "MY_CURRENT_STRATEGY is empty"};

    if (const Section* seen = find(ResponseField::MaxSeen)) {
        const auto nums = numbers_in(section_text(*seen));
        if (nums.size() >= 3) {
            for (double v : nums)
                if (!std::isfinite(v))
                    return ParseError{ResponseField::MaxSeen, "MAX_SEEN_SO_FAR has a non-finite number"};
            response.max_seen = MaxSeen{{nums[0], nums[1]}, nums.back()};
        } else if (!nums.empty()) {
            return ParseError{ResponseField::MaxSeen,
                              "MAX_SEEN_SO_FAR needs x, y and f(x,y) but has " +
                                  std::to_string(nums.size()) + " number(s)"};
        }
    }
    return response;
}

std::string format_response(const AgentResponse& response) {
    std::string out = "MY_CURRENT_STRATEGY: " + response.strategy + "\nMAX_SEEN_SO_FAR: ";
    if (response.max_seen) {
        for (double c : response.max_seen->point) out += shortest(c) + ", ";
        out += shortest(response.max_seen->value);
    } else {
        out += "none";
    }
    out += "\nNEXT:\n```python\n" + response.code + "\n```\n";
    return out;
}

}  // namespace sop
