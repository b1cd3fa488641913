#include "sop/templates.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "sop/embedded_templates.hpp"
#include "sop/errors.hpp"

namespace sop {

namespace {

bool placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }

// Length of the placeholder starting at text[pos] == '{', or 0.
std::size_t placeholder_at(std::string_view text, std::size_t pos) {
    std::size_t end = pos + 1;
    while (end < text.size() && placeholder_char(text[end])) ++end;
    if (end == pos + 1 || end >= text.size() || text[end] != '}') return 0;
    return end - pos + 1;
}

std::vector<PromptTemplate> load_all() {
    static constexpr std::string_view kSeparator = "\n---\n";
    std::vector<PromptTemplate> out;
    for (const auto& [stem, raw] : embedded::kTemplates) {
        std::string_view content = raw;
        while (!content.empty() && content.back() == '\n') content.remove_suffix(1);
        PromptTemplate tpl;
        tpl.name = std::string(stem);
        if (const auto sep = content.find(kSeparator); sep != std::string_view::npos) {
            tpl.system = std::string(content.substr(0, sep));
            tpl.body = std::string(content.substr(sep + kSeparator.size()));
        } else {
            tpl.body = std::string(content);
        }
        out.push_back(std::move(tpl));
    }
    return out;
}

const std::vector<PromptTemplate>& all_templates() {
    static const std::vector<PromptTemplate> templates = load_all();
    return templates;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view name) {
    for (const auto& tpl : all_templates())
        if (tpl.name == name) return tpl;
    throw ConfigError("template", "no template named '" + std::string(name) + "'");
}

std::vector<std::string> template_names() {
    std::vector<std::string> names;
    for (const auto& tpl : all_templates()) names.push_back(tpl.name);
    return names;
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        if (const auto len = placeholder_at(text, i)) {
            names.emplace_back(text.substr(i + 1, len - 2));
            i += len - 1;
        }
    }
    return names;
}

std::string render_text(std::string_view text, const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto len = text[i] == '{' ? placeholder_at(text, i) : 0;
        if (len == 0) {
            out += text[i];
            continue;
        }
        const auto name = text.substr(i + 1, len - 2);
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw UnboundPlaceholder(std::string(name));
        out += it->second;
        i += len - 1;
    }
    return out;
}

RenderedPrompt render_template(const PromptTemplate& tpl, const Bindings& bindings) {
    return {render_text(tpl.system, bindings), render_text(tpl.body, bindings)};
}

RenderedPrompt render_template(std::string_view name, const Bindings& bindings) {
    return render_template(prompt_template(name), bindings);
}

std::string format_number(double value) {
    char buf[64];
    if (std::isfinite(value) && value == std::trunc(value) && std::fabs(value) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", value);
        return buf;
    }
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

Bindings problem_bindings(const WorldSpec& world, int budget) {
    if (world.dimension != 3)
        throw UnsupportedDimension("prompts describe f(x,y); dimension " +
                                   std::to_string(world.dimension) + " is not supported");
    if (world.bounds.size() != 2 || !(world.bounds[0] == world.bounds[1]))
        throw UnsupportedDimension("prompts require identical bounds on both axes");
    return {{"QUERY_BUDGET", std::to_string(budget)},
            {"DOMAIN_LO", format_number(world.bounds[0].lo)},
            {"DOMAIN_HI", format_number(world.bounds[0].hi)}};
}

}  // namespace sop
