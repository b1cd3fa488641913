#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sop/world.hpp"

namespace sop {

/// A prompt resource. `system` is the role-assignment message and is empty
/// for templates that continue an existing conversation.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string body;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

struct RenderedPrompt {
    std::string system;
    std::string user;
};

/// Throws ConfigError("template") for an unknown name.
const PromptTemplate& prompt_template(std::string_view name);
std::vector<std::string> template_names();

/// Names of the {UPPER_CASE} placeholders in `text`, in order of appearance.
std::vector<std::string> placeholders(std::string_view text);

/// Single-pass substitution; bound values are inserted literally and never
/// re-expanded. Throws UnboundPlaceholder for the first missing binding.
std::string render_text(std::string_view text, const Bindings& bindings);
RenderedPrompt render_template(const PromptTemplate& tpl, const Bindings& bindings);
RenderedPrompt render_template(std::string_view name, const Bindings& bindings);

/// "1000", "-1000", "12.5": integers without a fraction, else shortest form.
std::string format_number(double value);

/// QUERY_BUDGET, DOMAIN_LO and DOMAIN_HI for a world. The prompts describe a
/// square 2-D domain, so anything else throws UnsupportedDimension.
Bindings problem_bindings(const WorldSpec& world, int budget);

}  // namespace sop
