#pragma once

#include "toolweaver/backend.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace toolweaver {

using PromptVars = std::map<std::string, std::string, std::less<>>;

/// Replaces every `{name}` whose name is a key of `vars`. Other braces (JSON examples,
/// unknown names) are left untouched.
std::string render_template(std::string_view text, const PromptVars& vars);

/// Named prompt templates. Each template holds a system part and a user part separated by a
/// line containing only "---". Defaults are compiled in from core/templates/*.txt.
class PromptTemplates {
public:
    static const PromptTemplates& defaults();

    /// Defaults, overridden by any `<name>.txt` present in `dir`.
    static PromptTemplates load_dir(const std::filesystem::path& dir);

    /// Names of all shipped templates.
    static std::vector<std::string> names();

    const std::string& raw(std::string_view name) const;

    /// Renders template `name` into a system + user request tagged `tag`.
    GenerationRequest request(std::string_view name, std::string tag, const PromptVars& vars) const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

/// Compiled-in template text keyed by name (generated at build time).
const std::map<std::string, std::string, std::less<>>& builtin_templates();

} // namespace toolweaver
