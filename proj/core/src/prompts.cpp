#include "toolweaver/prompts.hpp"

#include "toolweaver/errors.hpp"
#include "toolweaver/json_util.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace toolweaver {

std::string render_template(std::string_view text, const PromptVars& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            std::size_t j = i + 1;
            while (j < text.size() &&
                   (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                ++j;
            }
            if (j < text.size() && text[j] == '}' && j > i + 1) {
                const auto it = vars.find(text.substr(i + 1, j - i - 1));
                if (it != vars.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

const PromptTemplates& PromptTemplates::defaults() {
    static const PromptTemplates instance = [] {
        PromptTemplates t;
        for (const auto& [name, text] : builtin_templates()) t.templates_.emplace(name, text);
        return t;
    }();
    return instance;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
    PromptTemplates t = defaults();
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("template directory not found: " + dir.string());
    }
    for (const auto& [name, _] : builtin_templates()) {
        const auto path = dir / (name + ".txt");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read template " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        t.templates_[name] = buffer.str();
    }
    return t;
}

std::vector<std::string> PromptTemplates::names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : builtin_templates()) out.push_back(name);
    return out;
}

const std::string& PromptTemplates::raw(std::string_view name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw PreconditionError("unknown prompt template '" + std::string(name) + "'");
    return it->second;
}

GenerationRequest PromptTemplates::request(std::string_view name, std::string tag,
                                           const PromptVars& vars) const {
    const std::string& text = raw(name);
    std::string system;
    std::string user;
    const auto sep = text.find("\n---\n");
    if (sep == std::string::npos) {
        user = text;
    } else {
        system = text.substr(0, sep);
        user = text.substr(sep + 5);
    }
    return GenerationRequest::make(std::move(tag), trim(render_template(system, vars)),
                                   trim(render_template(user, vars)));
}

} // namespace toolweaver
