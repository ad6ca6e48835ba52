#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace legrag {

struct PromptTemplate {
    std::string name;   // file stem, e.g. "answer_generation"
    std::string text;
    std::string sha256; // of `text`
};

/// Built-in templates (the same text ships under prompts/ for inspection
/// and overriding). Hashes of the built-ins act as the pinned reference.
const PromptTemplate& answer_generation_template();
const PromptTemplate& judge_template();
const PromptTemplate& reflection_template();
const PromptTemplate& entity_extraction_template();

/// Replaces every "{slot}" occurrence. Unknown slots in the template are
/// left untouched; unused map entries are an error in tests, not here.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& slots);

struct TemplateSet {
    PromptTemplate answer;
    PromptTemplate judge;
    PromptTemplate reflection;
    PromptTemplate entity;
    /// One warning per template whose loaded text no longer matches the
    /// pinned built-in hash.
    std::vector<std::string> warnings;
};

/// Loads template overrides from a directory ("<name>.txt" per template),
/// falling back to the built-ins. Edited files are used as-is but produce a
/// hash-mismatch warning for the run manifest.
TemplateSet load_templates(const std::optional<std::string>& dir);

} // namespace legrag
