#pragma once

#include <map>
#include <string>

namespace ace {

enum class PromptRole {
    AreaGen,
    CapGenSystem,
    CapGenUser,
    TaskGenSystem,
    TaskGenUser,
    TaskSolver,
    TaskVerifierSystem,
    TaskVerifierUser,
};

struct PromptTemplate {
    PromptRole role;
    std::string text;
};

/// The shipped prompt text for a pipeline stage.
const PromptTemplate& prompt_template(PromptRole role);

/// Transport key for fixture lookup ("area_gen", "cap_gen", ...). System and
/// user prompts of one stage share a key since they form a single request.
std::string transport_role(PromptRole role);

/// Substitutes every {identifier} placeholder from `bindings` in one pass;
/// inserted values are never rescanned. Braces not forming a placeholder are
/// left untouched. A placeholder with no binding is an error.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings);

}  // namespace ace
