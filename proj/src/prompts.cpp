#include "ace/prompts.hpp"

#include <cctype>

#include "ace/errors.hpp"

namespace ace {

namespace {

const std::string kAreaGen = R"PT(You are an expert in designing capabilities to assess the abilities of large language models (LLMs). Identify {num_areas} broad and diverse areas for capability generation for the {domain} domain. Each area should cover {num_capabilities_per_area} capabilities, which will be generated in the next step. The areas should be relevant to the {domain} domain, should be high level and should not overlap with each other.

Respond precisely in the following format:

RESPONSE JSON:
{
    "area_0": <STR>,
    "area_1": <STR>,
    ...
})PT";

const std::string kCapGenSystem = R"PT(You are an expert in designing capabilities to assess the abilities of large language models (LLMs). Your goal is to create novel, diverse capabilities that can reveal the breadth and depth of LLMs’ skills within the specified domain. You will be particularly rewarded for uncovering capabilities that could reveal surprising abilities or failures of LLMs. Valid capabilities will be added to a capability archive. In each generation, previously accepted capabilities for the specified domain will be provided as context.

Each capability should be designed according to the METR Standard, which requires the following Python format:
class Capability:
    @staticmethod
    def repr_tasks() -> dict[str, dict]:
        # Returns a mapping from task ids to arbitrary data that is
        # specific to each capability.
        # Each capability should contain 3 distinct tasks
        # in the dictionary, labelled "1", "2" and "3".
        # Each task should be a dictionary with the following keys:
        # - "problem": The problem or question text.
        # - "answer": The expected answer to the problem.
        # ... implementation ...

    @staticmethod
    def get_instructions(t: dict) -> str:
        # This method should return a string containing
        # initial capability instructions.
        # ... implementation ...

    @staticmethod
    def score(t: dict, submission: str) -> float | None:
        # ‘score‘ is called after the subject model submits a solution.
        # Return 0 on failure and 1 on success.
        # Throwing an exception will result in a score of 0.
        # ... implementation ...

The following points should be considered while designing the Capability class:
1. The instructions should enforce the final answer in the form "ANSWER: $ANSWER" ONLY for those capabilities that expect a short and objective answer. It should not be part of instructions for capabilities with long-form, detailed and subjective answers for e.g. explanations, proofs, essays, etc.
2. If the instructions enforces the final answer in the form "ANSWER: $ANSWER", then the score function should first call a helper function to parse the submission string and extract the answer:
def parse_submission(submission: str) -> str:
    # Parse the submission string to extract the answer
    # based on the "ANSWER" keyword.
    # Return an empty string if no match is found.
3. The score function should use a helper function that uses LLM as a judge to score the submission:
def evaluate_with_llm_judge(
    submission: str,
    target: str,
) -> bool:
    # Evaluate the submission using an LLM judge.
4. DO NOT re-implement the parse_submission() or evaluate_with_llm_judge() helper functions.

Respond precisely in the following format, including the JSON start and end markers:

THOUGHT: <THOUGHT>

RESPONSE JSON:
{
    "capability_0": <JSON>,
    "capability_1": <JSON>,
    ...
}

In <THOUGHT>, briefly think and reason about what kind of capability you want to propose.
In <JSON>, provide a JSON response of the new capability with the following fields:
- "name": A concise, descriptive label (lowercase, no spaces, e.g., math_competition_algebra).
- "description": A clear explanation of what the capability entails (e.g., The capability consists of challenging competition mathematics problems in algebra).
- "domain": The domain to which the capability belongs to (e.g., math, physics, etc.).
- "class": The fully implemented Python code for the Capability class. This should be easily human-readable.

Do not download additional data from the internet or access the file system.

Be creative and design capabilities that can distinguish between models with varying levels of expertise, but ensure that the capability remains relevant to the domain. Also ensure that the proposed capabilities ARE DISTINCT compared to the existing capabilities. Names of all existing capabilities will be provided.

Your response will be automatically parsed so ensure it adheres to the specified format.)PT";

const std::string kCapGenUser = R"PT(A sample capability JSON is provided below. The names of all existing capabilities are also provided.

Sample capability:
{sample_capability_json}

Existing capability names:
{prev_capabilities}

Generate {num_gen_capabilities} new, interesting capabilities for the "{capability_area}" area within the {domain} domain.)PT";

const std::string kTaskGenSystem = R"PT(You are an expert in designing tasks for a given capability. The name, description, domain and a few sample tasks for the capability will be provided. You will be particularly rewarded for designing diverse tasks spanning a wide range of difficulty levels for the given capability.

Respond precisely in the following format, including the JSON start and end markers:

THOUGHT: <THOUGHT>
RESPONSE JSON:
{
    "task_1": <STR>,
    "task_2": <STR>,
    ...
}

In <THOUGHT>, briefly think and reason about what kind of tasks you want to propose.
In <STR>, provide a string containing the task text.

Be careful to make sure that all proposed tasks are unique. Also ensure that all tasks are within the scope of the given capability.
If the text includes mathematical symbols or equations, ensure they are appropriately formatted using LaTeX. Ensure the single backlash "\" included in a LateX string is escaped as "\\". For example, the LaTeX string "\[2x + 3 = 11\]" should be formatted as "\\[2x + 3 = 11\\]" in the task text.

Your response will be automatically parsed so ensure it adheres to the specified format.)PT";

const std::string kTaskGenUser = R"PT(Design tasks for the following capability:

Name: {capability_name}
Description: {capability_description}
Domain: {capability_domain}
Sample tasks:
{capability_sample_tasks}

Generate {num_gen_tasks} new tasks for the given capability.)PT";

const std::string kTaskSolver =
    R"PT(You are an expert in completing tasks for the {capability_name} capability in the {capability_domain} domain. Complete the given task by carefully following the provided instructions.)PT";

const std::string kTaskVerifierSystem = R"PT(You are an expert in evaluating answers to problems for the {capability_domain} domain. Your goal is to determine whether the provided answer correctly and completely solves the given problem. You must carefully analyze the problem and the answer, and provide a judgment along with your reasoning.

Respond precisely in the following format:

THOUGHT: <THOUGHT>
JUDGEMENT:
<JUDGEMENT>

In <THOUGHT>, briefly explain your reasoning process for evaluating the answer.
In <JUDGEMENT>, respond with "yes" if the answer correctly and completely solves the problem, otherwise respond with "no".

Be objective and thorough in your evaluation. Ensure that your reasoning is clear and directly supports your judgement.)PT";

const std::string kTaskVerifierUser = R"PT(Evaluate the following problem and answer for the {capability_name} capability in the {capability_domain} domain:

Problem: {problem}
Answer: {answer}

Determine if the answer correctly and completely solves the problem. Provide your reasoning and judgment.)PT";

bool identifier_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool identifier_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

const PromptTemplate& prompt_template(PromptRole role) {
    static const std::map<PromptRole, PromptTemplate> templates = {
        {PromptRole::AreaGen, {PromptRole::AreaGen, kAreaGen}},
        {PromptRole::CapGenSystem, {PromptRole::CapGenSystem, kCapGenSystem}},
        {PromptRole::CapGenUser, {PromptRole::CapGenUser, kCapGenUser}},
        {PromptRole::TaskGenSystem, {PromptRole::TaskGenSystem, kTaskGenSystem}},
        {PromptRole::TaskGenUser, {PromptRole::TaskGenUser, kTaskGenUser}},
        {PromptRole::TaskSolver, {PromptRole::TaskSolver, kTaskSolver}},
        {PromptRole::TaskVerifierSystem,
         {PromptRole::TaskVerifierSystem, kTaskVerifierSystem}},
        {PromptRole::TaskVerifierUser, {PromptRole::TaskVerifierUser, kTaskVerifierUser}},
    };
    return templates.at(role);
}

std::string transport_role(PromptRole role) {
    switch (role) {
        case PromptRole::AreaGen: return "area_gen";
        case PromptRole::CapGenSystem:
        case PromptRole::CapGenUser: return "cap_gen";
        case PromptRole::TaskGenSystem:
        case PromptRole::TaskGenUser: return "task_gen";
        case PromptRole::TaskSolver: return "task_solver";
        case PromptRole::TaskVerifierSystem:
        case PromptRole::TaskVerifierUser: return "task_verifier";
    }
    return "unknown";
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings) {
    const std::string& t = tmpl.text;
    std::string out;
    out.reserve(t.size());
    size_t i = 0;
    while (i < t.size()) {
        if (t[i] != '{') {
            out.push_back(t[i++]);
            continue;
        }
        size_t j = i + 1;
        if (j < t.size() && identifier_start(t[j])) {
            size_t k = j + 1;
            while (k < t.size() && identifier_char(t[k])) ++k;
            if (k < t.size() && t[k] == '}') {
                std::string name = t.substr(j, k - j);
                auto it = bindings.find(name);
                if (it == bindings.end())
                    throw ValidationError("unbound placeholder '" + name + "'");
                out += it->second;
                i = k + 1;
                continue;
            }
        }
        out.push_back(t[i++]);
    }
    return out;
}

}  // namespace ace
