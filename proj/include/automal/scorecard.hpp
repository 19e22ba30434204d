#pragma once

#include <array>
#include <string>
#include <vector>

namespace automal {

// The five fixed questionnaire categories, in canonical order.
inline constexpr std::array<const char*, 5> kScorecardCategories = {
    "Functional Description", "Statistical Analysis", "Algorithmic Transparency",
    "Interpretability", "Internal Analysis"};

struct QuestionnaireCategory {
    std::string name;
    std::vector<std::string> questions;
    std::vector<int> answers;  // 0 = not applicable, 1 = partial, 2 = total
};

struct Questionnaire {
    std::string tool;
    std::vector<QuestionnaireCategory> categories;  // canonical order

    std::size_t question_count() const;
};

// Plain-text key-value document:
//   tool: <name>
//   category: <one of the five category names>
//   question: <text>
//   answer: 0|1|2
// Lines starting with '#' are comments. Categories parse in canonical order
// regardless of file order; unknown categories or answers reject the file.
Questionnaire load_questionnaire(const std::string& path);
Questionnaire parse_questionnaire(const std::string& text);

// Normalized category score: S = 100 * sum(P_i) / (N * W) with W = 2.
double score_category(const std::vector<int>& answers);

struct Scorecard {
    std::string tool;
    std::array<double, 5> category_scores = {};  // canonical order, each in [0,100]
    double overall = 0.0;                        // plain mean of the five
};

// Requires every category present with at least one question.
Scorecard score_tool(const Questionnaire& q);

// CSV matrix: one row per tool (input order), columns = the five categories
// plus the overall mean.
std::string compare_scorecards(const std::vector<Scorecard>& cards);

std::string scorecard_to_text(const Scorecard& card);

}  // namespace automal
