#include "automal/scorecard.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "automal/error.hpp"

namespace automal {

std::size_t Questionnaire::question_count() const {
    std::size_t n = 0;
    for (const auto& c : categories) n += c.questions.size();
    return n;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::size_t category_index(const std::string& name) {
    for (std::size_t i = 0; i < kScorecardCategories.size(); ++i)
        if (name == kScorecardCategories[i]) return i;
    throw ValueError("questionnaire: unknown category '" + name + "'");
}

}  // namespace

Questionnaire parse_questionnaire(const std::string& text) {
    Questionnaire q;
    q.categories.resize(kScorecardCategories.size());
    for (std::size_t i = 0; i < kScorecardCategories.size(); ++i)
        q.categories[i].name = kScorecardCategories[i];

    std::istringstream in(text);
    std::string line;
    std::size_t current = kScorecardCategories.size();
    std::string pending_question;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw ValueError("questionnaire: line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) fail("expected 'key: value'");
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));

        if (key == "tool") {
            q.tool = value;
        } else if (key == "category") {
            if (!pending_question.empty()) fail("question without an answer");
            current = category_index(value);
        } else if (key == "question") {
            if (current >= kScorecardCategories.size())
                fail("question before any category");
            if (!pending_question.empty()) fail("question without an answer");
            if (value.empty()) fail("empty question text");
            pending_question = value;
        } else if (key == "answer") {
            if (pending_question.empty()) fail("answer without a question");
            if (value != "0" && value != "1" && value != "2")
                fail("answer must be 0, 1, or 2, got '" + value + "'");
            q.categories[current].questions.push_back(pending_question);
            q.categories[current].answers.push_back(value[0] - '0');
            pending_question.clear();
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (!pending_question.empty())
        throw ValueError("questionnaire: trailing question without an answer");
    return q;
}

Questionnaire load_questionnaire(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_questionnaire: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_questionnaire(buf.str());
}

double score_category(const std::vector<int>& answers) {
    if (answers.empty()) throw ValueError("score_category: no answers");
    int total = 0;
    for (int a : answers) {
        if (a < 0 || a > 2) throw ValueError("score_category: answer outside {0,1,2}");
        total += a;
    }
    return 100.0 * static_cast<double>(total) /
           (2.0 * static_cast<double>(answers.size()));
}

Scorecard score_tool(const Questionnaire& q) {
    Scorecard card;
    card.tool = q.tool;
    double sum = 0.0;
    for (std::size_t i = 0; i < kScorecardCategories.size(); ++i) {
        const auto& cat = q.categories[i];
        if (cat.answers.empty())
            throw ValueError("score_tool: category '" + std::string(kScorecardCategories[i]) +
                             "' has no answered questions");
        card.category_scores[i] = score_category(cat.answers);
        sum += card.category_scores[i];
    }
    card.overall = sum / static_cast<double>(kScorecardCategories.size());
    return card;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string compare_scorecards(const std::vector<Scorecard>& cards) {
    if (cards.empty()) throw ValueError("compare_scorecards: no scorecards");
    std::ostringstream out;
    out << "tool";
    for (const auto* name : kScorecardCategories) out << ',' << name;
    out << ",overall\n";
    for (const auto& card : cards) {
        out << card.tool;
        for (double s : card.category_scores) out << ',' << fmt2(s);
        out << ',' << fmt2(card.overall) << '\n';
    }
    return out.str();
}

std::string scorecard_to_text(const Scorecard& card) {
    std::ostringstream out;
    out << "tool: " << card.tool << '\n';
    for (std::size_t i = 0; i < kScorecardCategories.size(); ++i)
        out << kScorecardCategories[i] << ": " << fmt2(card.category_scores[i]) << '\n';
    out << "overall: " << fmt2(card.overall) << '\n';
    return out.str();
}

}  // namespace automal
