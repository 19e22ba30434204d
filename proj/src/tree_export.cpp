#include <cstdio>
#include <sstream>

#include "automal/explain.hpp"

namespace automal {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string escape_label(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string export_tree(const TreeModel& tree,
                        const std::vector<std::string>& feature_names) {
    std::ostringstream out;
    out << "digraph decision_tree {\n";
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        const TreeNode& n = tree.nodes[id];
        if (n.feature < 0) {
            out << "  n" << id << " [shape=box, label=\"p0=" << fmt17(n.prob[0])
                << " p1=" << fmt17(n.prob[1]) << "\"];\n";
            continue;
        }
        const auto f = static_cast<std::size_t>(n.feature);
        const std::string name =
            f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f);
        out << "  n" << id << " [label=\"" << escape_label(name) << " <= "
            << fmt17(n.threshold) << "\"];\n";
        out << "  n" << id << " -> n" << n.left << " [label=\"yes\"];\n";
        out << "  n" << id << " -> n" << n.right << " [label=\"no\"];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace automal
