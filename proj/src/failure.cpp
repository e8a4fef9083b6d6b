#include "tasklogic/failure.hpp"

#include <map>
#include <stdexcept>

namespace tasklogic {

FailPath::FailPath() : segments_{"F"} {}

FailPath FailPath::under_root(std::vector<std::string> below) {
    std::vector<std::string> segments{"F"};
    for (auto& s : below) {
        if (s.empty()) {
            throw std::invalid_argument("empty failure path segment");
        }
        segments.push_back(std::move(s));
    }
    return FailPath(std::move(segments));
}

FailPath FailPath::parse(std::string_view text) {
    if (text.empty() || text.front() != '/') {
        throw std::invalid_argument("failure path must start with '/': " + std::string(text));
    }
    std::vector<std::string> segments;
    std::size_t pos = 1;
    while (true) {
        std::size_t next = text.find('/', pos);
        std::string_view seg = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        if (seg.empty()) {
            throw std::invalid_argument("empty failure path segment: " + std::string(text));
        }
        segments.emplace_back(seg);
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    if (segments.front() != "F") {
        throw std::invalid_argument("failure path must be rooted at /F: " + std::string(text));
    }
    return FailPath(std::move(segments));
}

FailPath FailPath::user(std::vector<std::string> below_usr) {
    below_usr.insert(below_usr.begin(), "usr");
    return under_root(std::move(below_usr));
}

FailPath FailPath::sys(std::string leaf) {
    return under_root({"sys", std::move(leaf)});
}

bool FailPath::is_prefix_of(const FailPath& other) const {
    if (segments_.size() > other.segments_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i] != other.segments_[i]) {
            return false;
        }
    }
    return true;
}

bool FailPath::is_user() const {
    return segments_.size() > 2 && segments_[1] == "usr";
}

std::string FailPath::str() const {
    std::string out;
    for (const auto& s : segments_) {
        out += '/';
        out += s;
    }
    return out;
}

std::string ExceptionTree::joined() const {
    std::string out;
    for (const auto& p : paths_) {
        if (!out.empty()) {
            out += ", ";
        }
        out += p.str();
    }
    return out;
}

ExceptionTree throw_failure(FailPath path) {
    return ExceptionTree{std::move(path)};
}

ExceptionTree merge(const ExceptionTree& a, const ExceptionTree& b) {
    ExceptionTree out = a;
    for (const auto& p : b.paths()) {
        out.insert(p);
    }
    return out;
}

bool matches(const FailPath& handler, const ExceptionTree& tree) {
    for (const auto& p : tree.paths()) {
        if (handler.is_prefix_of(p)) {
            return true;
        }
    }
    return false;
}

namespace {

struct Trie {
    std::map<std::string, Trie> children;
};

void draw(const Trie& node, const std::string& indent, std::string& out) {
    std::size_t i = 0;
    for (const auto& [name, child] : node.children) {
        bool last = ++i == node.children.size();
        out += '\n';
        out += indent;
        out += last ? "└─ " : "├─ ";
        out += name;
        draw(child, indent + (last ? "   " : "│  "), out);
    }
}

}  // namespace

std::string render(const ExceptionTree& tree) {
    Trie root;
    for (const auto& p : tree.paths()) {
        Trie* node = &root;
        const auto& segs = p.segments();
        for (std::size_t i = 1; i < segs.size(); ++i) {
            node = &node->children[segs[i]];
        }
    }
    std::string out = "F";
    draw(root, "", out);
    return out;
}

}  // namespace tasklogic
