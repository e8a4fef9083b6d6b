#pragma once

#include <compare>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tasklogic {

/// A hierarchical failure path such as /F/usr/EOF. The first segment is
/// always "F"; /F is the ancestor of every path.
class FailPath {
public:
    /// The root path /F.
    FailPath();

    /// Segments below the root, e.g. {"usr", "EOF"} for /F/usr/EOF.
    static FailPath under_root(std::vector<std::string> below);

    /// Parses the canonical text form. Throws std::invalid_argument when the
    /// text is not "/F" followed by zero or more "/segment" parts.
    static FailPath parse(std::string_view text);

    /// Surface form of a user throw: f(EOF) is /F/usr/EOF, f(a/b) is /F/usr/a/b.
    static FailPath user(std::vector<std::string> below_usr);

    /// System failures: /F/sys/<leaf>.
    static FailPath sys(std::string leaf);

    const std::vector<std::string>& segments() const { return segments_; }
    bool is_root() const { return segments_.size() == 1; }

    /// Non-strict prefix test on segments.
    bool is_prefix_of(const FailPath& other) const;

    /// Strictly below /F/usr.
    bool is_user() const;

    std::string str() const;

    auto operator<=>(const FailPath&) const = default;
    bool operator==(const FailPath&) const = default;

private:
    explicit FailPath(std::vector<std::string> segments) : segments_(std::move(segments)) {}

    std::vector<std::string> segments_;
};

// Fixed leaves of the system failure directory.
namespace sys_failure {
inline const char* const kTest = "test";
inline const char* const kUnbound = "unbound";
inline const char* const kDivZero = "div0";
inline const char* const kUndefined = "undef";
inline const char* const kDepth = "depth";
inline const char* const kNoFailtree = "case";
}  // namespace sys_failure

/// The Failtree: a finite set of failure paths, rendered as a rooted tree.
class ExceptionTree {
public:
    ExceptionTree() = default;
    ExceptionTree(std::initializer_list<FailPath> paths) : paths_(paths) {}

    const std::set<FailPath>& paths() const { return paths_; }
    bool empty() const { return paths_.empty(); }

    void insert(FailPath path) { paths_.insert(std::move(path)); }

    /// "/F/a, /F/b" in path order.
    std::string joined() const;

    bool operator==(const ExceptionTree&) const = default;

private:
    std::set<FailPath> paths_;
};

/// Singleton tree for a thrown failure.
ExceptionTree throw_failure(FailPath path);

ExceptionTree merge(const ExceptionTree& a, const ExceptionTree& b);

/// True iff some path in the tree has `handler` as a prefix.
bool matches(const FailPath& handler, const ExceptionTree& tree);

/// Multi-line drawing, children sorted lexicographically, no trailing newline.
///
///     F
///     ├─ sys
///     │  └─ test
///     └─ usr
///        └─ EOF
std::string render(const ExceptionTree& tree);

}  // namespace tasklogic
