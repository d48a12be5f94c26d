#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "stgcn/tensor.hpp"

namespace stgcn {

/// One labeled skeleton sample: joint coordinates in meters, (3, J, T).
struct SkeletonSequence {
    Tensor joints;
    std::size_t label = 0;
    std::int64_t subject = 0;
    std::string template_name;

    std::size_t joint_count() const { return joints.extent(1); }
    std::size_t frame_count() const { return joints.extent(2); }
};

enum class SklErrorKind {
    kBadMagic,       // first line is not "SKL 1"
    kBadHeader,      // malformed template/dims/label/subject line
    kExtentMismatch, // header extents disagree with the body (or a known template)
    kNonNumeric,     // a frame token failed to parse as a number
    kNonFinite,      // a coordinate parsed to NaN or infinity
};

class SklError : public std::runtime_error {
public:
    SklError(SklErrorKind kind, std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          kind_(kind),
          line_(line) {}

    SklErrorKind kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    SklErrorKind kind_;
    std::size_t line_;
};

/// Parses the SKL text format:
///
///   SKL 1
///   template <name>
///   dims <C> <J> <T>        (C must be 3)
///   label <int>
///   subject <int>
///   ... T frame lines, each J*C floats, joint-major (x y z per joint) ...
///
/// Lines starting with '#' and blank lines are ignored. Errors carry the
/// 1-based line number of the offending line.
SkeletonSequence parse_skl(std::string_view text);

/// Canonical serialization: shortest round-trip decimals, one frame per line.
/// parse_skl(serialize_skl(s)) reproduces s exactly (bitwise coordinates).
std::string serialize_skl(const SkeletonSequence& sequence);

SkeletonSequence load_skl_file(const std::string& path);
void save_skl_file(const SkeletonSequence& sequence, const std::string& path);

}  // namespace stgcn
