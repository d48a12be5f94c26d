#include "stgcn/skl.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "stgcn/graph.hpp"
#include "stgcn/keyvalue.hpp"

namespace stgcn {

namespace {

struct Line {
    std::string text;
    std::size_t number;
};

// Significant lines only: comments and blank lines dropped, numbers kept.
std::vector<Line> significant_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t no = 0, pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view raw = end == std::string_view::npos ? text.substr(pos)
                                                             : text.substr(pos, end - pos);
        ++no;
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        std::string stripped = trim(raw);
        if (stripped.empty() || stripped[0] == '#') continue;
        lines.push_back(Line{std::move(stripped), no});
    }
    return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::int64_t header_int(const Line& line, std::string_view token, const char* what) {
    std::int64_t v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw SklError(SklErrorKind::kBadHeader, line.number,
                       std::string(what) + " is not an integer: '" + std::string(token) + "'");
    }
    return v;
}

}  // namespace

SkeletonSequence parse_skl(std::string_view text) {
    std::vector<Line> lines = significant_lines(text);
    std::size_t li = 0;
    auto need_line = [&](const char* what) -> const Line& {
        if (li >= lines.size()) {
            std::size_t at = lines.empty() ? 1 : lines.back().number;
            throw SklError(SklErrorKind::kBadHeader, at,
                           std::string("unexpected end of file, expected ") + what);
        }
        return lines[li++];
    };

    {
        const Line& magic = need_line("'SKL 1'");
        if (magic.text != "SKL 1") {
            throw SklError(SklErrorKind::kBadMagic, magic.number,
                           "expected 'SKL 1', got '" + magic.text + "'");
        }
    }
    SkeletonSequence seq;
    {
        const Line& line = need_line("'template <name>'");
        auto tokens = split_ws(line.text);
        if (tokens.size() != 2 || tokens[0] != "template") {
            throw SklError(SklErrorKind::kBadHeader, line.number,
                           "expected 'template <name>', got '" + line.text + "'");
        }
        seq.template_name = std::string(tokens[1]);
    }
    std::size_t c_n = 0, j_n = 0, t_n = 0;
    std::size_t dims_line = 0;
    {
        const Line& line = need_line("'dims <C> <J> <T>'");
        auto tokens = split_ws(line.text);
        if (tokens.size() != 4 || tokens[0] != "dims") {
            throw SklError(SklErrorKind::kBadHeader, line.number,
                           "expected 'dims <C> <J> <T>', got '" + line.text + "'");
        }
        std::int64_t c = header_int(line, tokens[1], "C");
        std::int64_t j = header_int(line, tokens[2], "J");
        std::int64_t t = header_int(line, tokens[3], "T");
        if (c != 3) {
            throw SklError(SklErrorKind::kExtentMismatch, line.number,
                           "dims C must be 3, got " + std::to_string(c));
        }
        if (j < 1 || t < 1) {
            throw SklError(SklErrorKind::kExtentMismatch, line.number,
                           "dims J and T must be positive");
        }
        c_n = 3;
        j_n = static_cast<std::size_t>(j);
        t_n = static_cast<std::size_t>(t);
        dims_line = line.number;
    }
    if (has_template(seq.template_name)) {
        std::size_t expect = find_template(seq.template_name).joint_count;
        if (expect != j_n) {
            throw SklError(SklErrorKind::kExtentMismatch, dims_line,
                           "template '" + seq.template_name + "' has " + std::to_string(expect) +
                               " joints, dims says " + std::to_string(j_n));
        }
    }
    {
        const Line& line = need_line("'label <int>'");
        auto tokens = split_ws(line.text);
        if (tokens.size() != 2 || tokens[0] != "label") {
            throw SklError(SklErrorKind::kBadHeader, line.number,
                           "expected 'label <int>', got '" + line.text + "'");
        }
        std::int64_t label = header_int(line, tokens[1], "label");
        if (label < 0) {
            throw SklError(SklErrorKind::kBadHeader, line.number, "label must be non-negative");
        }
        seq.label = static_cast<std::size_t>(label);
    }
    {
        const Line& line = need_line("'subject <int>'");
        auto tokens = split_ws(line.text);
        if (tokens.size() != 2 || tokens[0] != "subject") {
            throw SklError(SklErrorKind::kBadHeader, line.number,
                           "expected 'subject <int>', got '" + line.text + "'");
        }
        seq.subject = header_int(line, tokens[1], "subject");
    }

    seq.joints = Tensor({c_n, j_n, t_n});
    for (std::size_t t = 0; t < t_n; ++t) {
        if (li >= lines.size()) {
            std::size_t at = lines.back().number;
            throw SklError(SklErrorKind::kExtentMismatch, at,
                           "expected " + std::to_string(t_n) + " frame lines, found only " +
                               std::to_string(t));
        }
        const Line& line = lines[li++];
        auto tokens = split_ws(line.text);
        if (tokens.size() != j_n * c_n) {
            throw SklError(SklErrorKind::kExtentMismatch, line.number,
                           "frame " + std::to_string(t) + " has " + std::to_string(tokens.size()) +
                               " values, expected " + std::to_string(j_n * c_n));
        }
        for (std::size_t j = 0; j < j_n; ++j) {
            for (std::size_t c = 0; c < c_n; ++c) {
                std::string_view token = tokens[j * c_n + c];
                double v = 0.0;
                auto res = std::from_chars(token.data(), token.data() + token.size(), v);
                if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
                    throw SklError(SklErrorKind::kNonNumeric, line.number,
                                   "token '" + std::string(token) + "' is not a number");
                }
                if (!std::isfinite(v)) {
                    throw SklError(SklErrorKind::kNonFinite, line.number,
                                   "coordinate '" + std::string(token) + "' is not finite");
                }
                seq.joints.at(c, j, t) = v;
            }
        }
    }
    if (li < lines.size()) {
        throw SklError(SklErrorKind::kExtentMismatch, lines[li].number,
                       "trailing content after " + std::to_string(t_n) + " frame lines");
    }
    return seq;
}

std::string serialize_skl(const SkeletonSequence& seq) {
    const std::size_t c_n = seq.joints.extent(0), j_n = seq.joints.extent(1),
                      t_n = seq.joints.extent(2);
    std::string out;
    out += "SKL 1\n";
    out += "template " + seq.template_name + "\n";
    out += "dims " + std::to_string(c_n) + " " + std::to_string(j_n) + " " + std::to_string(t_n) +
           "\n";
    out += "label " + std::to_string(seq.label) + "\n";
    out += "subject " + std::to_string(seq.subject) + "\n";
    for (std::size_t t = 0; t < t_n; ++t) {
        for (std::size_t j = 0; j < j_n; ++j) {
            for (std::size_t c = 0; c < c_n; ++c) {
                if (j != 0 || c != 0) out += " ";
                out += format_double(seq.joints.at(c, j, t));
            }
        }
        out += "\n";
    }
    return out;
}

SkeletonSequence load_skl_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_skl(buf.str());
}

void save_skl_file(const SkeletonSequence& sequence, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    std::string text = serialize_skl(sequence);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace stgcn
